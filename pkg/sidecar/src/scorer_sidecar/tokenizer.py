"""Deterministic word-level tokenizer for the built-in model backend.

Pieces are word/punctuation chunks whose concatenation reproduces the input
exactly. Ids are assigned within the model's fixed vocabulary: a seed lexicon
fills the low range at construction and unseen pieces claim ids dynamically,
falling back to stable hash slots once the free range is exhausted.
"""

from __future__ import annotations

import hashlib
import re
import threading

_TOKEN_RE = re.compile(r" ?[A-Za-z0-9]+| ?[^A-Za-z0-9\s]|\s")

_SEED_TEXT = (
    "Robot: Hi there, I'm a robot operating in a home.\n"
    "Robot: You can ask me to do various tasks and I'll tell you the sequence of "
    "actions I would do to accomplish your task.\n"
    "Human: Input user instruction: (this action failed: ) done.\n"
    "find pick up put down open close turn on off switch walk to grab slice the a an in\n"
    "apple ladle spoon plate potato fridge sink faucet microwave table counter lamp knife\n"
    + " ".join(str(n) for n in range(40))
)


def split_pieces(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


class WordTokenizer:
    def __init__(self, vocab_size: int = 4096):
        self.vocab_size = vocab_size
        self._piece_to_id: dict[str, int] = {}
        self._id_to_piece: dict[int, str] = {}
        self._lock = threading.Lock()
        self._next_free = 0
        for piece in sorted(set(split_pieces(_SEED_TEXT))):
            self._register(piece)

    def _register(self, piece: str) -> int:
        existing = self._piece_to_id.get(piece)
        if existing is not None:
            return existing
        if self._next_free < self.vocab_size * 3 // 4:
            pid = self._next_free
            self._next_free += 1
        else:
            # hash band; collisions are tolerated (first registrant keeps the
            # decode slot) since an id only needs a stable embedding row
            digest = hashlib.md5(piece.encode("utf-8")).digest()
            pid = self.vocab_size * 3 // 4 + int.from_bytes(digest[:4], "big") % (self.vocab_size // 4)
        self._piece_to_id[piece] = pid
        self._id_to_piece.setdefault(pid, piece)
        return pid

    def encode(self, text: str) -> tuple[list[int], list[str]]:
        pieces = split_pieces(text)
        with self._lock:
            ids = [self._register(p) for p in pieces]
        return ids, pieces

    def decode_id(self, token_id: int) -> str | None:
        return self._id_to_piece.get(token_id)

    def known_ids(self) -> list[int]:
        with self._lock:
            return sorted(self._id_to_piece)
