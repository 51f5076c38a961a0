"""Token-level scoring sessions: a deterministic scripted mock and a remote
client for the scorer wire protocol.

The mock needs no model downloads. Its tokenizer is a whitespace+punctuation
splitter whose pieces concatenate back to the source text exactly, and its
distributions are a pure function of the prompt text and a vocabulary size
frozen at construction, so results are bit-identical regardless of call
order or parallelism.
"""

from __future__ import annotations

import hashlib
import math
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

try:
    import httpx
except ImportError:  # pragma: no cover - exercised only in stripped envs
    httpx = None


class ScorerUnavailable(RuntimeError):
    """Remote scorer could not serve a request."""

    def __init__(self, status: int, detail: str):
        self.status = status
        self.detail = detail[:200]
        super().__init__(f"scorer unavailable (status {status}): {self.detail}")


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple[int, ...]
    pieces: tuple[str, ...]

    @property
    def text(self) -> str:
        return "".join(self.pieces)

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class CallStats:
    """Per-episode scorer accounting. Counters only ever increase."""

    n_logprob_calls: int = 0
    n_tokens_scored: int = 0
    n_skill_scorings: int = 0
    n_generate_calls: int = 0

    def merged(self, other: "CallStats") -> "CallStats":
        return CallStats(
            self.n_logprob_calls + other.n_logprob_calls,
            self.n_tokens_scored + other.n_tokens_scored,
            self.n_skill_scorings + other.n_skill_scorings,
            self.n_generate_calls + other.n_generate_calls,
        )


class ScorerSession(Protocol):
    """Contract shared by the mock and the remote client.

    ``next_token_logprobs`` restricted to an allowed set returns exactly the
    requested ids with their unrestricted log-probabilities (no
    renormalization); over the full vocabulary the probabilities sum to one.
    """

    concurrency_safe: bool

    def tokenize(self, text: str) -> TokenSequence: ...

    def next_token_logprobs(
        self, prompt_ids: Sequence[int], allowed: Iterable[int] | None = None
    ) -> dict[int, float]: ...

    def generate(self, prompt: str, max_tokens: int = 256, stop: Sequence[str] = ()) -> str: ...

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...

    def info(self) -> dict: ...


# --- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(r" ?[A-Za-z0-9]+| ?[^A-Za-z0-9\s]|\s")


def simple_tokenize(text: str) -> list[str]:
    """Split text into word/punctuation pieces that concatenate back exactly."""
    return _TOKEN_RE.findall(text)


def _stable_hash64(piece: str) -> int:
    return int.from_bytes(hashlib.md5(piece.encode("utf-8")).digest()[:8], "big")


# --- embeddings --------------------------------------------------------------

_WORD_RE = re.compile(r"[a-z0-9]+")
EMBED_DIM = 256


def bow_embed(texts: Sequence[str], dim: int = EMBED_DIM) -> list[list[float]]:
    """Feature-hashed bag-of-words embeddings, L2-normalized. Deterministic
    and dependency-free; adequate for cosine ranking in tests and offline runs."""
    out = []
    for text in texts:
        vec = [0.0] * dim
        for word in _WORD_RE.findall(text.lower()):
            vec[_stable_hash64(word) % dim] += 1.0
        norm = math.sqrt(sum(x * x for x in vec))
        if norm == 0.0:
            vec[0] = 1.0
            norm = 1.0
        out.append([x / norm for x in vec])
    return out


# --- scripted mock ------------------------------------------------------------


@dataclass(frozen=True)
class ScriptEntry:
    plan: tuple[str, ...]
    # feedback-substring -> replacement continuation for the steps after the
    # failed one; lets a script "replan" when the prompt carries feedback
    recovery: tuple[tuple[str, tuple[str, ...]], ...] = ()


@dataclass
class MockScript:
    plans: dict[str, ScriptEntry] = field(default_factory=dict)
    peak_prob: float = 0.9
    supports_generate: bool = True

    def __post_init__(self):
        if not (0.0 < self.peak_prob < 1.0):
            raise ValueError("peak_prob must be in (0, 1)")

    @staticmethod
    def from_json(data: dict) -> "MockScript":
        plans: dict[str, ScriptEntry] = {}
        for instruction, entry in data.get("plans", {}).items():
            if isinstance(entry, list):
                plans[instruction] = ScriptEntry(tuple(entry))
            else:
                recovery = tuple(
                    (marker, tuple(alt)) for marker, alt in entry.get("recovery", {}).items()
                )
                plans[instruction] = ScriptEntry(tuple(entry["plan"]), recovery)
        return MockScript(
            plans=plans,
            peak_prob=data.get("peak_prob", 0.9),
            supports_generate=data.get("supports_generate", True),
        )

    def validate(self, profile) -> None:
        """Every scripted surface must parse under the profile."""
        from .skills import parse_skill

        for instruction, entry in self.plans.items():
            for surface in entry.plan + tuple(s for _, alt in entry.recovery for s in alt):
                parse_skill(surface, profile)  # raises NoSuchSkill

    def all_text(self) -> list[str]:
        lines = []
        for instruction, entry in self.plans.items():
            lines.append(instruction)
            lines.append(_plan_line(entry.plan))
            for _, alt in entry.recovery:
                lines.append(_plan_line(alt))
        return lines


def _plan_line(surfaces: Sequence[str]) -> str:
    return ", ".join(f"{i}. {s}" for i, s in enumerate(surfaces, start=1)) + "."


_SEED_TEXT = (
    "Robot: Hi there, I'm a robot operating in a home.\n"
    "Robot: You can ask me to do various tasks and I'll tell you the sequence of "
    "actions I would do to accomplish your task.\n"
    "Human: Input user instruction: (this action failed: ) done.\n"
    + " ".join(str(n) for n in range(40))
)

_STEP_SPLIT_RE = re.compile(r"\d+\.")
_FAILED_RE = re.compile(r"^(.*?)\s*\((this action failed: .*)\)$")
_OOV_BASE = 1 << 32


class MockScorer:
    """Deterministic scripted scorer.

    When the trailing query instruction of a prompt matches a script key, the
    next token of the scripted continuation carries ``peak_prob`` and every
    other vocabulary token shares the remainder uniformly; off-script prompts
    are uniform. Restriction to an allowed set never renormalizes.
    """

    concurrency_safe = True

    def __init__(
        self,
        script: MockScript | None = None,
        extra_corpus: Iterable[str] = (),
        max_context: int = 1_000_000,
    ):
        self.script = script or MockScript()
        self.peak_prob = self.script.peak_prob
        self.max_context = max_context
        corpus = [_SEED_TEXT, *self.script.all_text(), *extra_corpus]
        pieces = sorted({p for text in corpus for p in simple_tokenize(text)})
        if len(pieces) < 2:
            pieces = sorted(set(pieces) | {" a", " b"})
        self._base_pieces = pieces
        self._piece_to_id: dict[str, int] = {p: i for i, p in enumerate(pieces)}
        self._id_to_piece: dict[int, str] = {i: p for i, p in enumerate(pieces)}
        self._vocab_size = len(pieces)
        self._lock = threading.Lock()

    # -- vocabulary -----------------------------------------------------------

    def piece_id(self, piece: str) -> int:
        pid = self._piece_to_id.get(piece)
        if pid is not None:
            return pid
        pid = _OOV_BASE + (_stable_hash64(piece) % (1 << 31))
        with self._lock:
            clash = self._id_to_piece.get(pid)
            if clash is not None and clash != piece:
                raise RuntimeError(f"token-id collision between {clash!r} and {piece!r}")
            self._piece_to_id[piece] = pid
            self._id_to_piece[pid] = piece
        return pid

    def tokenize(self, text: str) -> TokenSequence:
        pieces = simple_tokenize(text)
        return TokenSequence(tuple(self.piece_id(p) for p in pieces), tuple(pieces))

    def detokenize(self, ids: Sequence[int]) -> str:
        return "".join(self._id_to_piece[i] for i in ids)

    # -- script targeting -------------------------------------------------------

    def _entry_for(self, instruction: str) -> ScriptEntry | None:
        return self.script.plans.get(instruction.strip())

    def _target_continuation(self, text: str) -> str | None:
        """Remaining scripted text from the end of the prompt, or None."""
        robot_pos = text.rfind("\nRobot:")
        gen_pos = text.rfind("Input user instruction: ")
        if gen_pos > robot_pos:
            return self._generative_continuation(text, gen_pos)
        if robot_pos < 0:
            return None
        human_pos = text.rfind("Human: ", 0, robot_pos)
        if human_pos < 0:
            return None
        entry = self._entry_for(text[human_pos + len("Human: "):robot_pos])
        if entry is None:
            return None
        line = text[robot_pos + len("\nRobot:"):]
        if "\n" in line:
            return None
        segments = _STEP_SPLIT_RE.split(line)
        if len(segments) < 2:
            return None
        completed, partial = segments[1:-1], segments[-1]
        surface = self._next_surface(entry, completed)
        if surface is None:
            return None
        target = " " + surface + ("." if surface == "done" else ",")
        if target.startswith(partial) and partial != target:
            return target[len(partial):]
        return None

    def _generative_continuation(self, text: str, gen_pos: int) -> str | None:
        after = text[gen_pos + len("Input user instruction: "):]
        newline = after.find("\n")
        if newline < 0:
            query, generated = after, ""
        else:
            query, generated = after[:newline], after[newline + 1:]
        entry = self._entry_for(query)
        if entry is None:
            return None
        full = _plan_line(entry.plan)
        if full.startswith(generated) and generated != full:
            return full[len(generated):]
        return None

    @staticmethod
    def _next_surface(entry: ScriptEntry, completed: list[str]) -> str | None:
        active = entry.plan
        consumed = 0
        for segment in completed:
            step = segment.strip().rstrip(",").strip()
            match = _FAILED_RE.match(step)
            consumed += 1
            if match and entry.recovery:
                feedback = match.group(2)
                for marker, alt in entry.recovery:
                    if marker in feedback:
                        active = alt
                        consumed = 0
                        break
        return active[consumed] if consumed < len(active) else None

    # -- session API ------------------------------------------------------------

    def next_token_logprobs(
        self, prompt_ids: Sequence[int], allowed: Iterable[int] | None = None
    ) -> dict[int, float]:
        text = self.detokenize(prompt_ids)
        target_id: int | None = None
        continuation = self._target_continuation(text)
        if continuation:
            target_id = self.piece_id(simple_tokenize(continuation)[0])
        vocab = self._vocab_size
        if target_id is None:
            logp = -math.log(vocab)
            keys = list(allowed) if allowed is not None else range(vocab)
            return {i: logp for i in keys}
        peak = math.log(self.peak_prob)
        rest = math.log((1.0 - self.peak_prob) / (vocab - 1))
        if allowed is not None:
            return {i: (peak if i == target_id else rest) for i in allowed}
        out = {i: rest for i in range(vocab)}
        out[target_id] = peak
        return out

    def generate(self, prompt: str, max_tokens: int = 256, stop: Sequence[str] = ()) -> str:
        if not self.script.supports_generate:
            raise RuntimeError("this mock scorer is configured without generation support")
        out = ""
        for _ in range(max_tokens):
            continuation = self._target_continuation(prompt + out)
            if not continuation:
                break
            out += simple_tokenize(continuation)[0]
            for marker in stop:
                if marker in out:
                    return out[: out.index(marker)]
        return out

    @property
    def supports_generate(self) -> bool:
        return self.script.supports_generate

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return bow_embed(texts)

    def info(self) -> dict:
        return {"model": "mock", "vocab_size": self._vocab_size, "max_context": self.max_context}


# --- remote client ------------------------------------------------------------


class RemoteScorer:
    """HTTP client for the scorer wire protocol.

    Idempotent calls (info/tokenize/logprobs/embed) retry up to three times
    with exponential backoff; generation is requested at temperature 0 and
    never retried. Connections are pooled by the underlying client.
    """

    concurrency_safe = True

    _RETRIES = 3
    _BACKOFF = 0.2

    def __init__(self, endpoint_url: str, auth_token: str | None = None, timeout: float = 60.0):
        if httpx is None:
            raise RuntimeError("httpx is required for the remote scorer")
        headers = {"Authorization": f"Bearer {auth_token}"} if auth_token else {}
        self._client = httpx.Client(base_url=endpoint_url.rstrip("/"), headers=headers, timeout=timeout)
        self._tok_cache: dict[str, TokenSequence] = {}
        self._tok_lock = threading.Lock()
        self._info: dict | None = None

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteScorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _request(self, method: str, path: str, json_body: dict | None = None, idempotent: bool = True) -> dict:
        attempts = self._RETRIES if idempotent else 1
        last_detail = ""
        for attempt in range(attempts):
            try:
                resp = self._client.request(method, path, json=json_body)
            except httpx.HTTPError as exc:
                last_detail = str(exc)
                if attempt + 1 < attempts:
                    time.sleep(self._BACKOFF * (2**attempt))
                    continue
                raise ScorerUnavailable(0, last_detail) from exc
            if resp.status_code >= 500 and attempt + 1 < attempts:
                last_detail = resp.text
                time.sleep(self._BACKOFF * (2**attempt))
                continue
            if resp.status_code >= 400:
                raise ScorerUnavailable(resp.status_code, resp.text)
            return resp.json()
        raise ScorerUnavailable(0, last_detail)

    def tokenize(self, text: str) -> TokenSequence:
        with self._tok_lock:
            cached = self._tok_cache.get(text)
        if cached is not None:
            return cached
        data = self._request("POST", "/v1/tokenize", {"text": text})
        seq = TokenSequence(tuple(data["ids"]), tuple(data["pieces"]))
        with self._tok_lock:
            if len(self._tok_cache) > 4096:
                self._tok_cache.clear()
            self._tok_cache[text] = seq
        return seq

    def next_token_logprobs(
        self, prompt_ids: Sequence[int], allowed: Iterable[int] | None = None
    ) -> dict[int, float]:
        body: dict = {"prompt_ids": list(prompt_ids)}
        if allowed is not None:
            body["allowed_ids"] = sorted(allowed)
        data = self._request("POST", "/v1/logprobs", body)
        return {int(k): float(v) for k, v in data["logprobs"].items()}

    def generate(self, prompt: str, max_tokens: int = 256, stop: Sequence[str] = ()) -> str:
        body = {"prompt": prompt, "max_tokens": max_tokens, "stop": list(stop), "temperature": 0}
        return self._request("POST", "/v1/generate", body, idempotent=False)["text"]

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return self._request("POST", "/v1/embed", {"texts": list(texts)})["vectors"]

    def info(self) -> dict:
        if self._info is None:
            self._info = self._request("GET", "/v1/info")
        return self._info

    @property
    def supports_generate(self) -> bool:
        return True


def remote_scorer(endpoint_url: str, auth_token: str | None = None, timeout: float = 60.0) -> RemoteScorer:
    """Connect to a remote scorer and verify it responds to /v1/info.

    Raises ScorerUnavailable when the endpoint is unreachable or unhealthy.
    """
    session = RemoteScorer(endpoint_url, auth_token=auth_token, timeout=timeout)
    try:
        session.info()
    except ScorerUnavailable:
        session.close()
        raise
    return session
