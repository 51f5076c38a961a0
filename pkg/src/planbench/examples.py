"""In-context example pools and the three selection strategies: seeded random
sampling per task type, task-specific sampling, and semantic similarity
ranking by embedding cosine."""

from __future__ import annotations

import hashlib
import json
import math
import random
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class Example:
    instruction: str
    plan: tuple[str, ...]
    task_type: str

    def as_prompt_pair(self) -> tuple[str, tuple[str, ...]]:
        return self.instruction, self.plan


@dataclass
class ExamplePool:
    entries: tuple[Example, ...]
    source: str = ""
    _embed_cache: dict[str, tuple[float, ...]] = field(default_factory=dict, repr=False)
    _cache_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def task_types(self) -> list[str]:
        return sorted({e.task_type for e in self.entries})

    def stratum(self, task_type: str) -> list[Example]:
        return [e for e in self.entries if e.task_type == task_type]


def load_pool(path: str, profile=None) -> ExamplePool:
    """Load a pool file: JSON array of {instruction, plan, task_type}.

    With a profile given, every plan surface is validated to parse and the
    task types are checked against the profile roster.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    entries = []
    for i, item in enumerate(data):
        try:
            entry = Example(item["instruction"], tuple(item["plan"]), item["task_type"])
        except KeyError as exc:
            raise SelectionError(f"{path}[{i}]: missing field {exc}") from None
        if profile is not None:
            from .skills import parse_skill

            for surface in entry.plan:
                parse_skill(surface, profile)
            if entry.task_type not in profile.task_types:
                raise SelectionError(
                    f"{path}[{i}]: task type {entry.task_type!r} not in profile {profile.name!r}"
                )
        entries.append(entry)
    return ExamplePool(tuple(entries), source=path)


@dataclass(frozen=True)
class SelectionConfig:
    strategy: str  # random | task_specific | semantic
    n_per_type: int = 1
    n_total: int = 5
    seed: int = 0


def select_random(pool: ExamplePool, n_per_type: int, seed: int) -> list[Example]:
    """N seeded uniform draws without replacement per task type, ordered by
    task type then draw order."""
    rng = random.Random(seed)
    out: list[Example] = []
    for task_type in pool.task_types():
        stratum = pool.stratum(task_type)
        if len(stratum) < n_per_type:
            raise SelectionError(
                f"task type {task_type!r} has {len(stratum)} examples, need {n_per_type}"
            )
        out.extend(rng.sample(stratum, n_per_type))
    return out


def select_task_specific(pool: ExamplePool, task_type: str, n: int, seed: int) -> list[Example]:
    stratum = pool.stratum(task_type)
    if not stratum:
        raise SelectionError(f"unknown task type {task_type!r}")
    if len(stratum) < n:
        raise SelectionError(f"task type {task_type!r} has {len(stratum)} examples, need {n}")
    return random.Random(seed).sample(stratum, n)


Embedder = Callable[[Sequence[str]], list[list[float]]]


def _text_key(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()


def _cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def _resolve_embedder(embedder) -> Embedder:
    embed = getattr(embedder, "embed", None)
    return embed if callable(embed) else embedder


def _pool_embeddings(pool: ExamplePool, embed: Embedder) -> list[tuple[float, ...]]:
    missing = []
    with pool._cache_lock:
        for entry in pool.entries:
            if _text_key(entry.instruction) not in pool._embed_cache:
                missing.append(entry.instruction)
    if missing:
        vectors = embed(missing)
        with pool._cache_lock:
            for text, vec in zip(missing, vectors):
                pool._embed_cache[_text_key(text)] = tuple(vec)
    with pool._cache_lock:
        return [pool._embed_cache[_text_key(e.instruction)] for e in pool.entries]


def select_semantic(pool: ExamplePool, instruction: str, n: int, embedder) -> list[Example]:
    """Top-n pool entries by cosine similarity to the instruction, descending,
    ties broken by pool index. Embeddings are cached on the pool by text hash."""
    if n <= 0:
        return []
    embed = _resolve_embedder(embedder)
    query_vec = embed([instruction])[0]
    pool_vecs = _pool_embeddings(pool, embed)
    ranked = sorted(
        range(len(pool.entries)),
        key=lambda i: (-_cosine(query_vec, pool_vecs[i]), i),
    )
    return [pool.entries[i] for i in ranked[:n]]
