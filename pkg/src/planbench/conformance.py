"""Scorer-protocol conformance checks, runnable against any ScorerSession.

The sidecar's test suite drives these same checks through the remote client;
each function raises AssertionError with a readable message on violation.
"""

from __future__ import annotations

import math
from typing import Sequence

from .scorer import ScorerSession

ROUNDTRIP_TEXTS = (
    "Robot: 1. find an apple, 2. pick up the apple, 3. done.",
    "Human: Put a spoon in the sink.\nRobot: 1.",
    "  odd   spacing\tand\nnewlines ",
    "punctuation: (this action failed: Apple is not visible because it is in Fridge)",
    "unicode café naïve — ok",
    "",
)


def check_info(session: ScorerSession) -> dict:
    info = session.info()
    assert isinstance(info.get("vocab_size"), int) and info["vocab_size"] >= 2, info
    assert isinstance(info.get("max_context"), int) and info["max_context"] > 0, info
    assert isinstance(info.get("model"), str), info
    return info


def check_tokenize_roundtrip(session: ScorerSession, texts: Sequence[str] = ROUNDTRIP_TEXTS) -> None:
    for text in texts:
        seq = session.tokenize(text)
        assert len(seq.ids) == len(seq.pieces), f"ids/pieces length mismatch for {text!r}"
        joined = "".join(seq.pieces)
        assert joined == text, f"pieces do not reproduce {text!r}: got {joined!r}"


def check_full_vocab_logsumexp(session: ScorerSession, tolerance: float = 1e-3) -> None:
    prompt = session.tokenize("Human: Put a spoon in the sink.\nRobot: 1.")
    logprobs = session.next_token_logprobs(prompt.ids)
    total = _logsumexp(list(logprobs.values()))
    assert abs(total) <= tolerance, f"full-vocab logsumexp {total} exceeds {tolerance}"


def check_allowed_ids_exactness(session: ScorerSession) -> None:
    prompt = session.tokenize("Human: Put a spoon in the sink.\nRobot: 1.")
    full = session.next_token_logprobs(prompt.ids)
    some = sorted(full)[:5]
    restricted = session.next_token_logprobs(prompt.ids, allowed=set(some))
    assert set(restricted) == set(some), "restricted call must return exactly the requested ids"
    for tok in some:
        assert math.isclose(restricted[tok], full[tok], rel_tol=0, abs_tol=1e-6), (
            "restriction must not renormalize: "
            f"token {tok} moved from {full[tok]} to {restricted[tok]}"
        )


def check_generate_deterministic(session: ScorerSession, prompt: str | None = None) -> None:
    prompt = prompt or "Human: Put a spoon in the sink.\nRobot: 1."
    first = session.generate(prompt, max_tokens=16)
    second = session.generate(prompt, max_tokens=16)
    assert first == second, f"temperature-0 generation not deterministic: {first!r} != {second!r}"


def check_embed_unit_norm(session: ScorerSession, tolerance: float = 1e-6) -> None:
    vectors = session.embed(["put the apple in the fridge", "wash the dishes", ""])
    for vec in vectors:
        norm = math.sqrt(sum(x * x for x in vec))
        assert abs(norm - 1.0) <= tolerance, f"embedding norm {norm} not unit within {tolerance}"


def run_all(session: ScorerSession) -> list[str]:
    """Run every conformance check; returns the names that passed."""
    checks = [
        check_info,
        check_tokenize_roundtrip,
        check_full_vocab_logsumexp,
        check_allowed_ids_exactness,
        check_generate_deterministic,
        check_embed_unit_norm,
    ]
    passed = []
    for check in checks:
        check(session)
        passed.append(check.__name__)
    return passed


def _logsumexp(values: list[float]) -> float:
    peak = max(values)
    return peak + math.log(sum(math.exp(v - peak) for v in values))
