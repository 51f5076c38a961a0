"""Prompt construction and the plan-execute episode loop.

Three decode modes are implemented: greedy token-by-token decoding
constrained by a trie over skill surfaces, full per-skill scoring with an
argmax over summed token log-probabilities, and free-form generation against
an admissible-skill list embedded in the prompt.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .goals import GoalReport, evaluate_goal
from .scorer import CallStats, ScorerSession
from .skills import EnvironmentProfile, NoSuchSkill, Skill, SkillSet, parse_skill, render_skill
from .worldsim import StepResult, WorldState, apply_skill, state_hash

PROMPT_PREFIX_LINES = (
    "Robot: Hi there, I'm a robot operating in a home.",
    "Robot: You can ask me to do various tasks and I'll tell you the sequence of actions "
    "I would do to accomplish your task.",
)

REPLAN_PREFIX_LINE = (
    "Robot: I can replan the action to perform successfully when the action fails with the "
    "message this action failed. If I generate the wrong plan, I'll make sure the command "
    "succeeds by replanning."
)

GENERATIVE_PREAMBLE = (
    "You are a robot operating in a home. A human user can ask you to do various tasks and "
    "you are supposed to tell the sequence of actions you would do to accomplish your task."
)

DEFAULT_MAX_STEPS = 30
DECODE_HEADROOM = 64


class PromptTooLong(ValueError):
    def __init__(self, overflow: int):
        self.overflow = overflow
        super().__init__(f"prompt exceeds the scorer context budget by {overflow} tokens")


@dataclass
class PromptSpec:
    """Everything needed to render one prompt deterministically."""

    query_instruction: str
    examples: Sequence[tuple[str, Sequence[str]]] = ()
    replanning_examples: Sequence[tuple[str, Sequence[str]]] | None = None
    history: Sequence[tuple[Skill, StepResult]] = ()
    include_feedback: bool = True
    prefix_lines: Sequence[str] = PROMPT_PREFIX_LINES
    replanning_prefix_line: str = REPLAN_PREFIX_LINE


def _steps_line(steps: Sequence[str]) -> str:
    return "Robot: " + ", ".join(f"{i}. {s}" for i, s in enumerate(steps, start=1)) + "."


def build_prompt(spec: PromptSpec, profile: EnvironmentProfile) -> str:
    """Render the exact prompt template.

    Examples render as "Human: {instr}" / "Robot: 1. {s1}, …, k. done." pairs.
    The query's Robot line carries the executed history, each failed step
    followed by its feedback message, and ends with the next step marker.
    """
    lines: list[str] = list(spec.prefix_lines)
    for instruction, steps in spec.examples:
        lines.append(f"Human: {instruction}")
        lines.append(_steps_line(steps))
    if spec.replanning_examples:
        lines.append(spec.replanning_prefix_line)
        for instruction, steps in spec.replanning_examples:
            lines.append(f"Human: {instruction}")
            lines.append(_steps_line(steps))
    lines.append(f"Human: {spec.query_instruction}")
    parts = []
    for i, (skill, result) in enumerate(spec.history, start=1):
        text = f"{i}. {render_skill(skill, profile)}"
        if spec.include_feedback and not result.success:
            text += f" {result.feedback.rendered}"
        parts.append(text)
    parts.append(f"{len(spec.history) + 1}.")
    lines.append("Robot: " + ", ".join(parts))
    return "\n".join(lines)


def ensure_prompt_budget(prompt: str, session: ScorerSession, max_context: int, headroom: int = DECODE_HEADROOM) -> None:
    overflow = len(session.tokenize(prompt)) - (max_context - headroom)
    if overflow > 0:
        raise PromptTooLong(overflow)


# --- skill trie ----------------------------------------------------------------


class _TrieNode:
    __slots__ = ("children", "skill")

    def __init__(self):
        self.children: dict[int, _TrieNode] = {}
        self.skill: Skill | None = None


def tokens_in_context(session: ScorerSession, context: str, text: str) -> list[int]:
    """Tokens of ``text`` as it tokenizes after ``context``. Falls back to a
    standalone tokenization if the tokenizer merges across the boundary."""
    pre = session.tokenize(context).ids
    full = session.tokenize(context + text).ids
    if full[: len(pre)] == tuple(pre):
        return list(full[len(pre):])
    return list(session.tokenize(text).ids)


class SkillTrie:
    """Token-id trie over the skill surfaces of a SkillSet.

    Entries are the surfaces as they appear in a prompt continuation: a
    leading space, then the surface, terminated by the step separator comma
    ("." for the terminal skill) so no entry is a token-prefix of another.
    """

    def __init__(self, root: _TrieNode, depth: int, context_tail: str):
        self.root = root
        self.depth = depth
        self.context_tail = context_tail

    @classmethod
    def build(cls, skillset: SkillSet, session: ScorerSession, context_tail: str = "1.") -> "SkillTrie":
        root = _TrieNode()
        depth = 0
        for skill in skillset:
            surface = render_skill(skill, skillset.profile)
            entry = " " + surface + ("." if skill.is_terminal else ",")
            ids = tokens_in_context(session, context_tail, entry)
            depth = max(depth, len(ids))
            node = root
            for tok in ids:
                if node.skill is not None:
                    raise ValueError(f"surface {surface!r} extends a completed entry")
                node = node.children.setdefault(tok, _TrieNode())
            if node.skill is not None or node.children:
                raise ValueError(f"surface {surface!r} is not prefix-free in the skill set")
            node.skill = skill
        return cls(root, depth, context_tail)


# --- decoding -------------------------------------------------------------------


def score_skill(
    prompt: str,
    skill: Skill,
    session: ScorerSession,
    profile: EnvironmentProfile,
    stats: CallStats | None = None,
) -> float:
    """Sum of token log-probabilities of the skill surface in prompt context."""
    surface = " " + render_skill(skill, profile)
    prompt_ids = list(session.tokenize(prompt).ids)
    full_ids = list(session.tokenize(prompt + surface).ids)
    shared = 0
    for a, b in zip(prompt_ids, full_ids):
        if a != b:
            break
        shared += 1
    context = full_ids[:shared]
    total = 0.0
    for tok in full_ids[shared:]:
        logprobs = session.next_token_logprobs(context, allowed={tok})
        if stats is not None:
            stats.n_logprob_calls += 1
            stats.n_tokens_scored += len(logprobs)
        total += logprobs[tok]
        context.append(tok)
    if stats is not None:
        stats.n_skill_scorings += 1
    return total


def next_skill_full(
    prompt: str,
    skillset: SkillSet,
    session: ScorerSession,
    stats: CallStats | None = None,
) -> tuple[Skill, float]:
    """Argmax of score_skill over every skill; ties keep skill-set order."""
    best_skill: Skill | None = None
    best_score = float("-inf")
    for skill in skillset:
        score = score_skill(prompt, skill, session, skillset.profile, stats)
        if score > best_score:
            best_skill, best_score = skill, score
    return best_skill, best_score


def next_skill_greedy(
    prompt: str,
    trie: SkillTrie,
    session: ScorerSession,
    stats: CallStats | None = None,
) -> tuple[Skill, float]:
    """Walk the trie taking the argmax among child tokens at each node
    (ties to the lowest token id); returns the leaf skill and the summed
    log-probability of the chosen path."""
    context = list(session.tokenize(prompt).ids)
    node = trie.root
    total = 0.0
    while node.skill is None:
        logprobs = session.next_token_logprobs(context, allowed=set(node.children))
        if stats is not None:
            stats.n_logprob_calls += 1
            stats.n_tokens_scored += len(logprobs)
        best = min(logprobs, key=lambda tok: (-logprobs[tok], tok))
        total += logprobs[best]
        context.append(best)
        node = node.children[best]
    return node.skill, total


# --- episodes --------------------------------------------------------------------


@dataclass
class PlannerConfig:
    mode: str = "greedy"  # greedy | full | generative
    max_steps: int = DEFAULT_MAX_STEPS
    replanning: bool = False
    examples: Sequence[tuple[str, Sequence[str]]] = ()
    replanning_examples: Sequence[tuple[str, Sequence[str]]] | None = None
    instruction_index: int = 0
    generate_max_tokens: int = 768
    trace: Callable[[dict], None] | None = None


@dataclass
class EpisodeRecord:
    task_id: str
    chosen_skills: list[Skill]
    step_results: list[StepResult]
    goal_report: GoalReport
    call_stats: CallStats
    termination: str  # done_token | max_steps | parse_failure
    unparsed_steps: list[str] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.chosen_skills)


def _prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


def plan_episode(
    task,
    world: WorldState,
    skillset: SkillSet,
    session: ScorerSession,
    config: PlannerConfig,
) -> EpisodeRecord:
    """Autoregressive plan-execute loop: build prompt, pick the next skill,
    execute it, then fold the result back into the prompt history. Stops on
    the terminal skill or at max_steps; feedback text enters the prompt only
    when replanning is enabled."""
    if config.mode == "generative":
        return generative_plan(task, world, skillset, session, config)
    if config.mode not in ("greedy", "full"):
        raise ValueError(f"unknown decode mode {config.mode!r}")
    profile = skillset.profile
    instruction = task.instructions[config.instruction_index]
    max_context = session.info().get("max_context", 1 << 30)
    trie = SkillTrie.build(skillset, session) if config.mode == "greedy" else None
    stats = CallStats()
    history: list[tuple[Skill, StepResult]] = []
    chosen: list[Skill] = []
    results: list[StepResult] = []
    termination = "max_steps"
    for _ in range(config.max_steps):
        spec = PromptSpec(
            query_instruction=instruction,
            examples=config.examples,
            replanning_examples=config.replanning_examples if config.replanning else None,
            history=history,
            include_feedback=config.replanning,
        )
        prompt = build_prompt(spec, profile)
        ensure_prompt_budget(prompt, session, max_context)
        if config.mode == "greedy":
            skill, logprob = next_skill_greedy(prompt, trie, session, stats)
        else:
            skill, logprob = next_skill_full(prompt, skillset, session, stats)
        result = apply_skill(world, skill)
        history.append((skill, result))
        chosen.append(skill)
        results.append(result)
        if config.trace is not None:
            config.trace(
                {
                    "step": len(chosen),
                    "prompt_hash": _prompt_hash(prompt),
                    "skill": render_skill(skill, profile),
                    "logprob": logprob,
                    "success": result.success,
                    "feedback": result.feedback.rendered if result.feedback else None,
                    "state_hash": state_hash(world),
                }
            )
        if skill.is_terminal:
            termination = "done_token"
            break
    return EpisodeRecord(
        task_id=task.task_id,
        chosen_skills=chosen,
        step_results=results,
        goal_report=evaluate_goal(world, task.goal),
        call_stats=stats,
        termination=termination,
    )


_GEN_STEP_SPLIT = re.compile(r"\d+\.\s*")


def build_generative_prompt(
    instruction: str,
    examples: Sequence[tuple[str, Sequence[str]]],
    skillset: SkillSet,
    profile: EnvironmentProfile,
) -> str:
    lines = [GENERATIVE_PREAMBLE]
    if examples:
        lines.append("Examples of human instructions and possible your (robot) answers:")
        for ex_instruction, steps in examples:
            lines.append(f"Human: {ex_instruction}")
            lines.append(_steps_line(steps))
    lines.append("Now please answer the sequence of actions for the input instruction.")
    lines.append("You should use one of actions of this list: " + ", ".join(skillset.surfaces()))
    lines.append("List the actions with comma separator.")
    lines.append(f"Input user instruction: {instruction}")
    return "\n".join(lines) + "\n"


def generative_plan(
    task,
    world: WorldState,
    skillset: SkillSet,
    session: ScorerSession,
    config: PlannerConfig,
) -> EpisodeRecord:
    """Single-shot generation against the admissible-skill prompt, executed
    open-loop. Steps that do not parse to a known skill are skipped and
    recorded rather than executed."""
    profile = skillset.profile
    instruction = task.instructions[config.instruction_index]
    prompt = build_generative_prompt(instruction, config.examples, skillset, profile)
    stats = CallStats()
    reply = session.generate(prompt, max_tokens=config.generate_max_tokens, stop=("\nHuman:", "\nInput"))
    stats.n_generate_calls += 1
    valid_surfaces = set(skillset.surface_index)
    skills: list[Skill] = []
    unparsed: list[str] = []
    for chunk in _GEN_STEP_SPLIT.split(reply):
        step = chunk.strip().strip(",.").strip()
        if not step:
            continue
        try:
            skill = parse_skill(step, profile)
        except NoSuchSkill:
            unparsed.append(step)
            continue
        if render_skill(skill, profile) not in valid_surfaces:
            unparsed.append(step)
            continue
        skills.append(skill)
        if skill.is_terminal:
            break
    chosen: list[Skill] = []
    results: list[StepResult] = []
    termination = "parse_failure"
    if skills:
        termination = "max_steps"
        for skill in skills[: config.max_steps]:
            result = apply_skill(world, skill)
            chosen.append(skill)
            results.append(result)
            if config.trace is not None:
                config.trace(
                    {
                        "step": len(chosen),
                        "prompt_hash": _prompt_hash(prompt),
                        "skill": render_skill(skill, profile),
                        "logprob": None,
                        "success": result.success,
                        "feedback": result.feedback.rendered if result.feedback else None,
                        "state_hash": state_hash(world),
                    }
                )
            if skill.is_terminal:
                termination = "done_token"
                break
    return EpisodeRecord(
        task_id=task.task_id,
        chosen_skills=chosen,
        step_results=results,
        goal_report=evaluate_goal(world, task.goal),
        call_stats=stats,
        termination=termination,
        unparsed_steps=unparsed,
    )
