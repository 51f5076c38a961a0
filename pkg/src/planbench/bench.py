"""Dataset loading with golden-plan lint, batch episode execution, metrics,
report emission, and fine-tune dataset export."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .examples import ExamplePool, select_random, select_semantic, select_task_specific
from .goals import GoalCondition, GoalSpecError
from .planner import EpisodeRecord, PlannerConfig, PromptTooLong, generative_plan, plan_episode
from .scorer import ScorerSession, ScorerUnavailable
from .skills import NoSuchSkill, get_profile, enumerate_skills, parse_skill
from .worldsim import SceneLoadError, apply_skill, load_scene
from .goals import evaluate_goal

# Exact field layout of the fine-tuning record prefix, including the leading
# newline and the space before each line break.
FINETUNE_PROMPT_PREFIX = (
    "\nRobot: Hi there, I'm a robot operating in a home. "
    "\nRobot: You can ask me to do various tasks and I'll tell you the sequence of actions "
    "I would do to accomplish your task. \n"
)


class DatasetError(ValueError):
    def __init__(self, task_id: str, field_name: str, message: str):
        self.task_id = task_id
        self.field_name = field_name
        super().__init__(f"task {task_id!r}, field {field_name!r}: {message}")


class MetricsError(ValueError):
    pass


class ExportError(ValueError):
    def __init__(self, task_id: str, message: str):
        self.task_id = task_id
        super().__init__(f"task {task_id!r}: {message}")


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    task_type: str
    profile_name: str
    instructions: tuple[str, ...]
    scene: dict
    goal: GoalCondition
    golden_plan: tuple[str, ...] | None = None


def load_dataset(path: str) -> list[TaskSpec]:
    """Load and validate a dataset file: schema, scene structure, goal
    predicates, and (when present) a golden-plan lint proving the plan
    satisfies its own goal."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise DatasetError("<file>", "<root>", "expected a JSON array of tasks")
    tasks = []
    seen_ids = set()
    for i, raw in enumerate(data):
        task_id = raw.get("task_id") or f"<index {i}>"
        if task_id in seen_ids:
            raise DatasetError(task_id, "task_id", "duplicate task id")
        seen_ids.add(task_id)
        for key in ("task_type", "profile", "instructions", "scene", "goal"):
            if key not in raw:
                raise DatasetError(task_id, key, "missing")
        try:
            profile = get_profile(raw["profile"])
        except KeyError as exc:
            raise DatasetError(task_id, "profile", str(exc)) from None
        if raw["task_type"] not in profile.task_types:
            raise DatasetError(task_id, "task_type", f"{raw['task_type']!r} not a {profile.name} task type")
        instructions = tuple(raw["instructions"])
        if not instructions or not all(isinstance(s, str) and s for s in instructions):
            raise DatasetError(task_id, "instructions", "expected a nonempty list of nonempty strings")
        try:
            load_scene(raw["scene"])
        except SceneLoadError as exc:
            raise DatasetError(task_id, "scene", str(exc)) from None
        try:
            goal = GoalCondition.from_json(raw["goal"])
        except GoalSpecError as exc:
            raise DatasetError(task_id, "goal", str(exc)) from None
        golden = tuple(raw["golden_plan"]) if raw.get("golden_plan") else None
        task = TaskSpec(
            task_id=task_id,
            task_type=raw["task_type"],
            profile_name=profile.name,
            instructions=instructions,
            scene=raw["scene"],
            goal=goal,
            golden_plan=golden,
        )
        if golden is not None:
            _lint_golden_plan(task)
        tasks.append(task)
    return tasks


def _lint_golden_plan(task: TaskSpec) -> None:
    profile = get_profile(task.profile_name)
    world = load_scene(task.scene)
    for surface in task.golden_plan:
        try:
            skill = parse_skill(surface, profile)
        except NoSuchSkill as exc:
            raise DatasetError(task.task_id, "golden_plan", str(exc)) from None
        result = apply_skill(world, skill)
        if not result.success:
            raise DatasetError(
                task.task_id,
                "golden_plan",
                f"step {surface!r} failed: {result.feedback.rendered}",
            )
    report = evaluate_goal(world, task.goal)
    if not report.success:
        raise DatasetError(
            task.task_id,
            "golden_plan",
            f"plan does not satisfy its goal ({report.satisfied}/{report.total} subgoals)",
        )


# --- batch execution ------------------------------------------------------------


@dataclass(frozen=True)
class RunSettings:
    mode: str = "greedy"
    strategy: str = "none"  # none | random | task_specific | semantic
    n_examples: int = 1  # per type for random; total for the other strategies
    seed: int = 0
    replanning: bool = False
    max_steps: int = 30
    instruction_index: int = 0
    allow_list: str | None = None


@dataclass
class InfraFailure:
    task_id: str
    reason: str


@dataclass
class BenchmarkReport:
    per_episode: list[EpisodeRecord]
    task_success_rate: float
    avg_subgoal_success_rate: float
    avg_steps: float
    config_fingerprint: str
    infra_failures: int
    infra_detail: list[InfraFailure] = field(default_factory=list)
    episode_types: dict[str, str] = field(default_factory=dict)


def episode_seed(global_seed: int, task_id: str) -> int:
    digest = hashlib.sha256(f"{global_seed}:{task_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def config_fingerprint(settings: RunSettings, extra: dict | None = None) -> str:
    payload = {
        "mode": settings.mode,
        "strategy": settings.strategy,
        "n_examples": settings.n_examples,
        "seed": settings.seed,
        "replanning": settings.replanning,
        "max_steps": settings.max_steps,
        "instruction_index": settings.instruction_index,
        "allow_list": settings.allow_list,
    }
    if extra:
        payload.update(extra)
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _select_examples(
    task: TaskSpec,
    settings: RunSettings,
    pool: ExamplePool | None,
    session: ScorerSession,
) -> list[tuple[str, Sequence[str]]]:
    if settings.strategy == "none" or pool is None:
        return []
    seed = episode_seed(settings.seed, task.task_id)
    if settings.strategy == "random":
        chosen = select_random(pool, settings.n_examples, seed)
    elif settings.strategy == "task_specific":
        chosen = select_task_specific(pool, task.task_type, settings.n_examples, seed)
    elif settings.strategy == "semantic":
        instruction = task.instructions[settings.instruction_index]
        chosen = select_semantic(pool, instruction, settings.n_examples, session)
        # most similar example sits closest to the query in the prompt
        chosen = list(reversed(chosen))
    else:
        raise ValueError(f"unknown selection strategy {settings.strategy!r}")
    return [e.as_prompt_pair() for e in chosen]


def run_episode(
    task: TaskSpec,
    session: ScorerSession,
    settings: RunSettings,
    pool: ExamplePool | None = None,
    replanning_examples=None,
    trace=None,
) -> EpisodeRecord:
    profile = get_profile(task.profile_name)
    world = load_scene(task.scene)
    skillset = enumerate_skills(profile, task.scene, settings.allow_list)
    config = PlannerConfig(
        mode=settings.mode,
        max_steps=settings.max_steps,
        replanning=settings.replanning,
        examples=_select_examples(task, settings, pool, session),
        replanning_examples=replanning_examples,
        # tasks with fewer paraphrases than the requested index use their last
        instruction_index=min(settings.instruction_index, len(task.instructions) - 1),
        trace=trace,
    )
    if settings.mode == "generative":
        return generative_plan(task, world, skillset, session, config)
    return plan_episode(task, world, skillset, session, config)


def run_benchmark(
    dataset: Sequence[TaskSpec],
    session: ScorerSession,
    settings: RunSettings,
    pool: ExamplePool | None = None,
    replanning_examples=None,
    parallelism: int = 1,
    fingerprint_extra: dict | None = None,
    trace_factory=None,
) -> BenchmarkReport:
    """Evaluate every task once. Per-episode seeds derive from the global seed
    and the task id, so parallelism never changes results; infra failures are
    recorded and excluded from the metric denominators."""
    episodes: list[EpisodeRecord] = []
    failures: list[InfraFailure] = []

    def one(task: TaskSpec):
        trace = trace_factory(task) if trace_factory else None
        try:
            return task, run_episode(task, session, settings, pool, replanning_examples, trace), None
        except (ScorerUnavailable, PromptTooLong) as exc:
            return task, None, InfraFailure(task.task_id, str(exc))

    if parallelism <= 1:
        outcomes = [one(task) for task in dataset]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool_exec:
            outcomes = list(pool_exec.map(one, dataset))

    types: dict[str, str] = {}
    for task, record, failure in outcomes:
        types[task.task_id] = task.task_type
        if failure is not None:
            failures.append(failure)
        else:
            episodes.append(record)
    episodes.sort(key=lambda r: r.task_id)
    failures.sort(key=lambda f: f.task_id)
    if episodes:
        metrics = compute_metrics(episodes)
    else:
        metrics = {"task_success_rate": 0.0, "avg_subgoal_success_rate": 0.0, "avg_steps": 0.0}
    return BenchmarkReport(
        per_episode=episodes,
        task_success_rate=metrics["task_success_rate"],
        avg_subgoal_success_rate=metrics["avg_subgoal_success_rate"],
        avg_steps=metrics["avg_steps"],
        config_fingerprint=config_fingerprint(settings, fingerprint_extra),
        infra_failures=len(failures),
        infra_detail=failures,
        episode_types=types,
    )


def compute_metrics(episodes: Sequence[EpisodeRecord]) -> dict:
    """Task success rate is the mean of goal successes; the subgoal rate
    averages satisfied/total per episode with 0/0 counting as success."""
    if not episodes:
        raise MetricsError("no evaluable episodes (all runs were infrastructure failures)")
    n = len(episodes)
    return {
        "task_success_rate": sum(1 for e in episodes if e.goal_report.success) / n,
        "avg_subgoal_success_rate": sum(e.goal_report.subgoal_rate for e in episodes) / n,
        "avg_steps": sum(e.steps for e in episodes) / n,
    }


# --- report emission ---------------------------------------------------------------


def report_to_json(report: BenchmarkReport) -> dict:
    return {
        "config_fingerprint": report.config_fingerprint,
        "task_success_rate": report.task_success_rate,
        "avg_subgoal_success_rate": report.avg_subgoal_success_rate,
        "avg_steps": report.avg_steps,
        "infra_failures": report.infra_failures,
        "infra_detail": [{"task_id": f.task_id, "reason": f.reason} for f in report.infra_detail],
        "episodes": [
            {
                "task_id": e.task_id,
                "task_type": report.episode_types.get(e.task_id, ""),
                "success": e.goal_report.success,
                "subgoal_rate": e.goal_report.subgoal_rate,
                "steps": e.steps,
                "termination": e.termination,
            }
            for e in report.per_episode
        ],
    }


def report_to_csv(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task_id", "task_type", "success", "subgoal_rate", "steps", "termination"])
    for e in report.per_episode:
        writer.writerow(
            [
                e.task_id,
                report.episode_types.get(e.task_id, ""),
                e.goal_report.success,
                f"{e.goal_report.subgoal_rate:.6g}",
                e.steps,
                e.termination,
            ]
        )
    return buf.getvalue()


def report_to_markdown(report: BenchmarkReport) -> str:
    lines = [
        "# Benchmark report",
        "",
        f"- config fingerprint: `{report.config_fingerprint}`",
        f"- task success rate: {report.task_success_rate:.4f}",
        f"- avg subgoal success rate: {report.avg_subgoal_success_rate:.4f}",
        f"- avg steps: {report.avg_steps:.2f}",
        f"- infra failures: {report.infra_failures}",
        "",
        "| Task type | Tasks | Successes | Avg subgoal rate |",
        "|---|---|---|---|",
    ]
    by_type: dict[str, list[EpisodeRecord]] = {}
    for e in report.per_episode:
        by_type.setdefault(report.episode_types.get(e.task_id, ""), []).append(e)
    for task_type in sorted(by_type):
        group = by_type[task_type]
        successes = sum(1 for e in group if e.goal_report.success)
        sub = sum(e.goal_report.subgoal_rate for e in group) / len(group)
        lines.append(f"| {task_type} | {len(group)} | {successes} | {sub:.4f} |")
    lines.append("")
    return "\n".join(lines)


def emit_report(report: BenchmarkReport, out_dir: str, formats: Sequence[str] = ("json",)) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for fmt in formats:
        path = os.path.join(out_dir, f"report.{'md' if fmt == 'markdown' else fmt}")
        if fmt == "json":
            payload = json.dumps(report_to_json(report), indent=2, sort_keys=True)
        elif fmt == "csv":
            payload = report_to_csv(report)
        elif fmt == "markdown":
            payload = report_to_markdown(report)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)
        written.append(path)
    return written


# --- fine-tune export -----------------------------------------------------------------


def export_finetune(dataset: Sequence[TaskSpec], prompt_prefix: str = FINETUNE_PROMPT_PREFIX) -> list[dict]:
    """Instruction-tuning records: one per (task, instruction) pair, each
    pairing the prompt-wrapped instruction with the numbered golden plan."""
    records = []
    for task in dataset:
        if not task.golden_plan:
            raise ExportError(task.task_id, "no golden plan to export")
        output = ", ".join(f"{i}. {s}" for i, s in enumerate(task.golden_plan, start=1)) + "."
        for instruction in task.instructions:
            records.append(
                {
                    "instruction": f"{prompt_prefix}Human: {instruction}\nRobot:",
                    "input": "",
                    "output": output,
                }
            )
    return records


def write_finetune(dataset: Sequence[TaskSpec], path: str, prompt_prefix: str = FINETUNE_PROMPT_PREFIX) -> int:
    records = export_finetune(dataset, prompt_prefix)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2, ensure_ascii=False)
    return len(records)
