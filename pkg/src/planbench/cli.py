"""Command-line front end: run benchmarks, lint datasets, export fine-tune
data, and print enumerated skill sets.

Exit codes: 0 completed, 1 configuration error, 2 dataset error, 3 every
episode failed on infrastructure.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import threading

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import data_path
from .bench import (
    DatasetError,
    ExportError,
    RunSettings,
    emit_report,
    load_dataset,
    run_benchmark,
    write_finetune,
)
from .examples import load_pool
from .scorer import MockScorer, MockScript, ScorerUnavailable, remote_scorer
from .skills import AllowListError, get_profile, enumerate_skills

SCORER_URL_ENV = "LOTA_SCORER_URL"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATASET = 2
EXIT_ALL_INFRA = 3


class ConfigError(ValueError):
    pass


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=False, help="dataset JSON file")
    p.add_argument("--profile", choices=["alfred", "wah"], help="restrict to one profile's tasks")
    p.add_argument("--mode", choices=["greedy", "full", "generative"], default="greedy")
    p.add_argument("--scorer", default=None, help="mock:<script.json>, mock:uniform, or remote:<url>")
    p.add_argument("--strategy", choices=["none", "random", "task_specific", "semantic"], default="none")
    p.add_argument("--n-examples", type=int, default=1, help="per task type for random, total otherwise")
    p.add_argument("--pool", default=None, help="example pool JSON (defaults to the bundled pools)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replanning", action="store_true")
    p.add_argument("--max-steps", type=int, default=30)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--sample-fraction", type=float, default=None)
    p.add_argument("--instruction-index", type=int, default=0)
    p.add_argument("--allow-list", default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--formats", default="json,csv,markdown")
    p.add_argument("--trace", action="store_true", help="write per-episode JSONL traces")
    p.add_argument("--config", default=None, help="TOML config; flags win over file values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planbench")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a benchmark")
    _add_run_flags(run_p)

    lint_p = sub.add_parser("lint", help="validate a dataset file")
    lint_p.add_argument("--dataset", required=True)

    export_p = sub.add_parser("export-finetune", help="export instruction-tuning records")
    export_p.add_argument("--dataset", required=True)
    export_p.add_argument("--out", required=True)

    skills_p = sub.add_parser("skills", help="print the enumerated skill set for a scene")
    skills_p.add_argument("--profile", choices=["alfred", "wah"], required=True)
    skills_p.add_argument("--dataset", required=True)
    skills_p.add_argument("--task-id", required=True)
    skills_p.add_argument("--allow-list", default=None)
    return parser


def _apply_config_file(args: argparse.Namespace, parser_defaults: dict) -> None:
    """TOML keys mirror flags one-to-one (dashes or underscores); explicit
    flags win over file values."""
    if not args.config:
        return
    with open(args.config, "rb") as fh:
        data = tomllib.load(fh)
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, attr) == parser_defaults.get(attr):
            setattr(args, attr, value)


def _build_session(descriptor: str | None):
    if descriptor is None:
        descriptor = os.environ.get(SCORER_URL_ENV)
        if descriptor and "://" in descriptor:
            descriptor = f"remote:{descriptor}"
    if not descriptor:
        raise ConfigError("no scorer configured; pass --scorer or set " + SCORER_URL_ENV)
    if descriptor.startswith("mock:"):
        spec = descriptor[len("mock:"):]
        if spec == "uniform":
            return MockScorer()
        if spec == "golden":
            spec = data_path("golden_script.json")
        with open(spec, encoding="utf-8") as fh:
            return MockScorer(MockScript.from_json(json.load(fh)))
    if descriptor.startswith("remote:"):
        return remote_scorer(descriptor[len("remote:"):])
    raise ConfigError(f"unrecognized scorer descriptor {descriptor!r}")


def _load_replanning_examples() -> list[tuple[str, list[str]]]:
    with open(data_path("replanning_examples.json"), encoding="utf-8") as fh:
        data = json.load(fh)
    return [(entry["instruction"], entry["steps"]) for entry in data]


def _default_pool_path(tasks) -> str | None:
    profiles = {t.profile_name for t in tasks}
    if profiles == {"alfred"}:
        return data_path("pool_alfred.json")
    if profiles == {"wah"}:
        return data_path("pool_wah.json")
    return None  # mixed dataset: selection needs an explicit --pool


def cmd_run(args: argparse.Namespace) -> int:
    tasks = load_dataset(args.dataset)
    if args.profile:
        tasks = [t for t in tasks if t.profile_name == args.profile]
    if args.sample_fraction is not None:
        if not (0.0 < args.sample_fraction <= 1.0):
            raise ConfigError("--sample-fraction must be in (0, 1]")
        keep = max(1, round(args.sample_fraction * len(tasks)))
        picked = set(random.Random(args.seed).sample(range(len(tasks)), keep))
        tasks = [t for i, t in enumerate(tasks) if i in picked]
    if not tasks:
        raise ConfigError("no tasks selected")

    session = _build_session(args.scorer)
    if args.mode == "generative" and not getattr(session, "supports_generate", True):
        raise ConfigError("generative mode requires a generate-capable scorer")

    pool = None
    if args.strategy != "none":
        pool_path = args.pool or _default_pool_path(tasks)
        if pool_path is None:
            raise ConfigError("mixed-profile dataset needs an explicit --pool for example selection")
        pool = load_pool(pool_path)

    replanning_examples = _load_replanning_examples() if args.replanning else None

    settings = RunSettings(
        mode=args.mode,
        strategy=args.strategy,
        n_examples=args.n_examples,
        seed=args.seed,
        replanning=args.replanning,
        max_steps=args.max_steps,
        instruction_index=args.instruction_index,
        allow_list=args.allow_list,
    )

    trace_factory = None
    if args.trace:
        os.makedirs(args.out, exist_ok=True)
        lock = threading.Lock()

        def trace_factory(task):
            path = os.path.join(args.out, f"trace_{task.task_id}.jsonl")
            open(path, "w", encoding="utf-8").close()  # fresh file per run

            def write(event: dict) -> None:
                line = json.dumps({"task_id": task.task_id, **event}, sort_keys=True)
                with lock, open(path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")

            return write

    extra = {"dataset": os.path.basename(args.dataset), "profile": args.profile,
             "scorer": args.scorer or "env", "sample_fraction": args.sample_fraction,
             "parallelism_independent": True}
    report = run_benchmark(
        tasks,
        session,
        settings,
        pool=pool,
        replanning_examples=replanning_examples,
        parallelism=args.parallelism,
        fingerprint_extra=extra,
        trace_factory=trace_factory,
    )
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    written = emit_report(report, args.out, formats)
    print(
        f"evaluated {len(report.per_episode)} episodes "
        f"(task success {report.task_success_rate:.4f}, "
        f"subgoal {report.avg_subgoal_success_rate:.4f}, "
        f"infra failures {report.infra_failures})"
    )
    for path in written:
        print("wrote", path)
    if report.infra_failures and not report.per_episode:
        return EXIT_ALL_INFRA
    return EXIT_OK


def cmd_lint(args: argparse.Namespace) -> int:
    tasks = load_dataset(args.dataset)
    print(f"{args.dataset}: {len(tasks)} tasks ok")
    return EXIT_OK


def cmd_export_finetune(args: argparse.Namespace) -> int:
    tasks = load_dataset(args.dataset)
    count = write_finetune(tasks, args.out)
    print(f"wrote {count} records to {args.out}")
    return EXIT_OK


def cmd_skills(args: argparse.Namespace) -> int:
    tasks = load_dataset(args.dataset)
    matches = [t for t in tasks if t.task_id == args.task_id]
    if not matches:
        raise ConfigError(f"no task {args.task_id!r} in {args.dataset}")
    task = matches[0]
    profile = get_profile(args.profile)
    skillset = enumerate_skills(profile, task.scene, args.allow_list)
    for surface in skillset.surfaces():
        print(surface)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            defaults = vars(build_parser().parse_args(["run"]))
            _apply_config_file(args, defaults)
            return cmd_run(args)
        if args.command == "lint":
            return cmd_lint(args)
        if args.command == "export-finetune":
            return cmd_export_finetune(args)
        if args.command == "skills":
            return cmd_skills(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, AllowListError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, ExportError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except ScorerUnavailable as exc:
        print(f"scorer unavailable: {exc}", file=sys.stderr)
        return EXIT_ALL_INFRA


if __name__ == "__main__":
    sys.exit(main())
