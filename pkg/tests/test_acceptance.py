"""Acceptance suite: one test per contract, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Oracles here are written independently of the code paths they check:
scoring is re-derived by raw per-token replay, argmaxes by exhaustive
enumeration, and uniform decoding by a pure trie walk on token ids.
"""

import json
import math
import random
import time

import pytest

from planbench import data_path
from planbench.bench import (
    RunSettings,
    compute_metrics,
    export_finetune,
    load_dataset,
    report_to_json,
    run_benchmark,
    run_episode,
)
from planbench.examples import Example, ExamplePool, select_random, select_semantic, select_task_specific
from planbench.goals import GoalReport, evaluate_goal
from planbench.planner import (
    EpisodeRecord,
    PromptSpec,
    SkillTrie,
    build_prompt,
    next_skill_full,
    next_skill_greedy,
    score_skill,
)
from planbench.scorer import CallStats, MockScorer, MockScript, ScriptEntry, simple_tokenize
from planbench.skills import PROFILES, WAH_PROFILE, Skill, SkillSet, enumerate_skills, parse_skill, render_skill
from planbench.worldsim import StepResult, apply_skill, generic_failed, load_scene


def announce(name):
    print(f"\nACCEPTANCE {name}: PASS")


# --- synthetic skill inventory for the decode criteria ---------------------------


def big_wah_scene():
    """Scene whose enumeration exceeds 214 skills with ~6-token surfaces."""
    firsts = ["alpha", "bravo", "candy", "delta", "early", "fancy", "grand", "happy", "irons", "jolly"]
    objects = [
        {"id": f"obj_{w}", "class": f"{w} bottle", "properties": ["pickupable"], "zone": "kitchen"}
        for w in firsts
    ]
    objects += [
        {"id": f"rack_{i}", "class": f"rack{chr(97 + i)}", "properties": ["receptacle"], "zone": "kitchen"}
        for i in range(13)
    ]
    objects += [
        {"id": f"bin_{i}", "class": f"bin{chr(97 + i)}", "properties": ["container", "openable"], "zone": "kitchen"}
        for i in range(4)
    ]
    objects += [
        {"id": f"lamp_{i}", "class": f"lamp{chr(97 + i)}", "properties": ["toggleable"], "zone": "kitchen"}
        for i in range(2)
    ]
    return {"zones": ["kitchen"], "objects": objects, "agent": {"zone": "kitchen", "capacity": 2}}


def sliced_skillset(size, master=None):
    master = master or enumerate_skills(WAH_PROFILE, big_wah_scene())
    non_terminal = [s for s in master if not s.is_terminal]
    assert len(non_terminal) >= size - 1
    return SkillSet(WAH_PROFILE, non_terminal[: size - 1] + [Skill("done")])


def corpus_for(skillset):
    return [" " + surface + "," for surface in skillset.surfaces()]


def replay_score(prompt, skill, session, profile):
    """Independent per-token replay of the summed-logprob definition."""
    surface = " " + render_skill(skill, profile)
    prompt_ids = list(session.tokenize(prompt).ids)
    full_ids = list(session.tokenize(prompt + surface).ids)
    shared = 0
    while shared < len(prompt_ids) and prompt_ids[shared] == full_ids[shared]:
        shared += 1
    total = 0.0
    for i in range(shared, len(full_ids)):
        total += session.next_token_logprobs(full_ids[:i], allowed={full_ids[i]})[full_ids[i]]
    return total


def random_history(rng, skillset, length):
    history = []
    for _ in range(length):
        skill = rng.choice([s for s in skillset.skills if not s.is_terminal])
        if rng.random() < 0.3:
            history.append((skill, StepResult(False, skill, generic_failed(skill.action))))
        else:
            history.append((skill, StepResult(True, skill)))
    return history


def test_summed_logprob_scoring_oracle_1000_pairs():
    """score_skill equals an independent per-token replay sum within 1e-9 for
    1,000 randomized (prompt, skill) pairs over a 50-skill vocabulary."""
    rng = random.Random(20240501)
    skillset = sliced_skillset(50)
    surfaces = skillset.surfaces()
    instructions = [f"Scripted task number {i}." for i in range(8)]
    plans = {
        instr: ScriptEntry(tuple(rng.sample(surfaces[:-1], 3) + ["done"]))
        for i, instr in enumerate(instructions[:5])
    }
    session = MockScorer(
        MockScript(plans=plans), extra_corpus=corpus_for(skillset) + instructions
    )
    start = time.monotonic()
    checked = 0
    for _ in range(1000):
        query = rng.choice(instructions)  # scripted and unscripted queries mix
        spec = PromptSpec(
            query_instruction=query,
            examples=[(f"example {j}", rng.sample(surfaces[:-1], 2) + ["done"]) for j in range(rng.randint(0, 2))],
            history=random_history(rng, skillset, rng.randint(0, 3)),
            include_feedback=rng.random() < 0.5,
        )
        prompt = build_prompt(spec, WAH_PROFILE)
        skill = rng.choice(skillset.skills)
        impl = score_skill(prompt, skill, session, WAH_PROFILE)
        oracle = replay_score(prompt, skill, session, WAH_PROFILE)
        assert abs(impl - oracle) <= 1e-9, (query, render_skill(skill, WAH_PROFILE), impl, oracle)
        checked += 1
    elapsed = time.monotonic() - start
    assert checked == 1000
    assert elapsed < 10.0, f"scoring oracle took {elapsed:.2f}s"
    announce(f"skill-scoring-oracle (1000 pairs, {elapsed:.2f}s)")


def test_argmax_selection_oracle_200_trials():
    """next_skill_full equals exhaustive brute-force argmax on skill sets of
    size up to 200; 200 random trials, exact match required."""
    rng = random.Random(77)
    master = enumerate_skills(WAH_PROFILE, big_wah_scene())
    non_terminal = [s for s in master if not s.is_terminal]
    all_surfaces = [render_skill(s, WAH_PROFILE) for s in master]
    instructions = [f"Trial instruction {i}." for i in range(40)]
    plans = {}
    for i, instr in enumerate(instructions):
        if i % 2 == 0:
            plans[instr] = ScriptEntry((rng.choice(all_surfaces[:-1]), "done"))
    session = MockScorer(
        MockScript(plans=plans),
        extra_corpus=[" " + s + "," for s in all_surfaces] + instructions,
    )
    for trial in range(200):
        size = rng.randint(2, 200)
        skillset = SkillSet(WAH_PROFILE, rng.sample(non_terminal, size - 1) + [Skill("done")])
        prompt = build_prompt(PromptSpec(query_instruction=rng.choice(instructions)), WAH_PROFILE)
        impl, _ = next_skill_full(prompt, skillset, session)
        best_skill, best_score = None, -math.inf
        for candidate in skillset:
            score = replay_score(prompt, candidate, session, WAH_PROFILE)
            if score > best_score:
                best_skill, best_score = candidate, score
        assert impl == best_skill, (trial, render_skill(impl, WAH_PROFILE), render_skill(best_skill, WAH_PROFILE))
    announce("argmax-selection-oracle (200 trials, exact)")


def test_greedy_full_agreement_under_dominance():
    """With peak 0.9 and per-token competitor share far below 0.45, greedy
    constrained decoding and full scoring choose the same skill in 200
    scripted trials."""
    rng = random.Random(4096)
    master = enumerate_skills(WAH_PROFILE, big_wah_scene())
    non_terminal = [s for s in master if not s.is_terminal]
    agreements = 0
    for trial in range(200):
        subset = rng.sample(non_terminal, rng.randint(3, 20))
        skillset = SkillSet(WAH_PROFILE, subset + [Skill("done")])
        target = rng.choice(subset)
        instr = f"Dominance trial {trial}."
        script = MockScript(plans={instr: ScriptEntry((render_skill(target, WAH_PROFILE), "done"))})
        session = MockScorer(script, extra_corpus=corpus_for(skillset))
        vocab = session.info()["vocab_size"]
        assert (1 - 0.9) / (vocab - 1) < 0.45
        prompt = build_prompt(PromptSpec(query_instruction=instr), WAH_PROFILE)
        trie = SkillTrie.build(skillset, session)
        greedy, _ = next_skill_greedy(prompt, trie, session)
        full, _ = next_skill_full(prompt, skillset, session)
        assert greedy == full == target
        agreements += 1
    assert agreements == 200
    announce("greedy-full-agreement (200/200 under dominance)")


class GardenPathSession(MockScorer):
    """Adversarial distribution for the documented greedy/full divergence.

    The root token of "put alpha bottle on racka" carries the single highest
    first-token probability (0.5), but its continuation is nearly impossible,
    so the skill's total probability is tiny. Greedy commits to the garden
    path at the root; full scoring correctly prefers "grab alpha bottle".
    Mirrors the expected behavioral gap between the two implementations of
    the skill-selection rule.
    """

    FIRST = {" put": 0.5, " grab": 0.4}
    AFTER_PUT = 1e-6

    def next_token_logprobs(self, prompt_ids, allowed=None):
        text = self.detokenize(prompt_ids)
        keys = list(allowed) if allowed is not None else list(range(self.info()["vocab_size"]))
        out = {}
        for tok in keys:
            piece = self._id_to_piece.get(tok, "")
            if text.endswith("."):  # start of a new step
                out[tok] = math.log(self.FIRST.get(piece, 0.1 / len(keys)))
            elif " put" in text[-40:]:
                out[tok] = math.log(self.AFTER_PUT)
            else:
                out[tok] = math.log(0.9)
        return out


def test_documented_greedy_full_divergence():
    scene = {
        "zones": ["kitchen"],
        "objects": [
            {"id": "o1", "class": "alpha bottle", "properties": ["pickupable"], "zone": "kitchen"},
            {"id": "r1", "class": "racka", "properties": ["receptacle"], "zone": "kitchen"},
        ],
        "agent": {"zone": "kitchen", "capacity": 2},
    }
    skillset = enumerate_skills(WAH_PROFILE, scene)
    session = GardenPathSession(extra_corpus=corpus_for(skillset))
    prompt = "Human: Divergence demo.\nRobot: 1."
    trie = SkillTrie.build(skillset, session)
    greedy, _ = next_skill_greedy(prompt, trie, session)
    full, _ = next_skill_full(prompt, skillset, session)
    assert greedy != full
    assert render_skill(greedy, WAH_PROFILE).startswith("put ")
    assert render_skill(full, WAH_PROFILE) == "grab alpha bottle"
    announce("greedy-full-divergence (documented adversarial case)")


def test_call_count_speedup_mechanism():
    """On a 214-skill set with ~6-token mean surfaces, greedy issues at most
    12 logprob calls per step while full scoring runs >= 214 skill scorings;
    measured call ratio >= 15x."""
    start = time.monotonic()
    skillset = sliced_skillset(214)
    assert len(skillset) == 214
    lengths = [
        len(simple_tokenize(" " + render_skill(s, WAH_PROFILE) + ("." if s.is_terminal else ",")))
        for s in skillset
    ]
    mean_len = sum(lengths) / len(lengths)
    assert 5.0 <= mean_len <= 7.0, mean_len
    instr = "Speedup measurement task."
    target = render_skill(skillset.skills[0], WAH_PROFILE)
    session = MockScorer(
        MockScript(plans={instr: ScriptEntry((target, "done"))}),
        extra_corpus=corpus_for(skillset),
    )
    prompt = build_prompt(PromptSpec(query_instruction=instr), WAH_PROFILE)
    trie = SkillTrie.build(skillset, session)

    greedy_stats = CallStats()
    greedy_skill, _ = next_skill_greedy(prompt, trie, session, greedy_stats)
    full_stats = CallStats()
    full_skill, _ = next_skill_full(prompt, skillset, session, full_stats)

    assert greedy_skill == full_skill
    assert greedy_stats.n_logprob_calls <= 12
    assert full_stats.n_skill_scorings >= 214
    ratio = full_stats.n_logprob_calls / greedy_stats.n_logprob_calls
    assert ratio >= 15.0, ratio
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    announce(
        f"call-count-speedup (greedy {greedy_stats.n_logprob_calls} calls/step, "
        f"full {full_stats.n_logprob_calls} calls, ratio {ratio:.1f}x, {elapsed:.2f}s)"
    )


# --- end-to-end benchmark criteria ---------------------------------------------------


def canonical(report):
    return json.dumps(report_to_json(report), sort_keys=True)


def uniform_replay_oracle(task, session):
    """Pure trie-walk replay of uniform decoding: at every node the lowest
    token id wins, independent of the prompt. Uses no logprob calls."""
    profile = PROFILES[task.profile_name]
    skillset = enumerate_skills(profile, task.scene)
    trie = SkillTrie.build(skillset, session)
    world = load_scene(task.scene)
    chosen = []
    for _ in range(30):
        node = trie.root
        while node.skill is None:
            node = node.children[min(node.children)]
        chosen.append(node.skill)
        apply_skill(world, node.skill)
        if node.skill.is_terminal:
            break
    return chosen, evaluate_goal(world, task.goal)


def test_golden_end_to_end_and_uniform_baseline(desk_tasks, golden_script):
    golden_1 = run_benchmark(desk_tasks, MockScorer(golden_script), RunSettings(mode="greedy"), parallelism=1)
    golden_8 = run_benchmark(desk_tasks, MockScorer(golden_script), RunSettings(mode="greedy"), parallelism=8)
    assert golden_1.task_success_rate == 1.0
    assert golden_1.avg_subgoal_success_rate == 1.0
    assert canonical(golden_1) == canonical(golden_8)

    uniform_1 = run_benchmark(desk_tasks, MockScorer(), RunSettings(mode="greedy"), parallelism=1)
    uniform_8 = run_benchmark(desk_tasks, MockScorer(), RunSettings(mode="greedy"), parallelism=8)
    assert canonical(uniform_1) == canonical(uniform_8)

    oracle_session = MockScorer()
    by_id = {r.task_id: r for r in uniform_1.per_episode}
    for task in desk_tasks:
        expected_skills, expected_goal = uniform_replay_oracle(task, oracle_session)
        record = by_id[task.task_id]
        assert record.chosen_skills == expected_skills, task.task_id
        assert record.goal_report == expected_goal, task.task_id
    announce(
        "golden-e2e (22/22 success, parallel 1==8 bit-identical; uniform baseline "
        f"replayed exactly, success rate {uniform_1.task_success_rate:.2f})"
    )


MUTATIONS = {
    "alfred_pick_01": "find a sink",
    "alfred_pick_02": "pick up the newspaper",
    "alfred_stack_01": "put down the spoon",
    "alfred_stack_02": "pick up the box",
    "alfred_clean_01": "turn on the faucet",
    "alfred_clean_02": "turn on the faucet",
    "alfred_heat_01": "turn on the microwave",
    "alfred_heat_02": "turn on the microwave",
    "alfred_cool_01": "close the fridge",
    "alfred_cool_02": "pick up the knife",
    "alfred_examine_01": "turn on the floor lamp",
    "alfred_examine_02": "pick up the pillow",
}


def run_surfaces(task, surfaces):
    profile = PROFILES[task.profile_name]
    world = load_scene(task.scene)
    for surface in surfaces:
        apply_skill(world, parse_skill(surface, profile))
    return evaluate_goal(world, task.goal)


def test_simulator_semantics_positive_and_negative(alfred_tasks):
    """12 golden scenarios reach their goals; 12 mutated plans (one critical
    step removed each) fail theirs — covering heated, cooled, cleaned, sliced
    with a held knife, and examine-in-light."""
    assert len(alfred_tasks) == 12
    positives = negatives = 0
    for task in alfred_tasks:
        report = run_surfaces(task, task.golden_plan)
        assert report.success, f"{task.task_id} golden plan must succeed"
        positives += 1
        drop = MUTATIONS[task.task_id]
        assert drop in task.golden_plan
        mutated = list(task.golden_plan)
        mutated.remove(drop)  # first occurrence only
        report = run_surfaces(task, mutated)
        assert not report.success, f"{task.task_id} mutated plan must fail"
        negatives += 1
    assert positives == negatives == 12
    announce("simulator-semantics (12 positive + 12 negative, all green)")


EXPECTED_FEEDBACK = "(this action failed: Apple is not visible because it is in Fridge)"


def test_replanning_contract():
    tasks = load_dataset(data_path("replan_dataset.json"))
    with open(data_path("replan_script.json"), encoding="utf-8") as fh:
        script = MockScript.from_json(json.load(fh))
    task = tasks[0]

    session = MockScorer(script)
    record = run_episode(task, session, RunSettings(mode="greedy", replanning=True))
    assert record.goal_report.success and record.termination == "done_token"
    failed_steps = [r for r in record.step_results if not r.success]
    assert len(failed_steps) == 1
    assert failed_steps[0].feedback.rendered == EXPECTED_FEEDBACK

    # the prompt slot for step 3 carries the message byte-for-byte
    profile = PROFILES[task.profile_name]
    history = list(zip(record.chosen_skills[:2], record.step_results[:2]))
    prompt = build_prompt(
        PromptSpec(query_instruction=task.instructions[0], history=history, include_feedback=True),
        profile,
    )
    assert prompt.endswith(f"2. pick up the apple {EXPECTED_FEEDBACK}, 3.")

    no_replan = run_episode(task, MockScorer(script), RunSettings(mode="greedy", replanning=False))
    assert not no_replan.goal_report.success
    announce("replanning-contract (exact feedback, recovery success, baseline failure)")


def test_selection_strategies_oracle():
    nouns = ["apple", "plate", "cushion", "kettle", "novel", "remote", "folder", "towel", "jar", "boot"]
    places = ["fridge", "table", "shelf", "sofa", "sink", "bin", "desk", "rack", "drawer", "stand"]
    types = ["Setup a dinner table", "Put groceries", "Prepare a meal", "Wash dishes", "Prepare snacks"]
    entries = []
    for i in range(200):
        noun, place = nouns[i % 10], places[(i // 10) % 10]
        entries.append(
            Example(f"please move the {noun} number {i} to the {place}", ("done",), types[i % 5])
        )
    pool = ExamplePool(tuple(entries))

    from planbench.scorer import bow_embed

    def cosine(a, b):
        return sum(x * y for x, y in zip(a, b))

    agreements = 0
    for qi in range(20):
        query = f"move the {nouns[qi % 10]} to the {places[qi % 10]}"
        qv = bow_embed([query])[0]
        vecs = bow_embed([e.instruction for e in pool.entries])
        order = sorted(range(200), key=lambda i: (-cosine(qv, vecs[i]), i))
        for n in (1, 5, 20):
            expected = [pool.entries[i] for i in order[:n]]
            assert select_semantic(pool, query, n, bow_embed) == expected
            agreements += 1
    assert agreements == 60

    target = pool.entries[137]
    assert select_semantic(pool, target.instruction, 1, bow_embed)[0] == target

    for seed in (0, 1, 99):
        first = select_random(pool, 2, seed)
        assert first == select_random(pool, 2, seed)
        counts = {}
        for e in first:
            counts[e.task_type] = counts.get(e.task_type, 0) + 1
        assert counts == {t: 2 for t in types}
        specific = select_task_specific(pool, "Wash dishes", 4, seed)
        assert specific == select_task_specific(pool, "Wash dishes", 4, seed)
        assert all(e.task_type == "Wash dishes" for e in specific)
    announce("selection-strategies (semantic == full-sort oracle 60/60; seeded strata exact)")


def test_metric_arithmetic_exact():
    def episode(task_id, satisfied, total):
        return EpisodeRecord(
            task_id=task_id,
            chosen_skills=[],
            step_results=[],
            goal_report=GoalReport(satisfied, total, satisfied == total,
                                   tuple([True] * satisfied + [False] * (total - satisfied))),
            call_stats=CallStats(),
            termination="done_token",
        )

    metrics = compute_metrics([episode("a", 2, 4)])
    assert metrics["avg_subgoal_success_rate"] == 0.5
    assert metrics["task_success_rate"] == 0.0
    metrics = compute_metrics([episode("a", 3, 3), episode("b", 1, 3)])
    assert metrics["task_success_rate"] == 0.5
    assert metrics["avg_subgoal_success_rate"] == (1.0 + 1 / 3) / 2
    metrics = compute_metrics([episode("a", 0, 0), episode("b", 0, 1)])
    assert metrics["task_success_rate"] == 0.5
    assert metrics["avg_subgoal_success_rate"] == 0.5
    announce("metric-arithmetic (exact rational values)")


def test_finetune_export_layout_and_roundtrip(desk_tasks):
    task = next(t for t in desk_tasks if t.task_id == "alfred_examine_02")
    record = export_finetune([task])[0]
    assert record == {
        "instruction": (
            "\nRobot: Hi there, I'm a robot operating in a home. "
            "\nRobot: You can ask me to do various tasks and I'll tell you the sequence of actions "
            "I would do to accomplish your task. "
            "\nHuman: Pick up a pillow and turn on a lamp.\nRobot:"
        ),
        "input": "",
        "output": "1. find a pillow, 2. pick up the pillow, 3. find a desk lamp, 4. turn on the desk lamp, 5. done.",
    }
    for task in desk_tasks:
        profile = PROFILES[task.profile_name]
        for rec in export_finetune([task]):
            steps = rec["output"].split(", ")
            parsed = [parse_skill(s, profile) for s in steps]
            assert tuple(render_skill(s, profile) for s in parsed) == task.golden_plan
    announce("finetune-export (byte-exact layout; every output round-trips)")
