import json
import math
import re

import pytest

from planbench import data_path
from planbench.bench import RunSettings, load_dataset, run_episode
from planbench.planner import (
    PROMPT_PREFIX_LINES,
    REPLAN_PREFIX_LINE,
    PlannerConfig,
    PromptSpec,
    PromptTooLong,
    SkillTrie,
    build_generative_prompt,
    build_prompt,
    ensure_prompt_budget,
    generative_plan,
    next_skill_full,
    next_skill_greedy,
    plan_episode,
    score_skill,
)
from planbench.scorer import CallStats, MockScorer, MockScript, ScriptEntry, simple_tokenize
from planbench.skills import ALFRED_PROFILE, Skill, SkillSet, enumerate_skills, render_skill
from planbench.worldsim import StepResult, generic_failed, load_scene

from conftest import small_alfred_scene


def ok(surface):
    from planbench.skills import parse_skill

    return parse_skill(surface, ALFRED_PROFILE), StepResult(True, parse_skill(surface, ALFRED_PROFILE))


def failed(surface, feedback=None):
    from planbench.skills import parse_skill

    skill = parse_skill(surface, ALFRED_PROFILE)
    return skill, StepResult(False, skill, feedback or generic_failed(skill.action))


def test_build_prompt_empty_history_exact():
    spec = PromptSpec(query_instruction="Put a spoon in the sink.")
    prompt = build_prompt(spec, ALFRED_PROFILE)
    assert prompt == (
        PROMPT_PREFIX_LINES[0]
        + "\n"
        + PROMPT_PREFIX_LINES[1]
        + "\nHuman: Put a spoon in the sink.\nRobot: 1."
    )
    assert prompt.endswith("Human: Put a spoon in the sink.\nRobot: 1.")


def test_build_prompt_examples_block():
    spec = PromptSpec(
        query_instruction="Fetch the apple.",
        examples=[("Put a spoon in the sink.", ["find a ladle", "pick up the ladle", "done"])],
    )
    prompt = build_prompt(spec, ALFRED_PROFILE)
    assert (
        "Human: Put a spoon in the sink.\n"
        "Robot: 1. find a ladle, 2. pick up the ladle, 3. done.\n"
        "Human: Fetch the apple.\nRobot: 1." in prompt
    )


def test_build_prompt_history_with_feedback_slot():
    history = [ok("find a dining table"), failed("put down the apple")]
    spec = PromptSpec(query_instruction="q", history=history, include_feedback=True)
    prompt = build_prompt(spec, ALFRED_PROFILE)
    assert prompt.endswith(
        "Robot: 1. find a dining table, "
        "2. put down the apple (this action failed: put down failed), 3."
    )


def test_build_prompt_feedback_suppressed_without_replanning():
    spec = PromptSpec(query_instruction="q", history=[failed("put down the apple")], include_feedback=False)
    prompt = build_prompt(spec, ALFRED_PROFILE)
    assert "this action failed" not in prompt
    assert prompt.endswith("Robot: 1. put down the apple, 2.")


def test_build_prompt_replanning_block_after_examples():
    spec = PromptSpec(
        query_instruction="q",
        examples=[("base", ["done"])],
        replanning_examples=[("replan", ["find an apple", "done"])],
    )
    prompt = build_prompt(spec, ALFRED_PROFILE)
    base_at = prompt.index("Human: base")
    prefix_at = prompt.index(REPLAN_PREFIX_LINE)
    replan_at = prompt.index("Human: replan")
    assert base_at < prefix_at < replan_at


def test_history_growth_step_slots():
    history = []
    for t in range(5):
        spec = PromptSpec(query_instruction="q", history=history)
        prompt = build_prompt(spec, ALFRED_PROFILE)
        robot_line = prompt.rsplit("Robot: ", 1)[1]
        assert len(re.findall(r"\d+\.", robot_line)) == t + 1
        history.append(ok("find an apple"))


def test_prompt_budget_overflow():
    session = MockScorer(max_context=32)
    prompt = "word " * 100
    with pytest.raises(PromptTooLong):
        ensure_prompt_budget(prompt, session, session.info()["max_context"])


def scene_and_skillset():
    scene = small_alfred_scene(
        [
            {"id": "apple_1", "class": "apple", "properties": ["pickupable"], "on": "counter_top_1"},
            {"id": "ladle_1", "class": "ladle", "properties": ["pickupable"], "on": "counter_top_1"},
        ]
    )
    return scene, enumerate_skills(ALFRED_PROFILE, scene)


def test_tokens_in_context_fallback_on_boundary_merge():
    from planbench.planner import tokens_in_context
    from planbench.scorer import TokenSequence

    class MergingTokenizer:
        def tokenize(self, text):
            table = {
                "1.": TokenSequence((1,), ("1.",)),
                "1. merged": TokenSequence((99, 5), ("1. m", "erged")),
                " merged": TokenSequence((7, 8), (" mer", "ged")),
            }
            return table[text]

    # the concatenation does not extend the context's tokens, so the trie
    # entry falls back to the standalone tokenization
    assert tokens_in_context(MergingTokenizer(), "1.", " merged") == [7, 8]


def test_trie_prefix_free_and_leaf_unique():
    _, skillset = scene_and_skillset()
    session = MockScorer()
    trie = SkillTrie.build(skillset, session)
    leaves = []

    def walk(node):
        if node.skill is not None:
            assert not node.children
            leaves.append(node.skill)
            return
        for child in node.children.values():
            walk(child)

    walk(trie.root)
    assert sorted(leaves, key=str) == sorted(skillset.skills, key=str)


def make_scripted(instruction, plan, extra=()):
    script = MockScript(plans={instruction: ScriptEntry(tuple(plan))})
    return MockScorer(script, extra_corpus=extra)


def test_greedy_follows_script():
    scene, skillset = scene_and_skillset()
    session = make_scripted("Fetch the apple.", ["find an apple", "pick up the apple", "done"])
    trie = SkillTrie.build(skillset, session)
    prompt = build_prompt(PromptSpec(query_instruction="Fetch the apple."), ALFRED_PROFILE)
    skill, logprob = next_skill_greedy(prompt, trie, session)
    assert render_skill(skill, ALFRED_PROFILE) == "find an apple"
    assert logprob < 0


def test_greedy_singleton_forced_path():
    skillset = SkillSet(ALFRED_PROFILE, [Skill("done")])
    session = MockScorer()
    trie = SkillTrie.build(skillset, session)
    stats = CallStats()
    skill, _ = next_skill_greedy("Robot: 1.", trie, session, stats)
    assert skill.is_terminal
    assert stats.n_logprob_calls <= trie.depth


def test_score_skill_closed_form_peak():
    # 3-token surface "find an apple" scripted with peak 0.9 scores 3*log(0.9)
    session = make_scripted("Fetch the apple.", ["find an apple", "done"])
    prompt = build_prompt(PromptSpec(query_instruction="Fetch the apple."), ALFRED_PROFILE)
    score = score_skill(prompt, Skill("find", "apple"), session, ALFRED_PROFILE)
    assert math.isclose(score, 3 * math.log(0.9), abs_tol=1e-12)


def test_score_skill_single_token_equals_token_logprob():
    session = make_scripted("Fetch the apple.", ["done"])
    prompt = build_prompt(PromptSpec(query_instruction="Fetch the apple."), ALFRED_PROFILE)
    score = score_skill(prompt, Skill("done"), session, ALFRED_PROFILE)
    ids = session.tokenize(prompt).ids
    direct = session.next_token_logprobs(ids, allowed={session.piece_id(" done")})
    assert math.isclose(score, direct[session.piece_id(" done")], abs_tol=1e-12)


def replay_score(prompt, skill, session, profile):
    """Independent per-token replay oracle for Eq.-style skill scoring."""
    surface = " " + render_skill(skill, profile)
    prompt_ids = list(session.tokenize(prompt).ids)
    full_ids = list(session.tokenize(prompt + surface).ids)
    k = 0
    while k < len(prompt_ids) and prompt_ids[k] == full_ids[k]:
        k += 1
    total = 0.0
    for i in range(k, len(full_ids)):
        total += session.next_token_logprobs(full_ids[:i], allowed={full_ids[i]})[full_ids[i]]
    return total


def test_score_skill_matches_replay_oracle():
    scene, skillset = scene_and_skillset()
    session = make_scripted("Fetch the apple.", ["find an apple", "pick up the apple", "done"])
    prompt = build_prompt(PromptSpec(query_instruction="Fetch the apple."), ALFRED_PROFILE)
    for skill in skillset:
        impl = score_skill(prompt, skill, session, ALFRED_PROFILE)
        oracle = replay_score(prompt, skill, session, ALFRED_PROFILE)
        assert abs(impl - oracle) <= 1e-9


def test_score_skill_equals_forced_trie_walk():
    scene, skillset = scene_and_skillset()
    session = make_scripted("Fetch the apple.", ["find an apple", "done"])
    trie = SkillTrie.build(skillset, session)
    prompt = build_prompt(PromptSpec(query_instruction="Fetch the apple."), ALFRED_PROFILE)
    for skill in skillset:
        entry = " " + render_skill(skill, ALFRED_PROFILE) + ("." if skill.is_terminal else ",")
        path = simple_tokenize(entry)
        ids = list(session.tokenize(prompt).ids)
        walked = 0.0
        for piece in path[:-1]:  # surface tokens only, excluding the terminator
            tok = session.piece_id(piece)
            walked += session.next_token_logprobs(ids, allowed={tok})[tok]
            ids.append(tok)
        assert abs(walked - score_skill(prompt, skill, session, ALFRED_PROFILE)) <= 1e-9


def test_next_skill_full_matches_brute_force():
    scene, skillset = scene_and_skillset()
    session = make_scripted("Fetch the apple.", ["pick up the apple", "done"])
    prompt = build_prompt(PromptSpec(query_instruction="Fetch the apple."), ALFRED_PROFILE)
    best, _ = next_skill_full(prompt, skillset, session)
    scores = [replay_score(prompt, sk, session, ALFRED_PROFILE) for sk in skillset]
    top = max(scores)
    expected = next(sk for sk, sc in zip(skillset, scores) if sc == top)
    assert best == expected == Skill("pick_up", "apple")


class RiggedSession(MockScorer):
    """Fixed per-token distribution: the terminal token is heavily penalized so
    equal-length surfaces tie at the top and expose the order tie-break."""

    def next_token_logprobs(self, prompt_ids, allowed=None):
        done_id = self.piece_id(" done")
        keys = allowed if allowed is not None else range(self.info()["vocab_size"])
        return {tok: (-5.0 if tok == done_id else -1.0) for tok in keys}


def test_next_skill_full_tiebreak_skillset_order():
    prompt = "Human: anything\nRobot: 1."
    session = RiggedSession()
    forward = SkillSet(ALFRED_PROFILE, [Skill("open", "fridge"), Skill("close", "fridge"), Skill("done")])
    backward = SkillSet(ALFRED_PROFILE, [Skill("close", "fridge"), Skill("open", "fridge"), Skill("done")])
    # both 3-token surfaces score -3.0, the terminal scores -5.0: a true tie
    assert next_skill_full(prompt, forward, session)[0] == Skill("open", "fridge")
    assert next_skill_full(prompt, backward, session)[0] == Skill("close", "fridge")


def test_next_skill_full_uniform_prefers_shortest_surface():
    # under a uniform distribution the summed logprob favors fewer tokens,
    # so the single-token terminal wins outright
    skillset = SkillSet(ALFRED_PROFILE, [Skill("open", "fridge"), Skill("close", "fridge"), Skill("done")])
    best, _ = next_skill_full("Human: anything\nRobot: 1.", skillset, MockScorer())
    assert best == Skill("done")


def test_membership_property_uniform_decode(desk_tasks):
    from planbench.skills import PROFILES

    session = MockScorer()
    for task in desk_tasks[:4]:
        profile = PROFILES[task.profile_name]
        skillset = enumerate_skills(profile, task.scene)
        trie = SkillTrie.build(skillset, session)
        prompt = build_prompt(PromptSpec(query_instruction=task.instructions[0]), profile)
        skill, _ = next_skill_greedy(prompt, trie, session)
        assert skill in skillset


class Task:
    def __init__(self, task_id, instructions, goal):
        self.task_id = task_id
        self.instructions = instructions
        self.goal = goal


def simple_task(instruction="Fetch the apple."):
    from planbench.goals import GoalCondition, SubgoalPredicate

    return Task("t1", (instruction,), GoalCondition((SubgoalPredicate("ON", "apple", target_class="sink"),)))


def test_plan_episode_terminates_on_done_and_succeeds():
    scene, skillset = scene_and_skillset()
    plan = ["find an apple", "pick up the apple", "find a sink", "put down the apple", "done"]
    session = make_scripted("Fetch the apple.", plan)
    world = load_scene(scene)
    record = plan_episode(simple_task(), world, skillset, session, PlannerConfig(mode="greedy"))
    assert record.termination == "done_token"
    assert record.chosen_skills[-1].is_terminal
    assert record.goal_report.success
    assert len(record.chosen_skills) == len(record.step_results) == 5


def test_plan_episode_max_steps():
    scene, skillset = scene_and_skillset()
    # script loops forever on a non-terminal step
    session = make_scripted("Fetch the apple.", ["find an apple"] * 50)
    world = load_scene(scene)
    record = plan_episode(simple_task(), world, skillset, session, PlannerConfig(mode="greedy", max_steps=3))
    assert record.termination == "max_steps"
    assert record.steps == 3


def test_generative_parses_and_executes():
    scene, skillset = scene_and_skillset()
    plan = ["find an apple", "pick up the apple", "find a sink", "put down the apple", "done"]
    session = make_scripted("Fetch the apple.", plan)
    world = load_scene(scene)
    record = generative_plan(simple_task(), world, skillset, session, PlannerConfig(mode="generative"))
    assert record.termination == "done_token"
    assert record.goal_report.success
    assert record.unparsed_steps == []


def test_generative_skips_invented_steps():
    scene, skillset = scene_and_skillset()

    class CannedSession(MockScorer):
        def generate(self, prompt, max_tokens=256, stop=()):
            return "1. find an apple, 2. polish the crown, 3. pick up the apple, 4. done."

    session = CannedSession()
    world = load_scene(scene)
    record = generative_plan(simple_task(), world, skillset, session, PlannerConfig(mode="generative"))
    assert record.unparsed_steps == ["polish the crown"]
    assert [render_skill(s, ALFRED_PROFILE) for s in record.chosen_skills] == [
        "find an apple",
        "pick up the apple",
        "done",
    ]


def test_generative_empty_reply_parse_failure():
    scene, skillset = scene_and_skillset()
    session = MockScorer()  # off-script: generates nothing
    world = load_scene(scene)
    before = world.step_count
    record = generative_plan(simple_task(), world, skillset, session, PlannerConfig(mode="generative"))
    assert record.termination == "parse_failure"
    assert record.steps == 0
    assert world.step_count == before  # untouched world


def test_generative_prompt_embeds_admissible_list():
    scene, skillset = scene_and_skillset()
    prompt = build_generative_prompt("Fetch the apple.", [], skillset, ALFRED_PROFILE)
    for surface in skillset.surfaces():
        assert surface in prompt
    assert prompt.endswith("Input user instruction: Fetch the apple.\n")


def test_feedback_injected_iff_replanning(golden_session, desk_tasks):
    replan_tasks = load_dataset(data_path("replan_dataset.json"))
    with open(data_path("replan_script.json"), encoding="utf-8") as fh:
        session = MockScorer(MockScript.from_json(json.load(fh)))
    on = run_episode(replan_tasks[0], session, RunSettings(mode="greedy", replanning=True))
    off = run_episode(replan_tasks[0], session, RunSettings(mode="greedy", replanning=False))
    assert on.goal_report.success and not off.goal_report.success
    assert any(not r.success for r in on.step_results)
