"""Goal-condition predicates and their evaluator.

A goal is a conjunction of counted subgoal predicates checked against a final
world state: ON / INSIDE placement counts, SWITCHON device states, STATE
flags (optionally with a required placement), and the examine-style
HOLDING_WITH_TOGGLED predicate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .worldsim import WorldState

SUBGOAL_KINDS = ("ON", "INSIDE", "SWITCHON", "STATE", "HOLDING_WITH_TOGGLED")
STATE_NAMES = ("heated", "cooled", "cleaned", "sliced")


class GoalSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SubgoalPredicate:
    kind: str
    object_class: str
    target_class: str | None = None
    state_name: str | None = None
    count: int = 1

    def __post_init__(self):
        if self.kind not in SUBGOAL_KINDS:
            raise GoalSpecError(f"unknown subgoal kind {self.kind!r}")
        if self.count < 1:
            raise GoalSpecError("subgoal count must be >= 1")
        if self.kind == "STATE":
            if self.state_name not in STATE_NAMES:
                raise GoalSpecError(f"STATE subgoal needs a state in {STATE_NAMES}, got {self.state_name!r}")
        elif self.state_name is not None:
            raise GoalSpecError(f"{self.kind} subgoal does not take a state name")
        if self.kind in ("ON", "INSIDE", "HOLDING_WITH_TOGGLED") and not self.target_class:
            raise GoalSpecError(f"{self.kind} subgoal needs a target class")
        if self.kind == "SWITCHON" and self.target_class:
            raise GoalSpecError("SWITCHON subgoal takes no target class")


@dataclass(frozen=True)
class GoalCondition:
    subgoals: tuple[SubgoalPredicate, ...]

    @staticmethod
    def from_json(data: list[dict]) -> "GoalCondition":
        subs = []
        for i, entry in enumerate(data):
            try:
                subs.append(
                    SubgoalPredicate(
                        kind=entry["kind"],
                        object_class=entry["object"],
                        target_class=entry.get("target"),
                        state_name=entry.get("state"),
                        count=entry.get("count", 1),
                    )
                )
            except KeyError as exc:
                raise GoalSpecError(f"goal[{i}]: missing field {exc}") from None
        return GoalCondition(tuple(subs))

    def to_json(self) -> list[dict]:
        out = []
        for sg in self.subgoals:
            entry: dict = {"kind": sg.kind, "object": sg.object_class}
            if sg.target_class is not None:
                entry["target"] = sg.target_class
            if sg.state_name is not None:
                entry["state"] = sg.state_name
            entry["count"] = sg.count
            out.append(entry)
        return out


@dataclass(frozen=True)
class GoalReport:
    satisfied: int
    total: int
    success: bool
    per_subgoal: tuple[bool, ...]

    @property
    def subgoal_rate(self) -> float:
        # vacuous goals count as fully satisfied
        return 1.0 if self.total == 0 else self.satisfied / self.total


def _placed_on(world: WorldState, obj_id: str, target_class: str) -> bool:
    base = world.placement.on.get(obj_id)
    return base is not None and world.objects[base].class_name == target_class


def _placed_inside(world: WorldState, obj_id: str, target_class: str) -> bool:
    base = world.placement.inside.get(obj_id)
    return base is not None and world.objects[base].class_name == target_class


def _satisfied_count(world: WorldState, sg: SubgoalPredicate) -> int:
    ids = world.instances_of(sg.object_class)
    if sg.kind == "ON":
        return sum(1 for oid in ids if _placed_on(world, oid, sg.target_class))
    if sg.kind == "INSIDE":
        return sum(1 for oid in ids if _placed_inside(world, oid, sg.target_class))
    if sg.kind == "SWITCHON":
        return sum(1 for oid in ids if "toggled_on" in world.objects[oid].states)
    if sg.kind == "STATE":
        n = 0
        for oid in ids:
            if sg.state_name not in world.objects[oid].states:
                continue
            if sg.target_class is not None and not (
                _placed_on(world, oid, sg.target_class) or _placed_inside(world, oid, sg.target_class)
            ):
                continue
            n += 1
        return n
    # HOLDING_WITH_TOGGLED: held instances of the class count only while some
    # instance of the target class is toggled on
    lamp_on = any(
        "toggled_on" in world.objects[oid].states for oid in world.instances_of(sg.target_class)
    )
    if not lamp_on:
        return 0
    return sum(1 for oid in world.agent.hands if world.objects[oid].class_name == sg.object_class)


def evaluate_goal(world: WorldState, goal: GoalCondition) -> GoalReport:
    """Check every subgoal against the world; a subgoal is satisfied iff its
    count is met. An empty subgoal list is vacuously successful."""
    per = tuple(_satisfied_count(world, sg) >= sg.count for sg in goal.subgoals)
    satisfied = sum(per)
    total = len(per)
    return GoalReport(satisfied=satisfied, total=total, success=satisfied == total, per_subgoal=per)
