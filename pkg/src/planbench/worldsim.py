"""Deterministic symbolic household simulator.

Space is a list of discrete zones with distance = index difference; "close to
the agent" means sharing the agent's zone. Skills execute transactionally: a
failed skill leaves the world untouched apart from the step counter and
returns a catalog feedback message, never raising.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

from .skills import Skill

OBJECT_PROPERTIES = frozenset(
    {
        "pickupable",
        "openable",
        "toggleable",
        "sliceable",
        "receptacle",
        "container",
        "heat_source",
        "cold_source",
        "water_source",
    }
)

OBJECT_STATES = frozenset({"open", "toggled_on", "sliced", "heated", "cooled", "cleaned"})

# property required for an object to already carry a state at load time
_STATE_REQUIRES = {"open": "openable", "toggled_on": "toggleable", "sliced": "sliceable"}

KNIFE_CLASS = "knife"
SINK_CLASS = "sink"


class SceneLoadError(ValueError):
    """Scene spec violates the dataset schema or a structural invariant."""


@dataclass
class ObjectInstance:
    id: str
    class_name: str
    properties: frozenset[str]
    states: set[str]
    position: str | None  # zone token for free-standing objects, else None

    def has(self, prop: str) -> bool:
        return prop in self.properties

    def is_open(self) -> bool:
        # objects without the openable property are never shut
        return not self.has("openable") or "open" in self.states


@dataclass
class PlacementGraph:
    on: dict[str, str] = field(default_factory=dict)
    inside: dict[str, str] = field(default_factory=dict)

    def base_of(self, obj_id: str) -> str | None:
        return self.on.get(obj_id) or self.inside.get(obj_id)

    def remove(self, obj_id: str) -> None:
        self.on.pop(obj_id, None)
        self.inside.pop(obj_id, None)


@dataclass
class AgentState:
    location: str
    hands: list[str] = field(default_factory=list)
    capacity: int = 1
    last_receptacle: str | None = None


@dataclass
class WorldState:
    objects: dict[str, ObjectInstance]
    placement: PlacementGraph
    agent: AgentState
    zones: list[str]
    step_count: int = 0

    def zone_of(self, obj_id: str) -> str:
        """Effective zone: held objects travel with the agent, placed objects
        resolve through their placement chain to a free-standing base."""
        seen = set()
        cur = obj_id
        while True:
            if cur in seen:
                raise SceneLoadError(f"containment cycle through {cur!r}")
            seen.add(cur)
            if cur in self.agent.hands:
                return self.agent.location
            base = self.placement.base_of(cur)
            if base is None:
                pos = self.objects[cur].position
                if pos is None:
                    raise SceneLoadError(f"object {cur!r} has no resolvable zone")
                return pos
            cur = base

    def zone_distance(self, a: str, b: str) -> int:
        return abs(self.zones.index(a) - self.zones.index(b))

    def contents_of(self, container_id: str) -> list[str]:
        """Objects whose placement chain passes through container_id (transitive)."""
        out = []
        for oid in self.objects:
            cur = oid
            while True:
                base = self.placement.base_of(cur)
                if base is None:
                    break
                if base == container_id:
                    out.append(oid)
                    break
                cur = base
        return sorted(out)

    def instances_of(self, class_name: str) -> list[str]:
        return sorted(oid for oid, obj in self.objects.items() if obj.class_name == class_name)


# --- feedback catalog -------------------------------------------------------

GENERIC_FAILED = "generic_failed"
NOT_HOLDING = "not_holding"
NOT_VISIBLE_IN_CONTAINER = "not_visible_in_container"
NOT_FOUND = "not_found"

_VERBS = {
    "find": "find",
    "walk_to": "walk to",
    "pick_up": "pick up",
    "grab": "grab",
    "put_down": "put down",
    "put_on": "put on",
    "put_in": "put in",
    "open": "open",
    "close": "close",
    "turn_on": "turn on",
    "turn_off": "turn off",
    "switch_on": "switch on",
    "slice": "slice",
}


def display_class(class_name: str) -> str:
    return " ".join(w.capitalize() for w in class_name.split())


@dataclass(frozen=True)
class FeedbackMessage:
    template_id: str
    rendered: str


def _feedback(template_id: str, inner: str) -> FeedbackMessage:
    return FeedbackMessage(template_id, f"(this action failed: {inner})")


def generic_failed(action: str) -> FeedbackMessage:
    return _feedback(GENERIC_FAILED, f"{_VERBS[action]} failed")


def not_holding() -> FeedbackMessage:
    return _feedback(NOT_HOLDING, "Robot is not holding any object")


def not_visible(obj_class: str, container_class: str) -> FeedbackMessage:
    return _feedback(
        NOT_VISIBLE_IN_CONTAINER,
        f"{display_class(obj_class)} is not visible because it is in {display_class(container_class)}",
    )


def not_found(obj_class: str) -> FeedbackMessage:
    return _feedback(NOT_FOUND, f"{display_class(obj_class)} not found")


@dataclass(frozen=True)
class StepResult:
    success: bool
    executed_skill: Skill
    feedback: FeedbackMessage | None = None

    def __post_init__(self):
        if self.success == (self.feedback is not None):
            raise ValueError("feedback must be present iff the step failed")


# --- scene loading ----------------------------------------------------------


def load_scene(scene_spec: dict) -> WorldState:
    """Build a WorldState from a scene spec, validating every invariant.

    The agent starts empty-handed with no last-visited receptacle.
    """
    if not isinstance(scene_spec, dict):
        raise SceneLoadError("scene: expected an object")
    zones = scene_spec.get("zones")
    if not isinstance(zones, list) or not zones or len(set(zones)) != len(zones):
        raise SceneLoadError("scene.zones: expected a nonempty list of unique zone ids")
    agent_spec = scene_spec.get("agent")
    if not isinstance(agent_spec, dict):
        raise SceneLoadError("scene.agent: missing")
    if agent_spec.get("zone") not in zones:
        raise SceneLoadError("scene.agent.zone: unknown zone")
    capacity = agent_spec.get("capacity")
    if capacity not in (1, 2):
        raise SceneLoadError("scene.agent.capacity: must be 1 or 2")

    objects: dict[str, ObjectInstance] = {}
    placement = PlacementGraph()
    for i, spec in enumerate(scene_spec.get("objects", [])):
        where = f"scene.objects[{i}]"
        oid = spec.get("id")
        if not oid or not isinstance(oid, str):
            raise SceneLoadError(f"{where}.id: missing or not a string")
        if oid in objects:
            raise SceneLoadError(f"{where}.id: duplicate id {oid!r}")
        cls = spec.get("class")
        if not cls or not isinstance(cls, str):
            raise SceneLoadError(f"{where}.class: missing or not a string")
        props = frozenset(spec.get("properties", []))
        bad = props - OBJECT_PROPERTIES
        if bad:
            raise SceneLoadError(f"{where}.properties: unknown {sorted(bad)}")
        states = set(spec.get("states", []))
        bad = states - OBJECT_STATES
        if bad:
            raise SceneLoadError(f"{where}.states: unknown {sorted(bad)}")
        for state, req in _STATE_REQUIRES.items():
            if state in states and req not in props:
                raise SceneLoadError(f"{where}.states: {state!r} requires property {req!r}")
        zone = spec.get("zone")
        if zone is not None and zone not in zones:
            raise SceneLoadError(f"{where}.zone: unknown zone {zone!r}")
        if spec.get("on") and spec.get("inside"):
            raise SceneLoadError(f"{where}: object cannot be both on and inside")
        objects[oid] = ObjectInstance(oid, cls, props, states, zone)

    for i, spec in enumerate(scene_spec.get("objects", [])):
        oid = spec["id"]
        where = f"scene.objects[{i}]"
        for key, prop, table in (("on", "receptacle", placement.on), ("inside", "container", placement.inside)):
            target = spec.get(key)
            if target is None:
                continue
            if target not in objects:
                raise SceneLoadError(f"{where}.{key}: nonexistent target {target!r}")
            if not objects[target].has(prop):
                raise SceneLoadError(f"{where}.{key}: target {target!r} lacks property {prop!r}")
            table[oid] = target

    world = WorldState(
        objects=objects,
        placement=placement,
        agent=AgentState(location=agent_spec["zone"], capacity=capacity),
        zones=list(zones),
    )

    # structural pass: cycles and zone resolvability
    for oid in objects:
        try:
            world.zone_of(oid)
        except SceneLoadError as exc:
            raise SceneLoadError(f"scene.objects: {exc}") from None
    return world


# --- queries ----------------------------------------------------------------


def nearest_instance(world: WorldState, class_name: str) -> str | None:
    """Lowest-id instance in the agent zone; else the instance in the nearest
    zone (ties by id); None if the class is absent from the scene."""
    ids = world.instances_of(class_name)
    if not ids:
        return None
    here = [oid for oid in ids if world.zone_of(oid) == world.agent.location]
    if here:
        return here[0]
    return min(ids, key=lambda oid: (world.zone_distance(world.agent.location, world.zone_of(oid)), oid))


def _blocking_container(world: WorldState, obj_id: str) -> ObjectInstance | None:
    """First closed container on the object's placement chain, if any."""
    cur = obj_id
    while True:
        if cur in world.placement.inside:
            parent = world.objects[world.placement.inside[cur]]
            if not parent.is_open():
                return parent
            cur = parent.id
        elif cur in world.placement.on:
            cur = world.placement.on[cur]
        else:
            return None


# --- skill execution --------------------------------------------------------


def apply_skill(world: WorldState, skill: Skill) -> StepResult:
    """Execute one skill. Mutates the world only on success; the step counter
    always advances. Never raises for in-grammar skills."""
    world.step_count += 1
    action = skill.action
    if action == "done":
        return StepResult(True, skill)
    if action in ("find", "walk_to"):
        return _navigate(world, skill)
    if action in ("pick_up", "grab"):
        return _pick(world, skill)
    if action == "put_down":
        return _put_last(world, skill)
    if action in ("put_on", "put_in"):
        return _put_target(world, skill)
    if action in ("open", "close"):
        return _open_close(world, skill)
    if action in ("turn_on", "switch_on"):
        return _toggle(world, skill, on=True)
    if action == "turn_off":
        return _toggle(world, skill, on=False)
    if action == "slice":
        return _slice(world, skill)
    raise ValueError(f"unknown action {action!r}")


def _navigate(world: WorldState, skill: Skill) -> StepResult:
    target = nearest_instance(world, skill.object_class)
    if target is None:
        return StepResult(False, skill, not_found(skill.object_class))
    obj = world.objects[target]
    world.agent.location = world.zone_of(target)
    if obj.has("receptacle") or obj.has("container"):
        world.agent.last_receptacle = target
    return StepResult(True, skill)


def _pick(world: WorldState, skill: Skill) -> StepResult:
    fail = lambda: StepResult(False, skill, generic_failed(skill.action))
    target = nearest_instance(world, skill.object_class)
    if target is None:
        return fail()
    obj = world.objects[target]
    if target in world.agent.hands:
        return fail()
    if world.zone_of(target) != world.agent.location:
        return fail()
    if not obj.has("pickupable"):
        return fail()
    blocker = _blocking_container(world, target)
    if blocker is not None:
        return StepResult(False, skill, not_visible(obj.class_name, blocker.class_name))
    if len(world.agent.hands) >= world.agent.capacity:
        return fail()
    world.placement.remove(target)
    obj.position = None
    world.agent.hands.append(target)
    return StepResult(True, skill)


def _place(world: WorldState, obj_id: str, target: ObjectInstance) -> None:
    world.placement.remove(obj_id)
    if target.has("container"):
        world.placement.inside[obj_id] = target.id
    else:
        world.placement.on[obj_id] = target.id
    world.objects[obj_id].position = None
    world.agent.hands.remove(obj_id)


def _put_last(world: WorldState, skill: Skill) -> StepResult:
    if not world.agent.hands:
        return StepResult(False, skill, not_holding())
    fail = lambda: StepResult(False, skill, generic_failed(skill.action))
    rid = world.agent.last_receptacle
    if rid is None or rid not in world.objects:
        return fail()
    target = world.objects[rid]
    if world.zone_of(rid) != world.agent.location:
        return fail()
    if target.has("container") and not target.is_open():
        return fail()
    _place(world, world.agent.hands[-1], target)
    return StepResult(True, skill)


def _put_target(world: WorldState, skill: Skill) -> StepResult:
    if not world.agent.hands:
        return StepResult(False, skill, not_holding())
    fail = lambda: StepResult(False, skill, generic_failed(skill.action))
    held = [oid for oid in world.agent.hands if world.objects[oid].class_name == skill.object_class]
    if not held:
        return fail()
    target_id = nearest_instance(world, skill.receptacle_class)
    if target_id is None:
        return fail()
    target = world.objects[target_id]
    if world.zone_of(target_id) != world.agent.location:
        return fail()
    if skill.action == "put_in":
        if not target.has("container"):
            return fail()
        if not target.is_open():
            return fail()
    else:
        if not target.has("receptacle"):
            return fail()
    _place(world, held[-1], target)
    return StepResult(True, skill)


def _open_close(world: WorldState, skill: Skill) -> StepResult:
    fail = lambda: StepResult(False, skill, generic_failed(skill.action))
    target_id = nearest_instance(world, skill.object_class)
    if target_id is None:
        return fail()
    target = world.objects[target_id]
    if world.zone_of(target_id) != world.agent.location or not target.has("openable"):
        return fail()
    want_open = skill.action == "open"
    if ("open" in target.states) == want_open:
        return fail()
    if want_open:
        target.states.add("open")
    else:
        target.states.discard("open")
        if target.has("cold_source"):
            for oid in world.contents_of(target_id):
                world.objects[oid].states.add("cooled")
    return StepResult(True, skill)


def _toggle(world: WorldState, skill: Skill, on: bool) -> StepResult:
    fail = lambda: StepResult(False, skill, generic_failed(skill.action))
    target_id = nearest_instance(world, skill.object_class)
    if target_id is None:
        return fail()
    target = world.objects[target_id]
    if world.zone_of(target_id) != world.agent.location or not target.has("toggleable"):
        return fail()
    if ("toggled_on" in target.states) == on:
        return fail()
    if not on:
        target.states.discard("toggled_on")
        return StepResult(True, skill)
    target.states.add("toggled_on")
    if target.has("heat_source"):
        for oid in world.contents_of(target_id):
            world.objects[oid].states.add("heated")
    if target.has("water_source"):
        zone = world.zone_of(target_id)
        for basin_id, basin in world.objects.items():
            if basin.class_name == SINK_CLASS and basin.has("receptacle") and world.zone_of(basin_id) == zone:
                for oid in world.contents_of(basin_id):
                    world.objects[oid].states.add("cleaned")
    return StepResult(True, skill)


def _slice(world: WorldState, skill: Skill) -> StepResult:
    fail = lambda: StepResult(False, skill, generic_failed(skill.action))
    target_id = nearest_instance(world, skill.object_class)
    if target_id is None:
        return fail()
    target = world.objects[target_id]
    if world.zone_of(target_id) != world.agent.location or not target.has("sliceable"):
        return fail()
    if not any(world.objects[h].class_name == KNIFE_CLASS for h in world.agent.hands):
        return fail()
    if "sliced" in target.states:
        return fail()
    target.states.add("sliced")
    return StepResult(True, skill)


# --- hashing / tracing ------------------------------------------------------


def world_snapshot(world: WorldState) -> dict:
    """Canonical JSON-serializable snapshot of the full world state."""
    return {
        "objects": {
            oid: {
                "class": obj.class_name,
                "properties": sorted(obj.properties),
                "states": sorted(obj.states),
                "position": obj.position,
            }
            for oid, obj in sorted(world.objects.items())
        },
        "on": dict(sorted(world.placement.on.items())),
        "inside": dict(sorted(world.placement.inside.items())),
        "agent": {
            "location": world.agent.location,
            "hands": list(world.agent.hands),
            "capacity": world.agent.capacity,
            "last_receptacle": world.agent.last_receptacle,
        },
        "zones": list(world.zones),
        "step_count": world.step_count,
    }


def state_hash(world: WorldState) -> str:
    payload = json.dumps(world_snapshot(world), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def clone_world(world: WorldState) -> WorldState:
    return copy.deepcopy(world)
