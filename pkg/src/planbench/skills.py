"""Environment profiles: skill vocabularies, surface grammar, enumeration.

Two profiles are bundled. The ``alfred`` profile mirrors a one-handed agent
with find/pick/put-down/open/close/turn-on/turn-off/slice actions and
article-based surfaces ("find an apple"). The ``wah`` profile mirrors a
two-handed agent with walk/grab/put-on/put-in/open/close/switch-on actions
and bare-noun surfaces ("put cutlery fork in dishwasher"). Both include the
terminal skill "done".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# Documentation constants from the reference environments; the bundled desk
# scenes are far smaller, so these are never asserted against enumerations.
ALFRED_REFERENCE_SKILL_COUNT = 214
WAH_MEAN_SKILL_COUNT = 351.89

TERMINAL_ACTION = "done"

ALFRED_TASK_TYPES = (
    "Pick & Place",
    "Stack & Place",
    "Clean & Place",
    "Heat & Place",
    "Cool & Place",
    "Examine in Light",
)

WAH_TASK_TYPES = (
    "Setup a dinner table",
    "Put groceries",
    "Prepare a meal",
    "Wash dishes",
    "Prepare snacks",
)


class NoSuchSkill(ValueError):
    """Raised when a surface string does not parse under the active profile."""

    def __init__(self, text: str, profile_name: str = ""):
        self.text = text
        super().__init__(f"no skill matches {text!r}" + (f" under profile {profile_name}" if profile_name else ""))


class AllowListError(ValueError):
    pass


@dataclass(frozen=True)
class Skill:
    """An atomic agent capability: action plus optional object/receptacle classes."""

    action: str
    object_class: str | None = None
    receptacle_class: str | None = None

    @property
    def is_terminal(self) -> bool:
        return self.action == TERMINAL_ACTION


@dataclass(frozen=True)
class ActionSpec:
    name: str
    arity: int  # 0 = terminal, 1 = object only, 2 = object + receptacle
    # property an object class must carry to be an applicable parameter;
    # None means any class present in the scene qualifies
    object_property: str | None = None
    target_property: str | None = None


def _article(word: str, exceptions: dict[str, str]) -> str:
    if word in exceptions:
        return exceptions[word]
    return "an" if word[:1].lower() in "aeiou" else "a"


@dataclass(frozen=True)
class EnvironmentProfile:
    """Immutable bundle of action vocabulary, surface grammar and capacity."""

    name: str
    capacity: int
    actions: tuple[ActionSpec, ...]
    task_types: tuple[str, ...]
    article_exceptions: dict[str, str] = field(default_factory=dict)

    def action_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    def action(self, name: str) -> ActionSpec:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)


ALFRED_PROFILE = EnvironmentProfile(
    name="alfred",
    capacity=1,
    actions=(
        ActionSpec("find", 1),
        ActionSpec("pick_up", 1, object_property="pickupable"),
        ActionSpec("put_down", 1, object_property="pickupable"),
        ActionSpec("open", 1, object_property="openable"),
        ActionSpec("close", 1, object_property="openable"),
        ActionSpec("turn_on", 1, object_property="toggleable"),
        ActionSpec("turn_off", 1, object_property="toggleable"),
        ActionSpec("slice", 1, object_property="sliceable"),
        ActionSpec(TERMINAL_ACTION, 0),
    ),
    task_types=ALFRED_TASK_TYPES,
)

WAH_PROFILE = EnvironmentProfile(
    name="wah",
    capacity=2,
    actions=(
        ActionSpec("walk_to", 1),
        ActionSpec("grab", 1, object_property="pickupable"),
        ActionSpec("put_on", 2, object_property="pickupable", target_property="receptacle"),
        ActionSpec("put_in", 2, object_property="pickupable", target_property="container"),
        ActionSpec("open", 1, object_property="openable"),
        ActionSpec("close", 1, object_property="openable"),
        ActionSpec("switch_on", 1, object_property="toggleable"),
        ActionSpec(TERMINAL_ACTION, 0),
    ),
    task_types=WAH_TASK_TYPES,
)

PROFILES = {"alfred": ALFRED_PROFILE, "wah": WAH_PROFILE}


def get_profile(name: str) -> EnvironmentProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}") from None


def render_skill(skill: Skill, profile: EnvironmentProfile) -> str:
    """Render a skill to its canonical surface string."""
    a = skill.action
    obj = skill.object_class
    rec = skill.receptacle_class
    if a == TERMINAL_ACTION:
        return "done"
    if profile.name == "alfred":
        if a == "find":
            return f"find {_article(obj, profile.article_exceptions)} {obj}"
        verb = a.replace("_", " ")
        return f"{verb} the {obj}"
    # wah
    if a == "walk_to":
        return f"walk to {obj}"
    if a == "grab":
        return f"grab {obj}"
    if a == "put_on":
        return f"put {obj} on {rec}"
    if a == "put_in":
        return f"put {obj} in {rec}"
    if a == "open":
        return f"open {obj}"
    if a == "close":
        return f"close {obj}"
    if a == "switch_on":
        return f"switch on {obj}"
    raise NoSuchSkill(a, profile.name)


_STEP_PREFIX = re.compile(r"^\s*\d+\.\s*")


def _strip_step(text: str) -> str:
    text = _STEP_PREFIX.sub("", text.strip())
    return text.strip().rstrip(".,").strip()


def parse_skill(text: str, profile: EnvironmentProfile) -> Skill:
    """Inverse of render_skill. Strips leading step numbers and trailing punctuation.

    Raises NoSuchSkill for any surface outside the profile grammar.
    """
    raw = text
    s = _strip_step(text)
    if not s:
        raise NoSuchSkill(raw, profile.name)
    if s == "done":
        return Skill(TERMINAL_ACTION)
    if profile.name == "alfred":
        if s.startswith("find an "):
            return _mk(profile, "find", s[len("find an "):])
        if s.startswith("find a "):
            return _mk(profile, "find", s[len("find a "):])
        for verb, action in (
            ("pick up the ", "pick_up"),
            ("put down the ", "put_down"),
            ("open the ", "open"),
            ("close the ", "close"),
            ("turn on the ", "turn_on"),
            ("turn off the ", "turn_off"),
            ("slice the ", "slice"),
        ):
            if s.startswith(verb):
                return _mk(profile, action, s[len(verb):])
        raise NoSuchSkill(raw, profile.name)
    # wah
    if s.startswith("walk to "):
        return _mk(profile, "walk_to", s[len("walk to "):])
    if s.startswith("grab "):
        return _mk(profile, "grab", s[len("grab "):])
    if s.startswith("switch on "):
        return _mk(profile, "switch_on", s[len("switch on "):])
    if s.startswith("open "):
        return _mk(profile, "open", s[len("open "):])
    if s.startswith("close "):
        return _mk(profile, "close", s[len("close "):])
    if s.startswith("put "):
        body = s[len("put "):]
        # first separator occurrence wins; the bijection test over every
        # enumerated SkillSet guards against class names containing one
        for sep, action in ((" on ", "put_on"), (" in ", "put_in")):
            idx = body.find(sep)
            if idx > 0:
                obj, rec = body[:idx], body[idx + len(sep):]
                if obj and rec:
                    return Skill(action, obj, rec)
        raise NoSuchSkill(raw, profile.name)
    raise NoSuchSkill(raw, profile.name)


def _mk(profile: EnvironmentProfile, action: str, obj: str) -> Skill:
    obj = obj.strip()
    if not obj:
        raise NoSuchSkill(action, profile.name)
    return Skill(action, obj)


class SkillSet:
    """Ordered skill collection with a surface-string index.

    Surfaces are pairwise distinct and exactly one terminal skill is present.
    """

    def __init__(self, profile: EnvironmentProfile, skills: list[Skill]):
        self.profile = profile
        self.skills: tuple[Skill, ...] = tuple(skills)
        self.surface_index: dict[str, Skill] = {}
        terminals = 0
        for sk in self.skills:
            surface = render_skill(sk, profile)
            if surface in self.surface_index:
                raise ValueError(f"duplicate surface {surface!r}")
            self.surface_index[surface] = sk
            if sk.is_terminal:
                terminals += 1
        if terminals != 1:
            raise ValueError(f"skill set must contain exactly one terminal skill, found {terminals}")

    def __len__(self) -> int:
        return len(self.skills)

    def __iter__(self):
        return iter(self.skills)

    def __contains__(self, skill: Skill) -> bool:
        return skill in set(self.skills)

    def surfaces(self) -> list[str]:
        return [render_skill(sk, self.profile) for sk in self.skills]


def _scene_class_properties(scene_spec: dict) -> dict[str, set[str]]:
    classes: dict[str, set[str]] = {}
    for obj in scene_spec.get("objects", []):
        classes.setdefault(obj["class"], set()).update(obj.get("properties", []))
    return classes


def enumerate_skills(
    profile: EnvironmentProfile,
    scene_spec: dict,
    allow_list: str | None = None,
) -> SkillSet:
    """Enumerate the skill set for a scene.

    Cartesian product of actions with applicable scene classes, filtered by
    property applicability; ``put on`` targets receptacles that are not
    containers, ``put in`` targets containers. With an allow-list the
    enumeration is intersected with the listed surfaces. The terminal skill
    is always included and ordering is deterministic: profile action order,
    then class lexicographic (object class, then receptacle class).
    """
    classes = _scene_class_properties(scene_spec)
    names = sorted(classes)
    skills: list[Skill] = []
    for act in profile.actions:
        if act.arity == 0:
            skills.append(Skill(TERMINAL_ACTION))
            continue
        objs = [c for c in names if act.object_property is None or act.object_property in classes[c]]
        if act.arity == 1:
            skills.extend(Skill(act.name, c) for c in objs)
            continue
        targets = [c for c in names if act.target_property in classes[c]]
        if act.name == "put_on":
            targets = [c for c in targets if "container" not in classes[c]]
        for obj in objs:
            for rec in targets:
                if obj != rec:
                    skills.append(Skill(act.name, obj, rec))
    if allow_list is not None:
        allowed = load_allow_list(allow_list, profile)
        skills = [sk for sk in skills if sk.is_terminal or sk in allowed]
    return SkillSet(profile, skills)


def load_allow_list(path: str, profile: EnvironmentProfile) -> set[Skill]:
    """Read an allow-list file: one surface per line, '#' comments, UTF-8."""
    allowed: set[Skill] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                allowed.add(parse_skill(stripped, profile))
            except NoSuchSkill as exc:
                raise AllowListError(f"{path}:{lineno}: unparseable entry {stripped!r}") from exc
    return allowed
