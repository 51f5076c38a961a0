import json

import pytest

from planbench import data_path
from planbench.bench import load_dataset
from planbench.scorer import MockScorer, MockScript
from planbench.skills import ALFRED_PROFILE, WAH_PROFILE


@pytest.fixture(scope="session")
def desk_tasks():
    return load_dataset(data_path("desk_dataset.json"))


@pytest.fixture(scope="session")
def alfred_tasks(desk_tasks):
    return [t for t in desk_tasks if t.profile_name == "alfred"]


@pytest.fixture(scope="session")
def wah_tasks(desk_tasks):
    return [t for t in desk_tasks if t.profile_name == "wah"]


@pytest.fixture(scope="session")
def golden_script():
    with open(data_path("golden_script.json"), encoding="utf-8") as fh:
        return MockScript.from_json(json.load(fh))


@pytest.fixture()
def golden_session(golden_script):
    return MockScorer(golden_script)


@pytest.fixture()
def uniform_session():
    return MockScorer()


@pytest.fixture(scope="session")
def alfred_profile():
    return ALFRED_PROFILE


@pytest.fixture(scope="session")
def wah_profile():
    return WAH_PROFILE


def small_alfred_scene(extra_objects=(), agent_zone="kitchen"):
    """Minimal one-zone-pair kitchen scene for simulator unit tests."""
    return {
        "zones": ["kitchen", "living room"],
        "objects": [
            {"id": "counter_top_1", "class": "counter top", "properties": ["receptacle"], "zone": "kitchen"},
            {"id": "sink_1", "class": "sink", "properties": ["receptacle"], "zone": "kitchen"},
            {
                "id": "faucet_1",
                "class": "faucet",
                "properties": ["toggleable", "water_source"],
                "zone": "kitchen",
            },
            {
                "id": "fridge_1",
                "class": "fridge",
                "properties": ["container", "openable", "cold_source"],
                "zone": "kitchen",
            },
            {
                "id": "microwave_1",
                "class": "microwave",
                "properties": ["container", "openable", "toggleable", "heat_source"],
                "zone": "kitchen",
            },
            *extra_objects,
        ],
        "agent": {"zone": agent_zone, "capacity": 1},
    }
