"""Regenerates the bundled data files under src/planbench/data/.

The desk dataset is authored here as Python structures so scenes, goals and
golden plans stay consistent; tests lint the generated artifacts.
"""

from __future__ import annotations

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "planbench", "data")

# --- shared scene furniture ----------------------------------------------------

KITCHEN_FURNITURE = [
    {"id": "counter_top_1", "class": "counter top", "properties": ["receptacle"], "zone": "kitchen"},
    {"id": "sink_1", "class": "sink", "properties": ["receptacle"], "zone": "kitchen"},
    {"id": "faucet_1", "class": "faucet", "properties": ["toggleable", "water_source"], "zone": "kitchen"},
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
    {"id": "dining_table_1", "class": "dining table", "properties": ["receptacle"], "zone": "kitchen"},
    {"id": "garbage_can_1", "class": "garbage can", "properties": ["receptacle"], "zone": "kitchen"},
]

LIVING_FURNITURE = [
    {"id": "coffee_table_1", "class": "coffee table", "properties": ["receptacle"], "zone": "living room"},
    {"id": "sofa_1", "class": "sofa", "properties": ["receptacle"], "zone": "living room"},
    {"id": "arm_chair_1", "class": "arm chair", "properties": ["receptacle"], "zone": "living room"},
    {"id": "desk_lamp_1", "class": "desk lamp", "properties": ["toggleable"], "zone": "living room"},
    {"id": "floor_lamp_1", "class": "floor lamp", "properties": ["toggleable"], "zone": "living room"},
]


def alfred_scene(items, agent_zone="living room"):
    return {
        "zones": ["kitchen", "living room"],
        "objects": [*KITCHEN_FURNITURE, *LIVING_FURNITURE, *items],
        "agent": {"zone": agent_zone, "capacity": 1},
    }


def pickup(oid, cls, **where):
    return {"id": oid, "class": cls, "properties": ["pickupable"], **where}


WAH_FURNITURE = [
    {"id": "kitchen_table_1", "class": "kitchen table", "properties": ["receptacle"], "zone": "kitchen"},
    {
        "id": "fridge_1",
        "class": "fridge",
        "properties": ["container", "openable", "cold_source"],
        "zone": "kitchen",
    },
    {
        "id": "dishwasher_1",
        "class": "dishwasher",
        "properties": ["container", "openable", "toggleable"],
        "zone": "kitchen",
    },
    {"id": "coffee_table_1", "class": "coffee table", "properties": ["receptacle"], "zone": "living room"},
    {"id": "sofa_1", "class": "sofa", "properties": ["receptacle"], "zone": "living room"},
]


def wah_scene(items, agent_zone="living room"):
    return {
        "zones": ["kitchen", "living room"],
        "objects": [*WAH_FURNITURE, *items],
        "agent": {"zone": agent_zone, "capacity": 2},
    }


def fetch_and_put(obj, target, preposition):
    return [f"walk to {obj}", f"grab {obj}", f"walk to {target}", f"put {obj} {preposition} {target}"]


# --- ALFRED tasks ----------------------------------------------------------------

ALFRED_TASKS = [
    {
        "task_id": "alfred_pick_01",
        "task_type": "Pick & Place",
        "profile": "alfred",
        "instructions": ["Put a ladle in the sink."],
        "scene": alfred_scene([pickup("ladle_1", "ladle", on="counter_top_1")]),
        "goal": [{"kind": "ON", "object": "ladle", "target": "sink", "count": 1}],
        "golden_plan": [
            "find a ladle",
            "pick up the ladle",
            "find a sink",
            "put down the ladle",
            "done",
        ],
    },
    {
        "task_id": "alfred_pick_02",
        "task_type": "Pick & Place",
        "profile": "alfred",
        "instructions": ["Move the newspaper in the living room to the couch."],
        "scene": alfred_scene([pickup("newspaper_1", "newspaper", on="coffee_table_1")], agent_zone="kitchen"),
        "goal": [{"kind": "ON", "object": "newspaper", "target": "sofa", "count": 1}],
        "golden_plan": [
            "find a newspaper",
            "pick up the newspaper",
            "find a sofa",
            "put down the newspaper",
            "done",
        ],
    },
    {
        "task_id": "alfred_stack_01",
        "task_type": "Stack & Place",
        "profile": "alfred",
        "instructions": ["Put a pan with a spoon in it on the table."],
        "scene": alfred_scene(
            [
                pickup("spoon_1", "spoon", on="counter_top_1"),
                {
                    "id": "pot_1",
                    "class": "pot",
                    "properties": ["pickupable", "receptacle"],
                    "on": "counter_top_1",
                },
            ]
        ),
        "goal": [
            {"kind": "ON", "object": "spoon", "target": "pot", "count": 1},
            {"kind": "ON", "object": "pot", "target": "dining table", "count": 1},
        ],
        "golden_plan": [
            "find a spoon",
            "pick up the spoon",
            "find a pot",
            "put down the spoon",
            "pick up the pot",
            "find a dining table",
            "put down the pot",
            "done",
        ],
    },
    {
        "task_id": "alfred_stack_02",
        "task_type": "Stack & Place",
        "profile": "alfred",
        "instructions": ["Place a box with a cell phone on a chair."],
        "scene": alfred_scene(
            [
                pickup("cell_phone_1", "cell phone", on="coffee_table_1"),
                {
                    "id": "box_1",
                    "class": "box",
                    "properties": ["pickupable", "receptacle"],
                    "zone": "living room",
                },
            ],
            agent_zone="kitchen",
        ),
        "goal": [
            {"kind": "ON", "object": "cell phone", "target": "box", "count": 1},
            {"kind": "ON", "object": "box", "target": "arm chair", "count": 1},
        ],
        "golden_plan": [
            "find a cell phone",
            "pick up the cell phone",
            "find a box",
            "put down the cell phone",
            "pick up the box",
            "find an arm chair",
            "put down the box",
            "done",
        ],
    },
    {
        "task_id": "alfred_clean_01",
        "task_type": "Clean & Place",
        "profile": "alfred",
        "instructions": ["Put a clean spatula on the counter."],
        "scene": alfred_scene([pickup("spatula_1", "spatula", on="dining_table_1")]),
        "goal": [
            {"kind": "STATE", "object": "spatula", "state": "cleaned", "count": 1},
            {"kind": "ON", "object": "spatula", "target": "counter top", "count": 1},
        ],
        "golden_plan": [
            "find a spatula",
            "pick up the spatula",
            "find a sink",
            "put down the spatula",
            "find a faucet",
            "turn on the faucet",
            "turn off the faucet",
            "find a spatula",
            "pick up the spatula",
            "find a counter top",
            "put down the spatula",
            "done",
        ],
    },
    {
        "task_id": "alfred_clean_02",
        "task_type": "Clean & Place",
        "profile": "alfred",
        "instructions": ["Place the rinsed off apple on the brown kitchen table."],
        "scene": alfred_scene([pickup("apple_1", "apple", on="counter_top_1")]),
        "goal": [
            {"kind": "STATE", "object": "apple", "state": "cleaned", "target": "dining table", "count": 1}
        ],
        "golden_plan": [
            "find an apple",
            "pick up the apple",
            "find a sink",
            "put down the apple",
            "find a faucet",
            "turn on the faucet",
            "turn off the faucet",
            "find an apple",
            "pick up the apple",
            "find a dining table",
            "put down the apple",
            "done",
        ],
    },
    {
        "task_id": "alfred_heat_01",
        "task_type": "Heat & Place",
        "profile": "alfred",
        "instructions": ["Place a heated plate on the round table."],
        "scene": alfred_scene([pickup("plate_1", "plate", on="counter_top_1")]),
        "goal": [
            {"kind": "STATE", "object": "plate", "state": "heated", "count": 1},
            {"kind": "ON", "object": "plate", "target": "dining table", "count": 1},
        ],
        "golden_plan": [
            "find a plate",
            "pick up the plate",
            "find a microwave",
            "open the microwave",
            "put down the plate",
            "close the microwave",
            "turn on the microwave",
            "turn off the microwave",
            "open the microwave",
            "find a plate",
            "pick up the plate",
            "close the microwave",
            "find a dining table",
            "put down the plate",
            "done",
        ],
    },
    {
        "task_id": "alfred_heat_02",
        "task_type": "Heat & Place",
        "profile": "alfred",
        "instructions": ["Place a microwaved potato in the sink."],
        "scene": alfred_scene([pickup("potato_1", "potato", on="counter_top_1")]),
        "goal": [
            {"kind": "STATE", "object": "potato", "state": "heated", "count": 1},
            {"kind": "ON", "object": "potato", "target": "sink", "count": 1},
        ],
        "golden_plan": [
            "find a potato",
            "pick up the potato",
            "find a microwave",
            "open the microwave",
            "put down the potato",
            "close the microwave",
            "turn on the microwave",
            "turn off the microwave",
            "open the microwave",
            "find a potato",
            "pick up the potato",
            "close the microwave",
            "find a sink",
            "put down the potato",
            "done",
        ],
    },
    {
        "task_id": "alfred_cool_01",
        "task_type": "Cool & Place",
        "profile": "alfred",
        "instructions": ["Place a cold potato on the table."],
        "scene": alfred_scene([pickup("potato_1", "potato", on="counter_top_1")]),
        "goal": [
            {"kind": "STATE", "object": "potato", "state": "cooled", "count": 1},
            {"kind": "ON", "object": "potato", "target": "counter top", "count": 1},
        ],
        "golden_plan": [
            "find a potato",
            "pick up the potato",
            "find a fridge",
            "open the fridge",
            "put down the potato",
            "close the fridge",
            "open the fridge",
            "find a potato",
            "pick up the potato",
            "close the fridge",
            "find a counter top",
            "put down the potato",
            "done",
        ],
    },
    {
        "task_id": "alfred_cool_02",
        "task_type": "Cool & Place",
        "profile": "alfred",
        "instructions": ["Put the chilled sliced cabbage in the trash bin."],
        "scene": alfred_scene(
            [
                pickup("knife_1", "knife", on="counter_top_1"),
                {
                    "id": "lettuce_1",
                    "class": "lettuce",
                    "properties": ["pickupable", "sliceable"],
                    "on": "counter_top_1",
                },
            ]
        ),
        "goal": [
            {"kind": "STATE", "object": "lettuce", "state": "sliced", "count": 1},
            {"kind": "STATE", "object": "lettuce", "state": "cooled", "count": 1},
            {"kind": "ON", "object": "lettuce", "target": "garbage can", "count": 1},
        ],
        "golden_plan": [
            "find a knife",
            "pick up the knife",
            "find a lettuce",
            "slice the lettuce",
            "find a fridge",
            "open the fridge",
            "put down the knife",
            "close the fridge",
            "find a lettuce",
            "pick up the lettuce",
            "find a fridge",
            "open the fridge",
            "put down the lettuce",
            "close the fridge",
            "open the fridge",
            "find a lettuce",
            "pick up the lettuce",
            "close the fridge",
            "find a garbage can",
            "put down the lettuce",
            "done",
        ],
    },
    {
        "task_id": "alfred_examine_01",
        "task_type": "Examine in Light",
        "profile": "alfred",
        "instructions": ["Examine a credit card using the light from a floor lamp."],
        "scene": alfred_scene([pickup("credit_card_1", "credit card", on="coffee_table_1")]),
        "goal": [
            {"kind": "HOLDING_WITH_TOGGLED", "object": "credit card", "target": "floor lamp", "count": 1}
        ],
        "golden_plan": [
            "find a credit card",
            "pick up the credit card",
            "find a floor lamp",
            "turn on the floor lamp",
            "done",
        ],
    },
    {
        "task_id": "alfred_examine_02",
        "task_type": "Examine in Light",
        "profile": "alfred",
        "instructions": ["Pick up a pillow and turn on a lamp."],
        "scene": alfred_scene([pickup("pillow_1", "pillow", on="sofa_1")], agent_zone="kitchen"),
        "goal": [
            {"kind": "HOLDING_WITH_TOGGLED", "object": "pillow", "target": "desk lamp", "count": 1}
        ],
        "golden_plan": [
            "find a pillow",
            "pick up the pillow",
            "find a desk lamp",
            "turn on the desk lamp",
            "done",
        ],
    },
]

# --- WAH tasks ----------------------------------------------------------------------

WAH_TASKS = [
    {
        "task_id": "wah_dinner_01",
        "task_type": "Setup a dinner table",
        "profile": "wah",
        "instructions": [
            "I need a wine glass, water glass and a plate on the kitchen table",
            "Put a plate, a wine glass and a water glass onto the kitchen table.",
        ],
        "scene": wah_scene(
            [
                pickup("wine_glass_1", "wine glass", zone="living room"),
                pickup("water_glass_1", "water glass", zone="kitchen"),
                pickup("plate_1", "plate", zone="kitchen"),
            ]
        ),
        "goal": [
            {"kind": "ON", "object": "wine glass", "target": "kitchen table", "count": 1},
            {"kind": "ON", "object": "water glass", "target": "kitchen table", "count": 1},
            {"kind": "ON", "object": "plate", "target": "kitchen table", "count": 1},
        ],
        "golden_plan": [
            *fetch_and_put("wine glass", "kitchen table", "on"),
            *fetch_and_put("water glass", "kitchen table", "on"),
            *fetch_and_put("plate", "kitchen table", "on"),
            "done",
        ],
    },
    {
        "task_id": "wah_dinner_02",
        "task_type": "Setup a dinner table",
        "profile": "wah",
        "instructions": ["Put a plate and a cutlery fork on the kitchen table."],
        "scene": wah_scene(
            [
                pickup("plate_1", "plate", zone="living room"),
                pickup("cutlery_fork_1", "cutlery fork", zone="kitchen"),
            ]
        ),
        "goal": [
            {"kind": "ON", "object": "plate", "target": "kitchen table", "count": 1},
            {"kind": "ON", "object": "cutlery fork", "target": "kitchen table", "count": 1},
        ],
        "golden_plan": [
            *fetch_and_put("plate", "kitchen table", "on"),
            *fetch_and_put("cutlery fork", "kitchen table", "on"),
            "done",
        ],
    },
    {
        "task_id": "wah_groceries_01",
        "task_type": "Put groceries",
        "profile": "wah",
        "instructions": ["Could you put 1 apple, 1 pancake and 1 cupcake in the fridge?"],
        "scene": wah_scene(
            [
                pickup("apple_1", "apple", zone="living room"),
                pickup("pancake_1", "pancake", zone="kitchen"),
                pickup("cupcake_1", "cupcake", zone="living room"),
            ]
        ),
        "goal": [
            {"kind": "INSIDE", "object": "apple", "target": "fridge", "count": 1},
            {"kind": "INSIDE", "object": "pancake", "target": "fridge", "count": 1},
            {"kind": "INSIDE", "object": "cupcake", "target": "fridge", "count": 1},
        ],
        "golden_plan": [
            "walk to fridge",
            "open fridge",
            *fetch_and_put("apple", "fridge", "in"),
            *fetch_and_put("pancake", "fridge", "in"),
            *fetch_and_put("cupcake", "fridge", "in"),
            "close fridge",
            "done",
        ],
    },
    {
        "task_id": "wah_groceries_02",
        "task_type": "Put groceries",
        "profile": "wah",
        "instructions": ["store the pound cake and the juice in the fridge"],
        "scene": wah_scene(
            [
                pickup("pound_cake_1", "pound cake", zone="kitchen"),
                pickup("juice_1", "juice", zone="living room"),
            ]
        ),
        "goal": [
            {"kind": "INSIDE", "object": "pound cake", "target": "fridge", "count": 1},
            {"kind": "INSIDE", "object": "juice", "target": "fridge", "count": 1},
        ],
        "golden_plan": [
            "walk to fridge",
            "open fridge",
            *fetch_and_put("pound cake", "fridge", "in"),
            *fetch_and_put("juice", "fridge", "in"),
            "close fridge",
            "done",
        ],
    },
    {
        "task_id": "wah_meal_01",
        "task_type": "Prepare a meal",
        "profile": "wah",
        "instructions": ["Robot, please put the pancake and pudding on the kitchen table."],
        "scene": wah_scene(
            [
                pickup("pancake_1", "pancake", zone="kitchen"),
                pickup("pudding_1", "pudding", zone="living room"),
            ]
        ),
        "goal": [
            {"kind": "ON", "object": "pancake", "target": "kitchen table", "count": 1},
            {"kind": "ON", "object": "pudding", "target": "kitchen table", "count": 1},
        ],
        "golden_plan": [
            *fetch_and_put("pancake", "kitchen table", "on"),
            *fetch_and_put("pudding", "kitchen table", "on"),
            "done",
        ],
    },
    {
        "task_id": "wah_meal_02",
        "task_type": "Prepare a meal",
        "profile": "wah",
        "instructions": ["Find 1 coffee pot, 1 cupcake, 1 pudding and put on the kitchen table."],
        "scene": wah_scene(
            [
                pickup("coffee_pot_1", "coffee pot", zone="kitchen"),
                pickup("cupcake_1", "cupcake", zone="living room"),
                pickup("pudding_1", "pudding", zone="kitchen"),
            ]
        ),
        "goal": [
            {"kind": "ON", "object": "coffee pot", "target": "kitchen table", "count": 1},
            {"kind": "ON", "object": "cupcake", "target": "kitchen table", "count": 1},
            {"kind": "ON", "object": "pudding", "target": "kitchen table", "count": 1},
        ],
        "golden_plan": [
            *fetch_and_put("coffee pot", "kitchen table", "on"),
            *fetch_and_put("cupcake", "kitchen table", "on"),
            *fetch_and_put("pudding", "kitchen table", "on"),
            "done",
        ],
    },
    {
        "task_id": "wah_dishes_01",
        "task_type": "Wash dishes",
        "profile": "wah",
        "instructions": ["Add a fork and a plate to the dishwasher and switch it on."],
        "scene": wah_scene(
            [
                pickup("cutlery_fork_1", "cutlery fork", zone="kitchen"),
                pickup("plate_1", "plate", zone="living room"),
            ]
        ),
        "goal": [
            {"kind": "INSIDE", "object": "cutlery fork", "target": "dishwasher", "count": 1},
            {"kind": "INSIDE", "object": "plate", "target": "dishwasher", "count": 1},
            {"kind": "SWITCHON", "object": "dishwasher", "count": 1},
        ],
        "golden_plan": [
            "walk to dishwasher",
            "open dishwasher",
            *fetch_and_put("cutlery fork", "dishwasher", "in"),
            *fetch_and_put("plate", "dishwasher", "in"),
            "close dishwasher",
            "switch on dishwasher",
            "done",
        ],
    },
    {
        "task_id": "wah_dishes_02",
        "task_type": "Wash dishes",
        "profile": "wah",
        "instructions": ["Place one wine glass and one plate in the dishwasher and turn it on."],
        "scene": wah_scene(
            [
                pickup("wine_glass_1", "wine glass", zone="living room"),
                pickup("plate_1", "plate", zone="kitchen"),
            ]
        ),
        "goal": [
            {"kind": "INSIDE", "object": "wine glass", "target": "dishwasher", "count": 1},
            {"kind": "INSIDE", "object": "plate", "target": "dishwasher", "count": 1},
            {"kind": "SWITCHON", "object": "dishwasher", "count": 1},
        ],
        "golden_plan": [
            "walk to dishwasher",
            "open dishwasher",
            *fetch_and_put("wine glass", "dishwasher", "in"),
            *fetch_and_put("plate", "dishwasher", "in"),
            "close dishwasher",
            "switch on dishwasher",
            "done",
        ],
    },
    {
        "task_id": "wah_snacks_01",
        "task_type": "Prepare snacks",
        "profile": "wah",
        "instructions": ["Put one cupcake and one apple on the coffee table"],
        "scene": wah_scene(
            [
                pickup("cupcake_1", "cupcake", zone="kitchen"),
                pickup("apple_1", "apple", zone="kitchen"),
            ]
        ),
        "goal": [
            {"kind": "ON", "object": "cupcake", "target": "coffee table", "count": 1},
            {"kind": "ON", "object": "apple", "target": "coffee table", "count": 1},
        ],
        "golden_plan": [
            *fetch_and_put("cupcake", "coffee table", "on"),
            *fetch_and_put("apple", "coffee table", "on"),
            "done",
        ],
    },
    {
        "task_id": "wah_snacks_02",
        "task_type": "Prepare snacks",
        "profile": "wah",
        "instructions": ["Serve one wine on the coffee table"],
        "scene": wah_scene([pickup("wine_1", "wine", zone="kitchen")]),
        "goal": [{"kind": "ON", "object": "wine", "target": "coffee table", "count": 1}],
        "golden_plan": [*fetch_and_put("wine", "coffee table", "on"), "done"],
    },
]

# --- replanning demo -------------------------------------------------------------------

REPLAN_INSTRUCTION = "Take the apple out of the fridge and put it on the counter."

REPLAN_DATASET = [
    {
        "task_id": "alfred_replan_01",
        "task_type": "Pick & Place",
        "profile": "alfred",
        "instructions": [REPLAN_INSTRUCTION],
        "scene": alfred_scene(
            [{"id": "apple_1", "class": "apple", "properties": ["pickupable"], "inside": "fridge_1"}],
            agent_zone="kitchen",
        ),
        "goal": [{"kind": "ON", "object": "apple", "target": "counter top", "count": 1}],
    }
]

REPLAN_SCRIPT = {
    "peak_prob": 0.9,
    "plans": {
        REPLAN_INSTRUCTION: {
            "plan": [
                "find an apple",
                "pick up the apple",
                "find a counter top",
                "put down the apple",
                "done",
            ],
            "recovery": {
                "is not visible because it is in": [
                    "find a fridge",
                    "open the fridge",
                    "find an apple",
                    "pick up the apple",
                    "find a counter top",
                    "put down the apple",
                    "done",
                ]
            },
        }
    },
}

# --- in-context example pools -----------------------------------------------------------

POOL_ALFRED = [
    ("Put a spoon in the sink.", "Pick & Place",
     ["find a ladle", "pick up the ladle", "find a sink", "put down the ladle", "done"]),
    ("Move vase from the entertainment center to the coffee table.", "Pick & Place",
     ["find a vase", "pick up the vase", "find a coffee table", "put down the vase", "done"]),
    ("Move the newspaper in the living room to the couch.", "Pick & Place",
     ["find a newspaper", "pick up the newspaper", "find a sofa", "put down the newspaper", "done"]),
    ("Pick up a tennis racket and turn on a lamp.", "Examine in Light",
     ["find a tennis racket", "pick up the tennis racket", "find a desk lamp", "turn on the desk lamp", "done"]),
    ("Pick up a pillow and turn on a lamp.", "Examine in Light",
     ["find a pillow", "pick up the pillow", "find a desk lamp", "turn on the desk lamp", "done"]),
    ("Examine a credit card using the light from a floor lamp.", "Examine in Light",
     ["find a credit card", "pick up the credit card", "find a floor lamp", "turn on the floor lamp", "done"]),
    ("Put a pan with a spoon in it on the table.", "Stack & Place",
     ["find a spoon", "pick up the spoon", "find a pot", "put down the spoon", "pick up the pot",
      "find a dining table", "put down the pot", "done"]),
    ("Put a box with remote in it on the green couch.", "Stack & Place",
     ["find a remote control", "pick up the remote control", "find a box", "put down the remote control",
      "pick up the box", "find a sofa", "put down the box", "done"]),
    ("Place a box with a cell phone on a chair.", "Stack & Place",
     ["find a cell phone", "pick up the cell phone", "find a box", "put down the cell phone",
      "pick up the box", "find an arm chair", "put down the box", "done"]),
    ("Place a cold potato on the table.", "Cool & Place",
     ["find a potato", "pick up the potato", "find a fridge", "open the fridge", "put down the potato",
      "close the fridge", "open the fridge", "find a potato", "pick up the potato", "close the fridge",
      "find a counter top", "put down the potato", "done"]),
    ("Put the chilled bowl in the microwave.", "Cool & Place",
     ["find a cabinet", "open the cabinet", "find a bowl", "pick up the bowl", "close the cabinet",
      "find a fridge", "open the fridge", "put down the bowl", "close the fridge", "open the fridge",
      "find a bowl", "pick up the bowl", "close the fridge", "find a microwave", "open the microwave",
      "put down the bowl", "close the microwave", "done"]),
    ("Put the chilled sliced cabbage in the trash bin.", "Cool & Place",
     ["find a knife", "pick up the knife", "find a lettuce", "slice the lettuce", "find a fridge",
      "open the fridge", "put down the knife", "close the fridge", "find a lettuce", "pick up the lettuce",
      "find a fridge", "open the fridge", "put down the lettuce", "close the fridge", "open the fridge",
      "find a lettuce", "pick up the lettuce", "close the fridge", "find a garbage can",
      "put down the lettuce", "done"]),
    ("Place a heated plate on the round table.", "Heat & Place",
     ["find a plate", "pick up the plate", "find a microwave", "open the microwave", "put down the plate",
      "close the microwave", "turn on the microwave", "turn off the microwave", "open the microwave",
      "find a plate", "pick up the plate", "close the microwave", "find a dining table",
      "put down the plate", "done"]),
    ("Place a microwaved potato in the sink.", "Heat & Place",
     ["find a potato", "pick up the potato", "find a microwave", "open the microwave", "put down the potato",
      "close the microwave", "turn on the microwave", "turn off the microwave", "open the microwave",
      "find a potato", "pick up the potato", "close the microwave", "find a sink", "put down the potato",
      "done"]),
    ("Moving a bowl to the shelf.", "Heat & Place",
     ["find a cabinet", "open the cabinet", "find a cup", "pick up the cup", "close the cabinet",
      "find a microwave", "open the microwave", "put down the cup", "close the microwave",
      "turn on the microwave", "turn off the microwave", "open the microwave", "find a cup",
      "pick up the cup", "close the microwave", "find a shelf", "put down the cup", "done"]),
    ("Place a cleaned spatula on a dining table.", "Clean & Place",
     ["find a spatula", "pick up the spatula", "find a sink", "put down the spatula", "find a faucet",
      "turn on the faucet", "turn off the faucet", "find a spatula", "pick up the spatula",
      "find a dining table", "put down the spatula", "done"]),
    ("Place the rinsed off apple on the brown kitchen table.", "Clean & Place",
     ["find an apple", "pick up the apple", "find a sink", "put down the apple", "find a faucet",
      "turn on the faucet", "turn off the faucet", "find an apple", "pick up the apple",
      "find a dining table", "put down the apple", "done"]),
    ("Put a clean spatula on the counter.", "Clean & Place",
     ["find a spatula", "pick up the spatula", "find a sink", "put down the spatula", "find a faucet",
      "turn on the faucet", "turn off the faucet", "find a spatula", "pick up the spatula",
      "find a counter top", "put down the spatula", "done"]),
]

POOL_WAH = [
    ("Please put 1 cutlery fork, 1 water glass and 1 plate in the dishwasher and turn the dishwasher on",
     "Wash dishes",
     ["walk to dishwasher", "open dishwasher", "walk to cutlery fork", "grab cutlery fork",
      "walk to dishwasher", "put cutlery fork in dishwasher", "walk to water glass", "grab water glass",
      "walk to dishwasher", "put water glass in dishwasher", "walk to plate", "grab plate",
      "walk to dishwasher", "put plate in dishwasher", "close dishwasher", "switch on dishwasher", "done"]),
    ("store the pancake, the glass of wine, the cupcake and the glass of juice in the fridge",
     "Put groceries",
     ["walk to fridge", "open fridge", "walk to pancake", "grab pancake", "walk to fridge",
      "put pancake in fridge", "walk to wine", "grab wine", "walk to fridge", "put wine in fridge",
      "walk to cupcake", "grab cupcake", "walk to fridge", "put cupcake in fridge", "walk to juice",
      "grab juice", "walk to fridge", "put juice in fridge", "close fridge", "done"]),
    ("Take a pudding, an apple, a cupcake, and the juice and put them on the coffee table.",
     "Prepare snacks",
     ["walk to pudding", "grab pudding", "walk to coffee table", "put pudding on coffee table",
      "walk to apple", "grab apple", "walk to coffee table", "put apple on coffee table",
      "walk to cupcake", "grab cupcake", "walk to coffee table", "put cupcake on coffee table",
      "walk to juice", "grab juice", "walk to coffee table", "put juice on coffee table", "done"]),
    ("Find 1 coffee pot, 1 cupcake, 1 pudding and put on the kitchen table.",
     "Prepare a meal",
     ["walk to coffee pot", "grab coffee pot", "walk to kitchen table", "put coffee pot on kitchen table",
      "walk to cupcake", "grab cupcake", "walk to kitchen table", "put cupcake on kitchen table",
      "walk to pudding", "grab pudding", "walk to kitchen table", "put pudding on kitchen table", "done"]),
    ("I need a wine glass, water glass and a plate on the kitchen table",
     "Setup a dinner table",
     ["walk to wine glass", "grab wine glass", "walk to kitchen table", "put wine glass on kitchen table",
      "walk to water glass", "grab water glass", "walk to kitchen table", "put water glass on kitchen table",
      "walk to plate", "grab plate", "walk to kitchen table", "put plate on kitchen table", "done"]),
    ("Add a fork and a plate to the dishwasher and switch it on.",
     "Wash dishes",
     ["walk to dishwasher", "open dishwasher", "walk to cutlery fork", "grab cutlery fork",
      "walk to dishwasher", "put cutlery fork in dishwasher", "walk to plate", "grab plate",
      "walk to dishwasher", "put plate in dishwasher", "close dishwasher", "switch on dishwasher", "done"]),
    ("Could you put 1 apple, 1 pancake, 1 cupcake and 1 pudding in the fridge?",
     "Put groceries",
     ["walk to fridge", "open fridge", "walk to apple", "grab apple", "walk to fridge",
      "put apple in fridge", "walk to pancake", "grab pancake", "walk to fridge", "put pancake in fridge",
      "walk to cupcake", "grab cupcake", "walk to fridge", "put cupcake in fridge", "walk to pudding",
      "grab pudding", "walk to fridge", "put pudding in fridge", "close fridge", "done"]),
    ("Serve one wine on the coffe table",
     "Prepare snacks",
     ["walk to wine", "grab wine", "walk to coffee table", "put wine on coffee table", "done"]),
    ("Collect 1 apple, 1 coffee pot, and 1 juice and place them on the kitchen table",
     "Prepare a meal",
     ["walk to apple", "grab apple", "walk to kitchen table", "put apple on kitchen table",
      "walk to coffee pot", "grab coffee pot", "walk to kitchen table", "put coffee pot on kitchen table",
      "walk to juice", "grab juice", "walk to kitchen table", "put juice on kitchen table", "done"]),
    ("Put a plate, a fork and a water glass onto the kitchen table.",
     "Setup a dinner table",
     ["walk to plate", "grab plate", "walk to kitchen table", "put plate on kitchen table",
      "walk to cutlery fork", "grab cutlery fork", "walk to kitchen table",
      "put cutlery fork on kitchen table", "walk to water glass", "grab water glass",
      "walk to kitchen table", "put water glass on kitchen table", "done"]),
]

# --- replanning in-context examples -----------------------------------------------------

RINSED_APPLE = "Place the rinsed off apple on the brown kitchen table."
REPLAN_EXAMPLES = [
    {
        "instruction": RINSED_APPLE,
        "steps": [
            "find an apple", "pick up the apple", "find a sink", "put down the apple", "find a faucet",
            "turn on the faucet", "turn off the faucet", "find an apple", "pick up the apple",
            "find a dining table", "put down the apple (this action failed: put down failed)",
            "find an apple", "pick up the apple", "find a dining table", "put down the apple", "done",
        ],
    },
    {
        "instruction": RINSED_APPLE,
        "steps": [
            "find an apple", "pick up the apple", "find a sink", "put down the apple", "find a faucet",
            "turn on the faucet", "turn off the faucet", "find an apple", "find a dining table",
            "put down the apple (this action failed: Robot is not holding any object)",
            "find an apple", "pick up the apple", "find a dining table", "put down the apple", "done",
        ],
    },
    {
        "instruction": RINSED_APPLE,
        "steps": [
            "find an apple",
            "pick up the apple (this action failed: Apple is not visible because it is in Fridge)",
            "find a fridge", "open the fridge", "find an apple", "pick up the apple", "find a sink",
            "put down the apple", "find a faucet", "turn on the faucet", "turn off the faucet",
            "find an apple", "pick up the apple", "find a dining table", "put down the apple", "done",
        ],
    },
]

ALLOWLIST_HEADER = """\
# Representative allow-list of skill surfaces for the bundled desk scenes.
# One surface per line; '#' starts a comment.
"""


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    dataset = ALFRED_TASKS + WAH_TASKS

    def dump(name, payload):
        with open(os.path.join(OUT, name), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        print("wrote", name)

    dump("desk_dataset.json", dataset)
    dump("replan_dataset.json", REPLAN_DATASET)
    dump("replan_script.json", REPLAN_SCRIPT)

    golden = {"peak_prob": 0.9, "plans": {}}
    for task in dataset:
        for instruction in task["instructions"]:
            golden["plans"][instruction] = list(task["golden_plan"])
    dump("golden_script.json", golden)

    dump(
        "pool_alfred.json",
        [{"instruction": i, "task_type": t, "plan": p} for i, t, p in POOL_ALFRED],
    )
    dump(
        "pool_wah.json",
        [{"instruction": i, "task_type": t, "plan": p} for i, t, p in POOL_WAH],
    )
    dump("replanning_examples.json", REPLAN_EXAMPLES)

    surfaces = sorted({s for task in ALFRED_TASKS for s in task["golden_plan"]})
    with open(os.path.join(OUT, "alfred_allowlist.txt"), "w", encoding="utf-8") as fh:
        fh.write(ALLOWLIST_HEADER)
        fh.write("\n".join(surfaces))
        fh.write("\n")
    print("wrote alfred_allowlist.txt")


if __name__ == "__main__":
    main()
