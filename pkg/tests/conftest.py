import sys
from pathlib import Path

import pytest

from normalign import io
from normalign.fixtures import fixture_path

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def driving():
    return io.load(fixture_path("driving"))


@pytest.fixture
def taxation():
    return io.load(fixture_path("taxation"))


@pytest.fixture
def three_state_world():
    """The three transitions exactly as listed for the driving example."""
    from normalign.world import validate_world

    return validate_world({
        "schema": {"risk": {"type": "int", "min": 0, "max": 2}},
        "states": [
            {"id": "Safe", "vars": {"risk": 0}},
            {"id": "Unsafe", "vars": {"risk": 1}},
            {"id": "Accident", "vars": {"risk": 2}},
        ],
        "actions": ["DriveSlow", "DriveFast"],
        "transitions": [
            {"from": "Safe", "action": "DriveSlow", "to": "Safe"},
            {"from": "Safe", "action": "DriveFast", "to": "Unsafe"},
            {"from": "Unsafe", "action": "DriveFast", "to": "Accident"},
        ],
        "initial_states": ["Safe"],
    })
