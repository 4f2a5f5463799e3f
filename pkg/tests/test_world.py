import random
from itertools import product

import pytest

from normalign.errors import (
    BadProbabilityGroup,
    DanglingTransition,
    DuplicateState,
    EmptyInitialSet,
    NoPaths,
    SchemaError,
    UnknownState,
)
from normalign.world import (
    Path,
    Transition,
    DuplicateTransition,
    enumerate_paths,
    successors,
    validate_world,
)

from oracle import random_world


def raw_world(transitions, states=("s", "t"), initial=None):
    raw = {
        "schema": {"x": "int"},
        "states": [{"id": s, "vars": {"x": i}} for i, s in enumerate(states)],
        "actions": ["a", "b"],
        "transitions": transitions,
    }
    if initial is not None:
        raw["initial_states"] = initial
    return raw


def test_driving_fixture_is_valid(driving):
    assert len(driving.world.states) == 3
    assert len(driving.world.actions) == 2
    assert driving.world.initial_states == ("Accident", "Safe", "Unsafe")


def test_dangling_state():
    with pytest.raises(DanglingTransition):
        validate_world(raw_world([{"from": "s", "action": "a", "to": "X"}]))


def test_dangling_action():
    with pytest.raises(DanglingTransition):
        validate_world(raw_world([{"from": "s", "action": "zz", "to": "t"}]))


def test_probabilities_must_sum_to_one():
    with pytest.raises(BadProbabilityGroup):
        validate_world(raw_world([
            {"from": "s", "action": "a", "to": "s", "prob": 0.9},
            {"from": "s", "action": "a", "to": "t", "prob": 0.2},
        ]))


def test_probabilities_all_or_none():
    with pytest.raises(BadProbabilityGroup):
        validate_world(raw_world([
            {"from": "s", "action": "a", "to": "s", "prob": 1.0},
            {"from": "s", "action": "a", "to": "t"},
        ]))


def test_probability_groups_are_per_action():
    world = validate_world(raw_world([
        {"from": "s", "action": "a", "to": "s", "prob": 0.25},
        {"from": "s", "action": "a", "to": "t", "prob": 0.75},
        {"from": "s", "action": "b", "to": "t"},
    ]))
    assert len(world.transitions) == 3


def test_duplicate_state_id():
    raw = raw_world([])
    raw["states"].append({"id": "s", "vars": {"x": 7}})
    with pytest.raises(DuplicateState):
        validate_world(raw)


def test_duplicate_assignment():
    raw = raw_world([])
    raw["states"].append({"id": "u", "vars": {"x": 0}})
    with pytest.raises(DuplicateState):
        validate_world(raw)


def test_duplicate_transition():
    t = {"from": "s", "action": "a", "to": "t"}
    with pytest.raises(DuplicateTransition):
        validate_world(raw_world([t, dict(t)]))


def test_empty_initial_set():
    with pytest.raises(EmptyInitialSet):
        validate_world(raw_world([], initial=[]))


def test_unknown_initial_state():
    with pytest.raises(UnknownState):
        validate_world(raw_world([], initial=["nope"]))


def test_schema_must_be_uniform():
    raw = raw_world([])
    raw["states"][0]["vars"] = {"y": 1}
    with pytest.raises(SchemaError):
        validate_world(raw)


def test_bounds_checked_at_load():
    raw = raw_world([])
    raw["schema"] = {"x": {"type": "int", "min": 0, "max": 0}}
    with pytest.raises(SchemaError):
        validate_world(raw)


def test_initial_defaults_to_all_states():
    world = validate_world(raw_world([]))
    assert world.initial_states == ("s", "t")


def test_successors_three_state_example(three_state_world):
    out = successors(three_state_world, "Safe")
    assert {str(t) for t in out} == {"Safe -DriveSlow-> Safe", "Safe -DriveFast-> Unsafe"}
    assert [str(t) for t in out] == ["Safe -DriveFast-> Unsafe", "Safe -DriveSlow-> Safe"]


def test_successors_dead_end(three_state_world):
    assert successors(three_state_world, "Accident") == []


def test_successors_action_filter(three_state_world):
    assert [str(t) for t in successors(three_state_world, "Safe", "DriveSlow")] == ["Safe -DriveSlow-> Safe"]


def test_successors_unknown_state(three_state_world):
    with pytest.raises(UnknownState):
        successors(three_state_world, "Nowhere")


def test_successors_match_naive_scan():
    from normalign import io

    rng = random.Random(11)
    for _ in range(50):
        plain = random_world(rng, max_states=6, with_norm=False)
        world = io.build(plain.raw()).world
        for i, a in product(range(plain.n), (None,) + plain.actions):
            expected = sorted((f"s{s}", act, f"s{d}") for s, act, d in plain.transitions
                              if s == i and (a is None or act == a))
            assert [t.key for t in successors(world, f"s{i}", a)] == expected


def test_enumerate_always_drive_slow(three_state_world):
    from normalign.world import make_world

    slow_only = make_world(three_state_world.schema, three_state_world.states, three_state_world.actions,
                           [t for t in three_state_world.transitions if t.action == "DriveSlow"], ["Safe"])
    paths = enumerate_paths(slow_only, 3)
    assert len(paths) == 1
    assert paths.paths[0].states == ("Safe", "Safe", "Safe", "Safe")


def test_enumerate_dead_end_truncation():
    world = validate_world(raw_world([{"from": "s", "action": "a", "to": "t"}], initial=["s"]))
    paths = enumerate_paths(world, 5)
    assert [p.length for p in paths] == [1]


def test_enumerate_no_paths():
    world = validate_world(raw_world([{"from": "s", "action": "a", "to": "t"}], initial=["t"]))
    with pytest.raises(NoPaths):
        enumerate_paths(world, 3)


@pytest.mark.parametrize("horizon", [0, -1, 1.5, True])
def test_enumerate_rejects_bad_horizon(three_state_world, horizon):
    with pytest.raises(ValueError):
        enumerate_paths(three_state_world, horizon)


def test_enumerate_matches_recursive_oracle():
    from normalign import io

    rng = random.Random(5)
    checked = 0
    for _ in range(300):
        plain = random_world(rng, max_states=5, max_horizon=4, with_norm=False)
        world = io.build(plain.raw()).world
        expected = sorted(tuple((f"s{s}", a, f"s{d}") for s, a, d in p) for p in plain.paths())
        if not expected:
            with pytest.raises(NoPaths):
                enumerate_paths(world, plain.horizon)
            continue
        got = [tuple(t.key for t in p.steps) for p in enumerate_paths(world, plain.horizon)]
        # the engine's order is already lexicographic
        assert got == expected
        checked += 1
    assert checked > 100


def test_cycles_unrolled_to_horizon():
    world = validate_world(raw_world([
        {"from": "s", "action": "a", "to": "t"},
        {"from": "t", "action": "a", "to": "s"},
    ], initial=["s"]))
    (path,) = enumerate_paths(world, 4)
    assert path.states == ("s", "t", "s", "t", "s")


def test_path_chaining_enforced():
    with pytest.raises(ValueError):
        Path((Transition("s", "a", "t"), Transition("s", "a", "t")))
    with pytest.raises(ValueError):
        Path(())
