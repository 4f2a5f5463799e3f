import copy
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from normalign import io
from normalign.alignment import (
    AlignmentRequest,
    Weighting,
    aggregated_alignment,
    degree_of_alignment,
    relative_alignment,
)
from normalign.errors import NoPaths
from normalign.norms import identity_norm
from normalign.preferences import parse_catalog
from normalign.world import enumerate_paths

from oracle import random_rules, random_world

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def build(plain):
    wf = io.build(plain.raw())
    return wf, tuple(wf.norms)


def with_probs(plain, rng):
    raw = plain.raw()
    groups = {}
    for t in raw["transitions"]:
        groups.setdefault((t["from"], t["action"]), []).append(t)
    for members in groups.values():
        weights = [rng.randint(1, 5) for _ in members]
        total = sum(weights)
        for t, w in zip(members, weights):
            t["prob"] = float(Fraction(w, total))
    return io.build(raw)


def align(wf, norms, horizon, **kw):
    return aggregated_alignment(AlignmentRequest(wf.world, wf.catalog, norms, ("v",), **kw, horizon=horizon))


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_degree_bounds(seed):
    plain = random_world(random.Random(seed))
    wf, norms = build(plain)
    try:
        r = align(wf, norms, plain.horizon)
    except NoPaths:
        return
    assert -1 <= r.degree <= 1
    assert all(-1 <= p.mean <= 1 for p in r.paths)
    assert all(0 < p.length <= plain.horizon for p in enumerate_paths(r.normative.world, plain.horizon))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_identity_norm_matches_base(seed):
    plain = random_world(random.Random(seed), with_norm=False)
    wf, _ = build(plain)
    try:
        bare = align(wf, (), plain.horizon)
    except NoPaths:
        with pytest.raises(NoPaths):
            align(wf, (identity_norm(),), plain.horizon)
        return
    assert align(wf, (identity_norm(),), plain.horizon).degree == bare.degree


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_telescoping_per_path(seed):
    plain = random_world(random.Random(seed))
    wf, norms = build(plain)
    try:
        r = align(wf, norms, plain.horizon)
    except NoPaths:
        return
    for p in r.paths:
        first, last = p.path.states[0], p.path.states[-1]
        expected = (plain.utility[int(last[1:])] - plain.utility[int(first[1:])]) / p.path.length
        assert p.mean == pytest.approx(float(expected), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(2, 4))
def test_linearity_over_value_sets(seed, k):
    rng = random.Random(seed)
    plain = random_world(rng)
    raw = plain.raw()
    values = {f"v{j}": {"kind": "utility", "utilities": {f"s{i}": rng.randint(0, 10) / 10 for i in range(plain.n)}}
              for j in range(k)}
    raw["values"] = values
    wf = io.build(raw)
    ids = tuple(values)

    def go(vs):
        return aggregated_alignment(AlignmentRequest(wf.world, wf.catalog, wf.norms, vs, horizon=plain.horizon))
    try:
        singles = [go((v,)).degree for v in ids]
    except NoPaths:
        return
    assert go(ids).degree == pytest.approx(sum(singles) / k, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_relative_alignment_antisymmetric(seed):
    rng = random.Random(seed)
    plain = random_world(rng)
    plain_b = copy.copy(plain)
    plain_b.rules = random_rules(rng, plain.n, plain.actions)
    wf, n1 = build(plain)
    _, n2 = build(plain_b)
    n1 = n1 or (identity_norm("a"),)
    n2 = n2 or (identity_norm("b"),)

    def rel(first, second):
        return relative_alignment(AlignmentRequest(wf.world, wf.catalog, (first, second), ("v",),
                                                   horizon=plain.horizon))
    try:
        fwd, back = rel(n1, n2), rel(n2, n1)
    except NoPaths:
        return
    assert fwd == -back
    assert rel(n1, n1) == 0


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_probability_weights_sum_to_one(seed):
    rng = random.Random(seed)
    plain = random_world(rng)
    wf = with_probs(plain, rng)
    try:
        r = align(wf, wf.norms, plain.horizon, weighting=Weighting.PROBABILITY)
    except NoPaths:
        return
    assert r.weights_total == pytest.approx(1, abs=1e-9)
    assert all(p.weight > 0 for p in r.paths)
    assert r.degree == pytest.approx(sum(p.mean * p.weight for p in r.paths), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_oracle_equivalence(seed):
    plain = random_world(random.Random(seed))
    wf, norms = build(plain)
    expected = plain.degree()
    if expected is None:
        with pytest.raises(NoPaths):
            align(wf, norms, plain.horizon)
        return
    r = degree_of_alignment(AlignmentRequest(wf.world, wf.catalog, norms, ("v",), horizon=plain.horizon))
    assert r.path_count == len(plain.paths())
    assert abs(r.degree - float(expected)) <= 1e-9


def test_enumeration_deterministic(driving):
    a = [str(p) for p in enumerate_paths(driving.world, 4)]
    b = [str(p) for p in enumerate_paths(driving.world, 4)]
    assert a == b
