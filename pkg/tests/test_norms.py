from decimal import Decimal

import pytest

from normalign.errors import DomainOverflow, SchemaMismatch
from normalign.norms import (
    Norm,
    NormRule,
    apply_norm,
    apply_norm_set,
    identity_norm,
    parse_norm,
)
from normalign.world import validate_world


def norm(id, *rules):
    return Norm(id, tuple(NormRule.of(g, e) for g, e in rules))


def keys(world):
    return {t.key for t in world.transitions}


def test_always_drive_slow(driving):
    nw = apply_norm(driving.world, driving.norm("always_drive_slow"))
    assert {t.action for t in nw.world.transitions} == {"DriveSlow"}
    assert nw.transitions_forbidden == 3
    assert nw.states_added == ()


def test_tax_rewrite_hits_m_plus_s_times_point_eight():
    world = validate_world({
        "schema": {"M": "decimal", "S": "decimal"},
        "states": [{"id": "poor", "vars": {"M": 100, "S": 50}},
                   {"id": "paid", "vars": {"M": 150, "S": 50}}],
        "actions": ["pay_salary"],
        "transitions": [{"from": "poor", "action": "pay_salary", "to": "paid"}],
    })
    tax = norm("tax", ("action == 'pay_salary'", {"rewrite": {"M": "M - 0.2 * S"}}))
    nw = apply_norm(world, tax)
    (t,) = nw.world.transitions
    assert nw.world.state(t.dst)["M"] == Decimal("140")
    assert t.dst == "M=140,S=50"
    assert nw.states_added == ("M=140,S=50",)


def test_constant_false_guard_is_identity(driving, taxation):
    for wf in (driving, taxation):
        nw = apply_norm(wf.world, identity_norm())
        assert nw.world == wf.world


def test_first_matching_rule_wins(driving):
    n = norm("n", ("action == 'DriveFast'", "forbid"), ("true", {"rewrite": {"risk": "0"}}))
    nw = apply_norm(driving.world, n)
    # DriveFast gone; DriveSlow rewritten to Safe (already Safe)
    assert keys(nw.world) == {("Safe", "DriveSlow", "Safe")}
    n2 = norm("n2", ("true", {"rewrite": {"risk": "0"}}), ("action == 'DriveFast'", "forbid"))
    assert keys(apply_norm(driving.world, n2).world) == {
        ("Safe", "DriveSlow", "Safe"), ("Safe", "DriveFast", "Safe"), ("Unsafe", "DriveFast", "Safe")}


def test_rewrite_onto_existing_state_merges_probabilities(driving):
    # Safe -DriveFast-> {Unsafe 0.8, Safe 0.2} both land on Safe
    n = norm("calm", ("action == 'DriveFast'", {"rewrite": {"risk": "0"}}))
    nw = apply_norm(driving.world, n)
    fast = [t for t in nw.world.transitions if t.src == "Safe" and t.action == "DriveFast"]
    assert len(fast) == 1 and fast[0].dst == "Safe"
    assert fast[0].prob == pytest.approx(1.0, abs=1e-12)


def test_forbid_whole_group(driving):
    n = norm("no_speeding_when_safe", ("action == 'DriveFast' and risk == 0", "forbid"))
    nw = apply_norm(driving.world, n)
    assert not any(t.src == "Safe" and t.action == "DriveFast" for t in nw.world.transitions)
    assert nw.transitions_forbidden == 2


def test_forbid_only_never_creates_states(driving):
    nw = apply_norm(driving.world, driving.norm("drive_fast_when_safe"))
    assert {s.id for s in nw.world.states} <= {s.id for s in driving.world.states}


def test_rewrite_fixed_point_keeps_state_id(taxation):
    nw = apply_norm(taxation.world, norm("noop", ("true", {"rewrite": {"M": "M"}})))
    assert nw.world == taxation.world
    assert nw.transitions_rewritten == 0


def test_schema_mismatch_variable(driving):
    with pytest.raises(SchemaMismatch):
        apply_norm(driving.world, norm("bad", ("speed > 3", "forbid")))
    with pytest.raises(SchemaMismatch):
        apply_norm(driving.world, norm("bad", ("true", {"rewrite": {"speed": "1"}})))
    with pytest.raises(SchemaMismatch):
        apply_norm(driving.world, norm("bad", ("true", {"rewrite": {"risk": "speed"}})))


def test_schema_mismatch_action(driving):
    with pytest.raises(SchemaMismatch):
        apply_norm(driving.world, norm("bad", ("action == 'Fly'", "forbid")))


def test_domain_overflow(driving):
    with pytest.raises(DomainOverflow):
        apply_norm(driving.world, norm("worse", ("true", {"rewrite": {"risk": "risk + 1"}})))


def test_int_variable_must_stay_integral(driving):
    with pytest.raises(DomainOverflow):
        apply_norm(driving.world, norm("frac", ("true", {"rewrite": {"risk": "risk * 0.5"}})))


def test_decimal_rewrite_quantised(taxation):
    nw = apply_norm(taxation.world, norm("third", ("action == 'spend'", {"rewrite": {"M": "M * 0.3333333"}})))
    values = {nw.world.state(t.dst)["M"] for t in nw.world.transitions if t.action == "spend"}
    assert Decimal("16.666665") in values


def test_empty_norm_set_is_identity(driving):
    nw = apply_norm_set(driving.world, [])
    assert nw.world == driving.world and nw.norms_applied == ()


def test_singleton_fold_equals_single_application(driving):
    n = driving.norm("always_drive_slow")
    assert apply_norm_set(driving.world, [n]).world == apply_norm(driving.world, n).world


def test_fold_records_order(taxation):
    a, b = taxation.norm("income_tax"), taxation.norm("spending_fee")
    assert apply_norm_set(taxation.world, [b, a]).norms_applied == ("spending_fee", "income_tax")


def test_two_rewrites_in_both_orders(taxation):
    """Hand-computed composition of M := M - 0.2*S and M := 2*M on salary transitions."""
    tax = taxation.norm("income_tax")
    double = norm("double", ("action == 'pay_salary'", {"rewrite": {"M": "2 * M"}}))
    taxation_big = taxation.world  # M <= 1000 holds for both orders below
    tax_then_double = apply_norm_set(taxation_big, [tax, double]).world
    double_then_tax = apply_norm_set(taxation_big, [double, tax]).world

    def salary_targets(world):
        return {t.src: world.state(t.dst)["M"] for t in world.transitions if t.action == "pay_salary"}

    # source M in {0, 50, 100, 150}, S = 50
    # tax then double: 2 * ((M + 50) - 10) = 2M + 80
    assert salary_targets(tax_then_double) == {"M0": 80, "M50": 180, "M100": 280, "M150": 380}
    # double then tax: 2 * (M + 50) - 10 = 2M + 90
    assert salary_targets(double_then_tax) == {"M0": 90, "M50": 190, "M100": 290, "M150": 390}


def test_parse_norm_round_trip(driving):
    for n in driving.norms:
        again = parse_norm(n.to_raw())
        assert again.to_raw() == n.to_raw()


def test_norm_needs_rules():
    from normalign.errors import FormatError

    with pytest.raises(FormatError):
        parse_norm({"id": "x", "rules": []})
    with pytest.raises(FormatError):
        parse_norm({"id": "x", "rules": [{"guard": "true", "effect": "obliterate"}]})
