"""Norms as ordered guarded rewrite rules over transitions.

A norm is a list of rules ``guard -> effect``. For each transition of a
world the first rule whose guard holds on (source state, action) fires:

* ``forbid`` drops the transition;
* ``rewrite`` maps the destination state's variables through arithmetic
  expressions and redirects the transition to the resulting state,
  creating that state when no existing one has the assignment.

Transitions no rule matches pass through untouched. Applying a list of
norms folds left to right, so order matters and is recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence, Union

from normalign.errors import DomainOverflow, FormatError, SchemaMismatch
from normalign.expr import Expr, bind, compile_expr
from normalign.world import State, Transition, World, canonical_state_id, make_world


@dataclass(frozen=True)
class Forbid:
    def to_raw(self):
        return "forbid"


@dataclass(frozen=True)
class Rewrite:
    assignments: tuple  # ((variable, Expr), ...) sorted by variable

    @classmethod
    def of(cls, mapping: Mapping[str, Union[str, Expr]]) -> "Rewrite":
        if not mapping:
            raise FormatError("rewrite needs at least one assignment")
        return cls(tuple(sorted(
            (var, e if isinstance(e, Expr) else compile_expr(e, kind="arith"))
            for var, e in mapping.items())))

    def to_raw(self):
        return {"rewrite": {var: str(e) for var, e in self.assignments}}


Effect = Union[Forbid, Rewrite]


@dataclass(frozen=True)
class NormRule:
    guard: Expr
    effect: Effect

    @classmethod
    def of(cls, guard: Union[str, bool], effect) -> "NormRule":
        return cls(compile_expr(guard, kind="guard"), parse_effect(effect))

    def to_raw(self) -> dict:
        return {"guard": str(self.guard), "effect": self.effect.to_raw()}


@dataclass(frozen=True)
class Norm:
    id: str
    rules: tuple
    description: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.rules:
            raise FormatError(f"norm {self.id!r} has no rules")

    def to_raw(self) -> dict:
        out = {"id": self.id, "rules": [r.to_raw() for r in self.rules]}
        if self.description:
            out["description"] = self.description
        return out


def parse_effect(raw) -> Effect:
    if isinstance(raw, (Forbid, Rewrite)):
        return raw
    if raw == "forbid":
        return Forbid()
    if isinstance(raw, Mapping) and set(raw) == {"rewrite"} and isinstance(raw["rewrite"], Mapping):
        return Rewrite.of(raw["rewrite"])
    raise FormatError(f"effect must be \"forbid\" or {{\"rewrite\": {{...}}}}, got {raw!r}")


def parse_norm(raw: Mapping) -> Norm:
    if not isinstance(raw, Mapping) or "id" not in raw:
        raise FormatError("a norm must be an object with an 'id'")
    unknown = set(raw) - {"id", "rules", "description"}
    if unknown:
        raise FormatError(f"norm {raw['id']!r}: unknown keys {sorted(unknown)}")
    rules = raw.get("rules")
    if not isinstance(rules, list) or not rules:
        raise FormatError(f"norm {raw['id']!r}: 'rules' must be a nonempty list")
    parsed = []
    for i, rule in enumerate(rules):
        if not isinstance(rule, Mapping) or set(rule) != {"guard", "effect"}:
            raise FormatError(f"norm {raw['id']!r} rule {i}: needs exactly 'guard' and 'effect'")
        parsed.append(NormRule.of(rule["guard"], rule["effect"]))
    return Norm(raw["id"], tuple(parsed), raw.get("description"))


def bind_norm(norm: Norm, world: World) -> None:
    """Raise :class:`SchemaMismatch` unless every rule fits the world's schema."""
    variables = world.variables
    for i, rule in enumerate(norm.rules):
        where = f"norm {norm.id!r} rule {i}"
        bind(rule.guard, variables, world.actions, where)
        if isinstance(rule.effect, Rewrite):
            for var, e in rule.effect.assignments:
                if var not in variables:
                    raise SchemaMismatch(f"{where}: rewrite targets unknown variable {var!r}")
                bind(e, variables, None, where)


@dataclass(frozen=True)
class NormativeWorld:
    """The world obtained by applying ``norms_applied`` (in order) to ``base``."""

    base: World
    norms_applied: tuple
    world: World
    transitions_forbidden: int = 0
    transitions_rewritten: int = 0

    @property
    def states_added(self) -> tuple:
        base_ids = set(self.base.state_index)
        return tuple(s.id for s in self.world.states if s.id not in base_ids)

    @property
    def states_removed(self) -> tuple:
        ids = set(self.world.state_index)
        return tuple(s.id for s in self.base.states if s.id not in ids)

    def summary(self) -> dict:
        return {
            "norms_applied": list(self.norms_applied),
            "states_added": list(self.states_added),
            "states_removed": list(self.states_removed),
            "transitions_forbidden": self.transitions_forbidden,
            "transitions_rewritten": self.transitions_rewritten,
            "transitions_before": len(self.base.transitions),
            "transitions_after": len(self.world.transitions),
        }


def _first_match(norm: Norm, env: Mapping):
    for rule in norm.rules:
        if rule.guard(env):
            return rule
    return None


def _fresh_id(assignment: Mapping, taken: Mapping) -> str:
    base = canonical_state_id(assignment)
    sid, n = base, 1
    while sid in taken:
        n += 1
        sid = f"{base}#{n}"
    return sid


def _rewrite_target(world: World, dst: State, effect: Rewrite, fresh: dict) -> str:
    env = dst.env
    variables = world.variables
    new = dict(env)
    for var, e in effect.assignments:
        value = e(env)
        try:
            new[var] = variables[var].coerce(value)
        except ValueError as exc:
            raise DomainOverflow(f"rewrite of {dst.id!r}: {exc}") from None
    key = tuple(sorted(new.items()))
    existing = world.assignment_index.get(key)
    if existing is not None:
        return existing
    if key not in fresh:
        taken = {**world.state_index, **{s.id: s for s in fresh.values()}}
        fresh[key] = State(_fresh_id(new, taken), key)
    return fresh[key].id


def apply_norm(world: Union[World, NormativeWorld], norm: Norm) -> NormativeWorld:
    """Apply one norm to every transition of ``world``.

    Probabilities survive rewriting; transitions of one (source, action)
    group that collapse onto the same destination have their probabilities
    summed.
    """
    if isinstance(world, NormativeWorld):
        return _chain(world, norm)
    bind_norm(norm, world)

    fresh: dict = {}
    kept: dict = {}
    n_forbidden = n_rewritten = 0
    for t in world.transitions:
        env = world.state(t.src).env
        env["action"] = t.action
        rule = _first_match(norm, env)
        if rule is None:
            new_t = t
        elif isinstance(rule.effect, Forbid):
            n_forbidden += 1
            continue
        else:
            dst = _rewrite_target(world, world.state(t.dst), rule.effect, fresh)
            if dst != t.dst:
                n_rewritten += 1
            new_t = replace(t, dst=dst)
        prev = kept.get(new_t.key)
        if prev is not None:
            prob = None if prev.prob is None else prev.prob + new_t.prob
            new_t = replace(new_t, prob=prob)
        kept[new_t.key] = new_t

    # guards see only (source, action), so forbid always drops whole
    # probability groups and the survivors still sum to 1
    transitions = list(kept.values())
    new_world = make_world(world.schema, list(world.states) + list(fresh.values()),
                           world.actions, transitions, world.initial_states)
    return NormativeWorld(world, (norm.id,), new_world, n_forbidden, n_rewritten)


def _chain(nw: NormativeWorld, norm: Norm) -> NormativeWorld:
    step = apply_norm(nw.world, norm)
    return NormativeWorld(
        nw.base,
        nw.norms_applied + step.norms_applied,
        step.world,
        nw.transitions_forbidden + step.transitions_forbidden,
        nw.transitions_rewritten + step.transitions_rewritten,
    )


def apply_norm_set(world: World, norms: Sequence[Norm]) -> NormativeWorld:
    """Fold :func:`apply_norm` over ``norms`` left to right."""
    result = NormativeWorld(world, (), world)
    for norm in norms:
        result = _chain(result, norm)
    return result


def identity_norm(id: str = "identity") -> Norm:
    return Norm(id, (NormRule.of("false", "forbid"),))


def norms_by_id(norms: Iterable[Norm]) -> dict:
    return {n.id: n for n in norms}
