"""Value specifications, agents and the revealed preference between states.

A value is specified per agent in one of three ways:

``UtilityMap``
    utility in [0, 1] per state; preference is ``u(s') - u(s)``.
``PairwiseTable``
    explicit preference in [-1, 1] per ordered pair; the table must be
    antisymmetric with a zero diagonal, and a missing pair is filled in
    from its mirror.
``PredicateSpec``
    a boolean formula over state variables with optional per-state
    satisfaction probabilities; preference is ``P(s' |= phi) - P(s |= phi)``.

Positive preference means the second state is the better one, so a path
that keeps moving to better states scores positively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from normalign.errors import FormatError, MissingPreference, SchemaMismatch, SpecError
from normalign.expr import Expr, bind, compile_expr
from normalign.world import State, World


def to_fraction(raw, where: str = "") -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (int, float, Decimal, Fraction)):
        raise FormatError(f"{where}: expected a number, got {raw!r}")
    if isinstance(raw, float):
        raw = Decimal(repr(raw))
    return Fraction(raw)


def _num(x: Fraction):
    """Serialise an exact number as a JSON-friendly int or float."""
    return int(x) if x.denominator == 1 else float(x)


@dataclass(frozen=True)
class UtilityMap:
    utilities: Mapping[str, Fraction]

    kind = "utility"

    def exact(self, s: State, s_next: State) -> Fraction:
        try:
            delta = self.utilities[s_next.id] - self.utilities[s.id]
        except KeyError as exc:
            raise MissingPreference(f"no utility for state {exc.args[0]!r}") from None
        return max(Fraction(-1), min(Fraction(1), delta))

    def problems(self):
        for sid, u in sorted(self.utilities.items()):
            if not 0 <= u <= 1:
                yield "RangeViolation", sid, f"utility {float(u)} outside [0, 1]"

    def state_refs(self):
        return set(self.utilities)

    def to_raw(self):
        return {"kind": self.kind, "utilities": {k: _num(v) for k, v in sorted(self.utilities.items())}}


@dataclass(frozen=True)
class PairwiseTable:
    table: Mapping[tuple, Fraction]

    kind = "pairwise"

    def exact(self, s: State, s_next: State) -> Fraction:
        key = (s.id, s_next.id)
        if key in self.table:
            return self.table[key]
        if (s_next.id, s.id) in self.table:
            return -self.table[(s_next.id, s.id)]
        if s.id == s_next.id:
            return Fraction(0)
        raise MissingPreference(f"no preference for pair ({s.id!r}, {s_next.id!r})")

    def problems(self):
        for (a, b), v in sorted(self.table.items()):
            where = f"{a}->{b}"
            if not -1 <= v <= 1:
                yield "RangeViolation", where, f"preference {float(v)} outside [-1, 1]"
            if a == b and v != 0:
                yield "DiagonalViolation", where, f"self-preference must be 0, got {float(v)}"
            mirror = self.table.get((b, a))
            if a < b and mirror is not None and mirror != -v:
                yield ("AntisymmetryViolation", where,
                       f"table({a},{b}) = {float(v)} but table({b},{a}) = {float(mirror)}")

    def state_refs(self):
        return {sid for pair in self.table for sid in pair}

    def to_raw(self):
        return {"kind": self.kind,
                "table": [[a, b, _num(v)] for (a, b), v in sorted(self.table.items())]}


@dataclass(frozen=True)
class PredicateSpec:
    formula: Expr
    satisfaction: Mapping[str, Fraction] = field(default_factory=dict)

    kind = "predicate"

    def probability(self, s: State) -> Fraction:
        if s.id in self.satisfaction:
            return self.satisfaction[s.id]
        holds = self.formula(s.env)
        if not isinstance(holds, bool):
            raise SpecError(f"formula {str(self.formula)!r} is not boolean")
        return Fraction(int(holds))

    def exact(self, s: State, s_next: State) -> Fraction:
        return self.probability(s_next) - self.probability(s)

    def problems(self):
        for sid, p in sorted(self.satisfaction.items()):
            if not 0 <= p <= 1:
                yield "RangeViolation", sid, f"satisfaction probability {float(p)} outside [0, 1]"

    def state_refs(self):
        return set(self.satisfaction)

    def to_raw(self):
        out = {"kind": self.kind, "formula": str(self.formula)}
        if self.satisfaction:
            out["satisfaction"] = {k: _num(v) for k, v in sorted(self.satisfaction.items())}
        return out


ValueSpec = Union[UtilityMap, PairwiseTable, PredicateSpec]


def parse_spec(raw: Mapping, where: str) -> ValueSpec:
    if not isinstance(raw, Mapping) or "kind" not in raw:
        raise FormatError(f"{where}: a value spec needs a 'kind'")
    kind = raw["kind"]
    if kind == "utility":
        _only(raw, {"kind", "utilities"}, where)
        utilities = raw.get("utilities")
        if not isinstance(utilities, Mapping):
            raise FormatError(f"{where}: 'utilities' must map state ids to numbers")
        return UtilityMap({k: to_fraction(v, f"{where}.{k}") for k, v in utilities.items()})
    if kind == "pairwise":
        _only(raw, {"kind", "table"}, where)
        entries = raw.get("table")
        if not isinstance(entries, list):
            raise FormatError(f"{where}: 'table' must be a list of [state, state, preference]")
        table = {}
        for i, entry in enumerate(entries):
            if not isinstance(entry, list) or len(entry) != 3:
                raise FormatError(f"{where}.table[{i}]: expected [state, state, preference]")
            a, b, v = entry
            if (a, b) in table:
                raise FormatError(f"{where}.table[{i}]: pair ({a}, {b}) listed twice")
            table[(a, b)] = to_fraction(v, f"{where}.table[{i}]")
        return PairwiseTable(table)
    if kind == "predicate":
        _only(raw, {"kind", "formula", "satisfaction"}, where)
        if "formula" not in raw:
            raise FormatError(f"{where}: predicate spec needs a 'formula'")
        sat = raw.get("satisfaction", {})
        if not isinstance(sat, Mapping):
            raise FormatError(f"{where}: 'satisfaction' must map state ids to probabilities")
        return PredicateSpec(compile_expr(raw["formula"], kind="formula"),
                             {k: to_fraction(v, f"{where}.{k}") for k, v in sat.items()})
    raise FormatError(f"{where}: unknown value kind {kind!r}")


def _only(raw: Mapping, keys: set, where: str) -> None:
    unknown = set(raw) - keys
    if unknown:
        raise FormatError(f"{where}: unknown keys {sorted(unknown)}")


@dataclass(frozen=True)
class Agent:
    id: str
    bindings: Mapping[str, ValueSpec]
    overrides: frozenset = field(default=frozenset(), compare=False)

    def spec(self, value: str) -> ValueSpec:
        try:
            return self.bindings[value]
        except KeyError:
            raise SpecError(f"agent {self.id!r} holds no value {value!r}") from None


@dataclass(frozen=True)
class Catalog:
    """Shared value specs plus the agents holding them (possibly overridden)."""

    values: Mapping[str, ValueSpec]
    agents: tuple  # of Agent, in declaration order

    def agent(self, agent_id: str) -> Agent:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise SpecError(f"unknown agent {agent_id!r}")

    @property
    def value_ids(self) -> list:
        return list(self.values)

    @property
    def agent_ids(self) -> list:
        return [a.id for a in self.agents]


DEFAULT_AGENT = "default"


def parse_catalog(values_raw: Optional[Mapping], agents_raw: Optional[list]) -> Catalog:
    """Parse the ``values`` and ``agents`` sections of a world file.

    Each agent holds every shared value, with per-agent ``bindings``
    replacing the shared spec. Without an ``agents`` section a single agent
    named ``default`` holds the shared values.
    """
    values_raw = values_raw or {}
    if not isinstance(values_raw, Mapping):
        raise FormatError("'values' must map value ids to specs")
    values = {vid: parse_spec(spec, f"values.{vid}") for vid, spec in values_raw.items()}
    if agents_raw is None:
        agents_raw = [{"id": DEFAULT_AGENT}]
    if not isinstance(agents_raw, list):
        raise FormatError("'agents' must be a list")
    agents = []
    seen = set()
    for i, entry in enumerate(agents_raw):
        if not isinstance(entry, Mapping) or "id" not in entry:
            raise FormatError(f"agents[{i}] must be an object with an 'id'")
        _only(entry, {"id", "bindings"}, f"agents[{i}]")
        aid = entry["id"]
        if aid in seen:
            raise FormatError(f"agent {aid!r} declared twice")
        seen.add(aid)
        overrides = entry.get("bindings", {})
        if not isinstance(overrides, Mapping):
            raise FormatError(f"agents.{aid}.bindings must be an object")
        bindings = dict(values)
        for vid, spec in overrides.items():
            if vid not in values:
                raise FormatError(f"agents.{aid}.bindings: value {vid!r} is not declared in 'values'")
            bindings[vid] = parse_spec(spec, f"agents.{aid}.bindings.{vid}")
        agents.append(Agent(aid, bindings, frozenset(overrides)))
    return Catalog(values, tuple(agents))


def catalog_to_raw(catalog: Catalog) -> tuple:
    values = {vid: spec.to_raw() for vid, spec in catalog.values.items()}
    agents = []
    for a in catalog.agents:
        entry: dict = {"id": a.id}
        if a.overrides:
            entry["bindings"] = {vid: a.bindings[vid].to_raw() for vid in sorted(a.overrides)}
        agents.append(entry)
    return values, agents


@dataclass(frozen=True)
class Issue:
    kind: str
    value: str
    agent: Optional[str]
    location: str
    message: str

    def __str__(self):
        owner = f"agent {self.agent!r}, " if self.agent else ""
        return f"values: {owner}value {self.value!r} at {self.location}: {self.kind}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple
    checked: tuple  # ((agent or None, value id), ...)

    @property
    def ok(self) -> bool:
        return not self.issues

    def failed(self) -> set:
        return {(i.agent, i.value) for i in self.issues}


def _spec_issues(spec: ValueSpec, vid: str, agent: Optional[str], world: Optional[World]):
    for kind, loc, msg in spec.problems():
        yield Issue(kind, vid, agent, loc, msg)
    if world is None:
        return
    for sid in sorted(spec.state_refs() - set(world.state_index)):
        yield Issue("UnknownState", vid, agent, sid, f"state {sid!r} is not declared in the world")
    if isinstance(spec, PredicateSpec):
        try:
            bind(spec.formula, world.variables, None)
        except SchemaMismatch as exc:
            yield Issue("SchemaMismatch", vid, agent, "formula", str(exc))


def validate_specs(catalog: Catalog, world: Optional[World] = None) -> ValidationReport:
    """Check every value spec; collects problems instead of raising."""
    issues = []
    checked = []
    for vid, spec in catalog.values.items():
        checked.append((None, vid))
        issues.extend(_spec_issues(spec, vid, None, world))
    for agent in catalog.agents:
        if not agent.bindings:
            issues.append(Issue("EmptyBindings", "*", agent.id, "bindings", "agent holds no values"))
        for vid in sorted(agent.overrides):
            checked.append((agent.id, vid))
            issues.extend(_spec_issues(agent.bindings[vid], vid, agent.id, world))
    return ValidationReport(tuple(issues), tuple(checked))


def eval_pref_exact(agent: Agent, value: str, s: State, s_next: State) -> Fraction:
    return agent.spec(value).exact(s, s_next)


def eval_pref(agent: Agent, value: str, s: State, s_next: State) -> float:
    """Preference for moving from ``s`` to ``s_next`` under ``agent``'s ``value``."""
    return float(eval_pref_exact(agent, value, s, s_next))


def _mean(xs: Sequence[Fraction]) -> Fraction:
    if not xs:
        raise ValueError("mean of an empty set")
    return sum(xs, Fraction(0)) / len(xs)


def aggregate_values(agent: Agent, values: Iterable[str], s: State, s_next: State) -> float:
    return float(_mean([eval_pref_exact(agent, v, s, s_next) for v in values]))


def aggregate_agents(agents: Iterable[Agent], value: str, s: State, s_next: State) -> float:
    return float(_mean([eval_pref_exact(a, value, s, s_next) for a in agents]))


def group_preference_exact(agents: Sequence[Agent], values: Sequence[str],
                           s: State, s_next: State) -> Fraction:
    """Mean over agents of each agent's mean over ``values``."""
    return _mean([_mean([eval_pref_exact(a, v, s, s_next) for v in values]) for a in agents])
