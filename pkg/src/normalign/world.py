"""Finite labeled transition systems and bounded path enumeration."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Union

from normalign.errors import (
    BadProbabilityGroup,
    DanglingTransition,
    DuplicateState,
    EmptyInitialSet,
    FormatError,
    NoPaths,
    SchemaError,
    UnknownState,
    WorldError,
)

Scalar = Union[bool, int, Decimal]

DECIMAL_PLACES = 6
QUANTUM = Decimal(1).scaleb(-DECIMAL_PLACES)
PROB_TOLERANCE = 1e-9
VAR_TYPES = ("bool", "int", "decimal")
# ``action`` is how guards refer to the action id, so no variable may take it.
RESERVED_NAMES = frozenset({"action", "true", "false", "True", "False"})


class DuplicateTransition(WorldError):
    pass


def format_scalar(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Decimal):
        text = format(value.normalize(), "f")
        return "0" if text == "-0" else text
    return str(value)


@dataclass(frozen=True)
class VarDomain:
    """Declared type and optional inclusive bounds of one state variable."""

    name: str
    type: str
    min: Optional[Scalar] = None
    max: Optional[Scalar] = None

    def __post_init__(self):
        if self.type not in VAR_TYPES:
            raise SchemaError(f"variable {self.name!r}: unknown type {self.type!r}")
        if self.name in RESERVED_NAMES or not self.name.isidentifier():
            raise SchemaError(f"variable name {self.name!r} is reserved or not an identifier")
        if self.type == "bool" and (self.min is not None or self.max is not None):
            raise SchemaError(f"variable {self.name!r}: bool variables take no bounds")

    def coerce(self, value) -> Scalar:
        """Convert a raw scalar to this domain's canonical representation.

        Raises ``ValueError`` when the value has the wrong type or lies outside
        the bounds; callers translate that into the error fitting their context.
        """
        if self.type == "bool":
            if not isinstance(value, bool):
                raise ValueError(f"{self.name}: expected bool, got {value!r}")
            return value
        if isinstance(value, bool):
            raise ValueError(f"{self.name}: expected number, got {value!r}")
        try:
            number = value if isinstance(value, Decimal) else Decimal(str(value))
        except InvalidOperation:
            raise ValueError(f"{self.name}: not a number: {value!r}") from None
        if not number.is_finite():
            raise ValueError(f"{self.name}: not finite: {value!r}")
        if self.type == "int":
            if number != number.to_integral_value():
                raise ValueError(f"{self.name}: expected integer, got {value!r}")
            result: Scalar = int(number)
        else:
            result = number.quantize(QUANTUM)
        if self.min is not None and result < self.min:
            raise ValueError(f"{self.name}: {format_scalar(result)} below minimum {format_scalar(self.min)}")
        if self.max is not None and result > self.max:
            raise ValueError(f"{self.name}: {format_scalar(result)} above maximum {format_scalar(self.max)}")
        return result

    def to_dict(self) -> dict:
        out: dict = {"type": self.type}
        if self.min is not None:
            out["min"] = self.min
        if self.max is not None:
            out["max"] = self.max
        return out


@dataclass(frozen=True)
class State:
    id: str
    vars: tuple  # sorted ((name, value), ...)

    @classmethod
    def of(cls, id: str, assignment: Mapping[str, Scalar]) -> "State":
        return cls(id, tuple(sorted(assignment.items())))

    @property
    def env(self) -> dict:
        return dict(self.vars)

    def __getitem__(self, name: str) -> Scalar:
        for key, value in self.vars:
            if key == name:
                return value
        raise KeyError(name)


def canonical_state_id(assignment: Mapping[str, Scalar]) -> str:
    """Deterministic id for a state known only by its assignment."""
    return ",".join(f"{name}={format_scalar(value)}" for name, value in sorted(assignment.items()))


@dataclass(frozen=True, order=True)
class Transition:
    src: str
    action: str
    dst: str
    prob: Optional[float] = field(default=None, compare=False)

    @property
    def key(self) -> tuple:
        return (self.src, self.action, self.dst)

    def __str__(self):
        return f"{self.src} -{self.action}-> {self.dst}"


@dataclass(frozen=True)
class World:
    """A finite world ``(S, A, T)`` with a nonempty set of initial states.

    Construction validates every invariant; a ``World`` that exists is valid.
    Use :func:`make_world` to build one from unordered collections.
    """

    schema: tuple  # of VarDomain, sorted by name
    states: tuple  # of State, sorted by id
    actions: tuple  # of str, sorted
    transitions: tuple  # of Transition, sorted
    initial_states: tuple  # of str, sorted

    def __post_init__(self):
        _check_world(self)

    @cached_property
    def state_index(self) -> dict:
        return {s.id: s for s in self.states}

    @cached_property
    def _outgoing(self) -> dict:
        out = defaultdict(list)
        for t in self.transitions:
            out[t.src].append(t)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def assignment_index(self) -> dict:
        return {s.vars: s.id for s in self.states}

    @property
    def variables(self) -> dict:
        return {d.name: d for d in self.schema}

    def state(self, state_id: str) -> State:
        try:
            return self.state_index[state_id]
        except KeyError:
            raise UnknownState(f"unknown state {state_id!r}") from None

    def outgoing(self, state_id: str) -> tuple:
        return self._outgoing.get(state_id, ())


def make_world(schema: Iterable[VarDomain], states: Iterable[State], actions: Iterable[str],
               transitions: Iterable[Transition], initial_states: Optional[Iterable[str]] = None) -> World:
    states = tuple(sorted(states, key=lambda s: s.id))
    if initial_states is None:
        initial_states = [s.id for s in states]
    return World(
        schema=tuple(sorted(schema, key=lambda d: d.name)),
        states=states,
        actions=tuple(sorted(actions)),
        transitions=tuple(sorted(transitions)),
        initial_states=tuple(sorted(initial_states)),
    )


def _check_world(world: World) -> None:
    names = [d.name for d in world.schema]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate variable in schema")
    domains = {d.name: d for d in world.schema}

    seen_ids = set()
    seen_assignments = {}
    for s in world.states:
        if s.id in seen_ids:
            raise DuplicateState(f"state id {s.id!r} declared twice")
        seen_ids.add(s.id)
        env = s.env
        if set(env) != set(domains):
            missing = sorted(set(domains) - set(env))
            extra = sorted(set(env) - set(domains))
            raise SchemaError(f"state {s.id!r}: variables do not match schema (missing {missing}, unknown {extra})")
        for name, value in env.items():
            try:
                canonical = domains[name].coerce(value)
            except ValueError as exc:
                raise SchemaError(f"state {s.id!r}: {exc}") from None
            if canonical != value or type(canonical) is not type(value):
                raise SchemaError(f"state {s.id!r}: {name}={value!r} is not in canonical form")
        if s.vars in seen_assignments:
            raise DuplicateState(
                f"states {seen_assignments[s.vars]!r} and {s.id!r} have identical assignments")
        seen_assignments[s.vars] = s.id

    if len(set(world.actions)) != len(world.actions):
        raise WorldError("duplicate action id")
    actions = set(world.actions)

    seen_keys = set()
    groups = defaultdict(list)
    for t in world.transitions:
        if t.src not in seen_ids or t.dst not in seen_ids:
            raise DanglingTransition(f"transition {t} references an undeclared state")
        if t.action not in actions:
            raise DanglingTransition(f"transition {t} uses undeclared action {t.action!r}")
        if t.key in seen_keys:
            raise DuplicateTransition(f"transition {t} declared twice")
        seen_keys.add(t.key)
        groups[(t.src, t.action)].append(t)

    for (src, action), members in groups.items():
        probs = [t.prob for t in members]
        if all(p is None for p in probs):
            continue
        if any(p is None for p in probs):
            raise BadProbabilityGroup(f"group ({src}, {action}): some transitions lack a probability")
        if any(not 0 < p <= 1 for p in probs):
            raise BadProbabilityGroup(f"group ({src}, {action}): probabilities must lie in (0, 1]")
        total = sum(probs)
        if abs(total - 1) > PROB_TOLERANCE:
            raise BadProbabilityGroup(f"group ({src}, {action}): probabilities sum to {total!r}, not 1")

    if not world.initial_states:
        raise EmptyInitialSet("initial_states is empty")
    for s in world.initial_states:
        if s not in seen_ids:
            raise UnknownState(f"initial state {s!r} is not declared")
    if len(set(world.initial_states)) != len(world.initial_states):
        raise WorldError("duplicate initial state")


def parse_schema(raw: Mapping) -> list:
    if not isinstance(raw, Mapping):
        raise FormatError("schema must be an object mapping variable names to domains")
    schema = []
    for name, spec in raw.items():
        if isinstance(spec, str):
            spec = {"type": spec}
        if not isinstance(spec, Mapping):
            raise FormatError(f"schema.{name} must be an object or a type name")
        unknown = set(spec) - {"type", "min", "max"}
        if unknown:
            raise FormatError(f"schema.{name}: unknown keys {sorted(unknown)}")
        vtype = spec.get("type")
        bounds = {}
        for key in ("min", "max"):
            if spec.get(key) is not None:
                if vtype == "bool":
                    raise SchemaError(f"variable {name!r}: bool variables take no bounds")
                try:
                    bounds[key] = VarDomain(name, vtype).coerce(spec[key])
                except ValueError as exc:
                    raise SchemaError(f"schema.{name}.{key}: {exc}") from None
        schema.append(VarDomain(name, vtype, **bounds))
    return schema


def _parse_prob(raw, where: str) -> Optional[float]:
    if raw is None:
        return None
    if isinstance(raw, bool) or not isinstance(raw, (int, float, Decimal)):
        raise FormatError(f"{where}: prob must be a number")
    return float(raw)


def validate_world(raw: Mapping) -> World:
    """Build a :class:`World` from the world sections of a parsed world file.

    ``raw`` holds ``schema``, ``states``, ``actions``, ``transitions`` and
    optionally ``initial_states`` (all states when omitted). Extra keys are
    ignored here; the file loader is responsible for rejecting unknown ones.
    """
    for key in ("schema", "states", "actions", "transitions"):
        if key not in raw:
            raise FormatError(f"missing section {key!r}")
    schema = parse_schema(raw["schema"])
    domains = {d.name: d for d in schema}

    states = []
    ids = set()
    for i, entry in enumerate(raw["states"]):
        if not isinstance(entry, Mapping) or "id" not in entry:
            raise FormatError(f"states[{i}] must be an object with an 'id'")
        sid = entry["id"]
        if not isinstance(sid, str) or not sid:
            raise FormatError(f"states[{i}].id must be a nonempty string")
        if sid in ids:
            raise DuplicateState(f"state id {sid!r} declared twice")
        ids.add(sid)
        env = entry.get("vars", {})
        if not isinstance(env, Mapping):
            raise FormatError(f"states[{i}].vars must be an object")
        if set(env) != set(domains):
            missing = sorted(set(domains) - set(env))
            extra = sorted(set(env) - set(domains))
            raise SchemaError(f"state {sid!r}: variables do not match schema (missing {missing}, unknown {extra})")
        assignment = {}
        for name, value in env.items():
            try:
                assignment[name] = domains[name].coerce(value)
            except ValueError as exc:
                raise SchemaError(f"state {sid!r}: {exc}") from None
        states.append(State.of(sid, assignment))

    actions = list(raw["actions"])
    if not all(isinstance(a, str) and a for a in actions):
        raise FormatError("actions must be nonempty strings")

    transitions = []
    for i, entry in enumerate(raw["transitions"]):
        if not isinstance(entry, Mapping) or not {"from", "action", "to"} <= set(entry):
            raise FormatError(f"transitions[{i}] needs 'from', 'action' and 'to'")
        unknown = set(entry) - {"from", "action", "to", "prob"}
        if unknown:
            raise FormatError(f"transitions[{i}]: unknown keys {sorted(unknown)}")
        transitions.append(Transition(entry["from"], entry["action"], entry["to"],
                                      _parse_prob(entry.get("prob"), f"transitions[{i}]")))

    initial = raw.get("initial_states")
    if initial is not None and not isinstance(initial, list):
        raise FormatError("initial_states must be a list")
    return make_world(schema, states, actions, transitions, initial)


def successors(world: World, s: str, action_filter: Optional[str] = None) -> list:
    """Transitions leaving ``s``, ordered by action then destination."""
    world.state(s)
    out = world.outgoing(s)
    if action_filter is not None:
        out = tuple(t for t in out if t.action == action_filter)
    return list(out)


@dataclass(frozen=True)
class Path:
    steps: tuple  # of Transition

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a path has at least one transition")
        for a, b in zip(self.steps, self.steps[1:]):
            if a.dst != b.src:
                raise ValueError(f"broken path: {a} is not followed by {b}")

    @property
    def length(self) -> int:
        return len(self.steps)

    def __len__(self):
        return len(self.steps)

    @property
    def states(self) -> tuple:
        return (self.steps[0].src,) + tuple(t.dst for t in self.steps)

    def __str__(self):
        parts = [self.steps[0].src]
        for t in self.steps:
            parts.append(f"-{t.action}->")
            parts.append(t.dst)
        return " ".join(parts)


@dataclass(frozen=True)
class PathSet:
    paths: tuple  # of Path
    horizon: int

    def __post_init__(self):
        if any(p.length > self.horizon for p in self.paths):
            raise ValueError("path longer than the horizon")

    def __len__(self):
        return len(self.paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)


def iter_paths(world: World, horizon: int) -> Iterator[Path]:
    """Yield maximal bounded paths in lexicographic order.

    A path is maximal when it has ``horizon`` transitions or stops at a state
    without outgoing transitions. Initial states that are dead ends yield
    nothing, since paths are never empty.
    """
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
    for start in world.initial_states:
        # explicit stack, pushed in reverse so pops come out in sorted order
        stack = [(t,) for t in reversed(world.outgoing(start))]
        while stack:
            steps = stack.pop()
            nxt = world.outgoing(steps[-1].dst)
            if len(steps) == horizon or not nxt:
                yield Path(steps)
                continue
            stack.extend(steps + (t,) for t in reversed(nxt))


def enumerate_paths(world: World, horizon: int) -> PathSet:
    paths = tuple(iter_paths(world, horizon))
    if not paths:
        raise NoPaths("no initial state has an outgoing transition")
    return PathSet(paths, horizon)
