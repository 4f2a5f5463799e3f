"""Degree of alignment between norms and values.

For a norm (or ordered norm set) ``n``, the degree of alignment with a value
for an agent is the average, over the bounded maximal paths of the
normative world, of each path's mean per-transition preference::

    D = sum_p w(p) * (1/|p|) * sum_d pref(p_d.src, p_d.dst)

with ``w(p) = 1/|P|`` under uniform weighting, or the normalised product of
transition probabilities under probability weighting. Value and agent sets
replace ``pref`` by its pointwise mean.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from normalign.errors import AlignError, SpecError
from normalign.norms import Norm, NormativeWorld, apply_norm_set
from normalign.preferences import Catalog, group_preference_exact
from normalign.world import Path, PathSet, World, enumerate_paths

DEFAULT_HORIZON = 3


class Weighting(str, enum.Enum):
    UNIFORM = "uniform"
    PROBABILITY = "probability"


NormLike = Union[Norm, Sequence[Norm], None]


def _as_norms(norms: NormLike) -> tuple:
    if norms is None:
        return ()
    if isinstance(norms, Norm):
        return (norms,)
    return tuple(norms)


@dataclass(frozen=True)
class AlignmentRequest:
    """Everything needed to compute alignment degrees.

    ``norms`` is applied as one ordered set by :func:`degree_of_alignment`
    and :func:`aggregated_alignment`, but compared entry by entry by
    :func:`relative_alignment` and :func:`alignment_matrix`; in the latter
    an entry may itself be a sequence of norms. Empty ``agents`` selects the
    catalog's first agent.
    """

    world: World
    catalog: Catalog
    norms: tuple = ()
    values: tuple = ()
    agents: tuple = ()
    horizon: int = DEFAULT_HORIZON
    weighting: Weighting = Weighting.UNIFORM

    def __post_init__(self):
        if isinstance(self.horizon, bool) or not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon!r}")
        object.__setattr__(self, "weighting", Weighting(self.weighting))
        norms = (self.norms,) if isinstance(self.norms, Norm) else tuple(self.norms or ())
        object.__setattr__(self, "norms", norms)
        if isinstance(self.values, str):
            object.__setattr__(self, "values", (self.values,))
        if isinstance(self.agents, str):
            object.__setattr__(self, "agents", (self.agents,))

    def resolve_agents(self) -> list:
        if not self.catalog.agents:
            raise SpecError("catalog declares no agents")
        if not self.agents:
            return [self.catalog.agents[0]]
        return [self.catalog.agent(a) for a in self.agents]

    def resolve_values(self) -> list:
        if not self.values:
            raise SpecError("no value selected")
        for agent in self.resolve_agents():
            for v in self.values:
                agent.spec(v)
        return list(self.values)


@dataclass(frozen=True)
class PathResult:
    path: Path
    deltas: tuple  # per-transition preference, float
    mean: float
    weight: float

    def to_dict(self) -> dict:
        return {
            "path": str(self.path),
            "states": list(self.path.states),
            "actions": [t.action for t in self.path.steps],
            "length": self.path.length,
            "deltas": list(self.deltas),
            "mean_preference": self.mean,
            "weight": self.weight,
        }


@dataclass(frozen=True)
class AlignmentReport:
    degree: float
    path_count: int
    mean_path_length: float
    paths: tuple  # of PathResult, in enumeration order
    normative: NormativeWorld = field(repr=False)
    horizon: int = DEFAULT_HORIZON
    weighting: Weighting = Weighting.UNIFORM
    values: tuple = ()
    agents: tuple = ()

    @property
    def norms(self) -> tuple:
        return self.normative.norms_applied

    @property
    def weights_total(self) -> float:
        return math.fsum(p.weight for p in self.paths)

    def to_dict(self, include_paths: bool = True) -> dict:
        out = {
            "degree": self.degree,
            "path_count": self.path_count,
            "mean_path_length": self.mean_path_length,
            "horizon": self.horizon,
            "weighting": self.weighting.value,
            "norms": list(self.norms),
            "values": list(self.values),
            "agents": list(self.agents),
            "normative_world": self.normative.summary(),
        }
        if self.weighting is Weighting.PROBABILITY:
            out["weight_normalisation"] = "global"
        if include_paths:
            out["paths"] = [p.to_dict() for p in self.paths]
        return out


def path_probability(world: World, path: Path) -> Fraction:
    """Product of transition probabilities; unprobabilised groups count as uniform."""
    prob = Fraction(1)
    for t in path.steps:
        if t.prob is None:
            fanout = sum(1 for u in world.outgoing(t.src) if u.action == t.action)
            prob /= fanout
        else:
            prob *= Fraction(t.prob)
    return prob


def evaluate_paths(normative: NormativeWorld, pathset: PathSet, catalog: Catalog,
                   agents: Sequence, values: Sequence[str],
                   weighting: Weighting = Weighting.UNIFORM) -> AlignmentReport:
    """Score an already enumerated path set; see :func:`aggregated_alignment`."""
    world = normative.world
    cache: dict = {}

    def pref(src: str, dst: str) -> float:
        key = (src, dst)
        if key not in cache:
            cache[key] = float(group_preference_exact(agents, values, world.state(src), world.state(dst)))
        return cache[key]

    paths = list(pathset)
    if weighting is Weighting.UNIFORM:
        weights = [1 / len(paths)] * len(paths)
    else:
        raw = [path_probability(world, p) for p in paths]
        total = sum(raw, Fraction(0))
        weights = [float(w / total) for w in raw]

    results = []
    for p, w in zip(paths, weights):
        deltas = tuple(pref(t.src, t.dst) for t in p.steps)
        results.append(PathResult(p, deltas, math.fsum(deltas) / len(deltas), w))

    if weighting is Weighting.UNIFORM:
        degree = math.fsum(r.mean for r in results) / len(results)
    else:
        degree = math.fsum(r.mean * r.weight for r in results)
    degree = max(-1.0, min(1.0, degree))
    return AlignmentReport(
        degree=degree,
        path_count=len(results),
        mean_path_length=math.fsum(p.length for p in paths) / len(paths),
        paths=tuple(results),
        normative=normative,
        horizon=pathset.horizon,
        weighting=weighting,
        values=tuple(values),
        agents=tuple(a.id for a in agents),
    )


def aggregated_alignment(req: AlignmentRequest) -> AlignmentReport:
    """Degree of alignment of ``req.norms`` (as one ordered set) over value and agent sets."""
    agents = req.resolve_agents()
    values = req.resolve_values()
    normative = apply_norm_set(req.world, req.norms)
    pathset = enumerate_paths(normative.world, req.horizon)
    return evaluate_paths(normative, pathset, req.catalog, agents, values, req.weighting)


def degree_of_alignment(req: AlignmentRequest) -> AlignmentReport:
    if len(req.values) != 1:
        raise ValueError("degree_of_alignment takes exactly one value; use aggregated_alignment")
    if len(req.agents) > 1:
        raise ValueError("degree_of_alignment takes one agent; use aggregated_alignment")
    return aggregated_alignment(req)


def _with_norms(req: AlignmentRequest, entry) -> AlignmentRequest:
    return AlignmentRequest(req.world, req.catalog, _as_norms(entry), req.values, req.agents,
                            req.horizon, req.weighting)


def relative_alignment(req: AlignmentRequest) -> float:
    """``D(first norm) - D(second norm)``; positive favours the first."""
    if len(req.norms) != 2:
        raise ValueError("relative_alignment compares exactly two norms")
    first = aggregated_alignment(_with_norms(req, req.norms[0]))
    second = aggregated_alignment(_with_norms(req, req.norms[1]))
    return first.degree - second.degree


def norm_label(entry) -> str:
    norms = _as_norms(entry)
    return "+".join(n.id for n in norms) if norms else "(none)"


@dataclass(frozen=True)
class AlignmentMatrix:
    norms: tuple  # labels
    values: tuple
    cells: dict  # (norm label, value) -> AlignmentReport | AlignError

    def degree(self, norm: str, value: str) -> Optional[float]:
        cell = self.cells[(norm, value)]
        return None if isinstance(cell, AlignError) else cell.degree

    @property
    def any_ok(self) -> bool:
        return any(not isinstance(c, AlignError) for c in self.cells.values())


def alignment_matrix(req: AlignmentRequest) -> AlignmentMatrix:
    """Norm x value grid of degrees; failing cells hold their error."""
    values = list(req.values) or req.catalog.value_ids
    agents = req.resolve_agents()
    labels = []
    cells = {}
    for entry in req.norms:
        label = norm_label(entry)
        labels.append(label)
        try:
            normative = apply_norm_set(req.world, _as_norms(entry))
            pathset = enumerate_paths(normative.world, req.horizon)
        except AlignError as exc:
            for v in values:
                cells[(label, v)] = exc
            continue
        for v in values:
            try:
                for a in agents:
                    a.spec(v)
                cells[(label, v)] = evaluate_paths(normative, pathset, req.catalog, agents, [v],
                                                   req.weighting)
            except AlignError as exc:
                cells[(label, v)] = exc
    return AlignmentMatrix(tuple(labels), tuple(values), cells)
