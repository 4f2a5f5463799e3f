"""Reading and writing world files.

A world file is one JSON document carrying the world, its values and
agents, and the norms to study. See ``docs/worldfile.md`` for the grammar.
Numbers are read as exact decimals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path as FsPath
from typing import Optional, Union

from normalign.errors import FormatError, SpecError
from normalign.norms import Norm, bind_norm, parse_norm
from normalign.preferences import Catalog, ValidationReport, catalog_to_raw, parse_catalog, validate_specs
from normalign.world import World, validate_world

SECTIONS = ("description", "schema", "states", "actions", "transitions", "initial_states",
            "values", "agents", "norms")
WORLD_SECTIONS = ("schema", "states", "actions", "transitions", "initial_states")


@dataclass(frozen=True)
class WorldFile:
    world: World
    catalog: Catalog
    norms: tuple = ()
    description: Optional[str] = field(default=None, compare=False)

    def norm(self, norm_id: str) -> Norm:
        for n in self.norms:
            if n.id == norm_id:
                return n
        raise SpecError(f"unknown norm {norm_id!r}")

    @property
    def norm_ids(self) -> list:
        return [n.id for n in self.norms]


def parse_document(text: str) -> dict:
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError("a world file must be a JSON object")
    unknown = sorted(set(doc) - set(SECTIONS))
    if unknown:
        raise FormatError(f"unknown top-level keys {unknown}")
    return doc


def read_document(path: Union[str, FsPath]) -> dict:
    return parse_document(FsPath(path).read_text(encoding="utf-8"))


def parse_norms(doc: dict) -> tuple:
    raw = doc.get("norms", [])
    if not isinstance(raw, list):
        raise FormatError("'norms' must be a list")
    norms = tuple(parse_norm(n) for n in raw)
    ids = [n.id for n in norms]
    if len(set(ids)) != len(ids):
        raise FormatError("duplicate norm id")
    return norms


def build(doc: dict) -> WorldFile:
    """Turn a parsed document into validated objects; raises on the first problem."""
    world = validate_world(doc)
    catalog = parse_catalog(doc.get("values"), doc.get("agents"))
    norms = parse_norms(doc)
    for n in norms:
        bind_norm(n, world)
    return WorldFile(world, catalog, norms, doc.get("description"))


def load(path: Union[str, FsPath], check_specs: bool = True) -> WorldFile:
    wf = build(read_document(path))
    if check_specs:
        report = validate_specs(wf.catalog, wf.world)
        if not report.ok:
            raise SpecError("; ".join(str(i) for i in report.issues))
    return wf


def loads(text: str) -> WorldFile:
    return build(parse_document(text))


def _jsonable(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Decimal):
        return int(value) if value == value.to_integral_value() else float(value)
    return value


def world_to_raw(world: World) -> dict:
    return {
        "schema": {d.name: {k: _jsonable(v) for k, v in d.to_dict().items()} for d in world.schema},
        "states": [{"id": s.id, "vars": {k: _jsonable(v) for k, v in s.vars}} for s in world.states],
        "actions": list(world.actions),
        "transitions": [
            {"from": t.src, "action": t.action, "to": t.dst, **({} if t.prob is None else {"prob": t.prob})}
            for t in world.transitions
        ],
        "initial_states": list(world.initial_states),
    }


def to_raw(wf: WorldFile) -> dict:
    values, agents = catalog_to_raw(wf.catalog)
    out: dict = {}
    if wf.description:
        out["description"] = wf.description
    out.update(world_to_raw(wf.world))
    out["values"] = values
    out["agents"] = agents
    out["norms"] = [n.to_raw() for n in wf.norms]
    return out


def dumps(wf: WorldFile) -> str:
    return json.dumps(to_raw(wf), indent=2, ensure_ascii=False) + "\n"


def dump(wf: WorldFile, path: Union[str, FsPath]) -> None:
    FsPath(path).write_text(dumps(wf), encoding="utf-8")


def check(wf: WorldFile) -> ValidationReport:
    return validate_specs(wf.catalog, wf.world)
