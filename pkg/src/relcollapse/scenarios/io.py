"""JSON scenario files (``schema: 1``) and transcript serialization."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .. import probe as pr
from ..hilbert import Ket, LinOp, pauli
from ..measurement import QState
from ..probe import ProbeRegister
from ..spacetime import Event, EventOrder, FlatFamily, Hyperplane
from .engine import (
    HellwigKraus,
    Kick,
    PiMeasure,
    Scenario,
    SolutionI,
    SolutionII,
    SpinMeasure,
    SpinUnitary,
    TimelineOp,
    Transcript,
)
from .experiments import named_ket

__all__ = ["ConfigError", "SCENARIO_SCHEMA", "load_scenario", "parse_scenario", "transcript_to_dict", "qstate_to_dict"]


class ConfigError(ValueError):
    pass


_EVENT = {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 4}
_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_AXIS = {
    "oneOf": [
        {"enum": ["x", "y", "z"]},
        {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
    ]
}
_OBSERVABLE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["subsystem"],
    "properties": {
        "subsystem": {"type": "integer", "minimum": 1},
        "axis": _AXIS,
        "diagonal": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "name": {"type": "string"},
    },
}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "ops"],
    "properties": {
        "schema": {"const": 1},
        "name": {"type": "string"},
        "dims": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "initial": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["amplitudes"],
                    "properties": {"amplitudes": {"type": "array", "items": _COMPLEX, "minItems": 1}},
                },
            ]
        },
        "probes": {"type": "object", "additionalProperties": {"enum": ["x", "y", "z"]}},
        "ops": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "event"],
                "properties": {
                    "id": {"type": "string"},
                    "event": _EVENT,
                    "pin": {"type": "number"},
                    "measure": _OBSERVABLE,
                    "field": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["subsystem", "axis", "k"],
                        "properties": {
                            "subsystem": {"type": "integer", "minimum": 1},
                            "axis": _AXIS,
                            "k": {"type": "number"},
                        },
                    },
                    "kick": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["pair", "particle", "strength"],
                        "properties": {
                            "pair": {"type": "string"},
                            "particle": {"enum": [1, 2]},
                            "strength": {"type": "number"},
                            "subsystem": {"type": "integer", "minimum": 1},
                        },
                    },
                    "read": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["pair", "particle"],
                        "properties": {"pair": {"type": "string"}, "particle": {"enum": [1, 2]}},
                    },
                },
                "oneOf": [
                    {"required": ["measure"]},
                    {"required": ["field"]},
                    {"required": ["kick"]},
                    {"required": ["read"]},
                ],
            },
        },
        "scheme": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type"],
                    "properties": {"type": {"const": "foliation"}, "rapidity": {"type": "number"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "order"],
                    "properties": {
                        "type": {"const": "order"},
                        "order": {"type": "array", "items": {"type": "string"}},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "surfaces"],
                    "properties": {
                        "type": {"const": "surfaces"},
                        "surfaces": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["offset"],
                                "properties": {"rapidity": {"type": "number"}, "offset": {"type": "number"}},
                            },
                        },
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "points"],
                    "properties": {"type": {"const": "lightcone"}, "points": {"type": "array", "items": _EVENT}},
                },
            ]
        },
    },
}


def _axis(value):
    return value if isinstance(value, str) else tuple(float(v) for v in value)


def _observable(spec) -> LinOp:
    if "axis" in spec and "diagonal" in spec:
        raise ConfigError("give either an axis or a diagonal, not both")
    if "diagonal" in spec:
        d = np.asarray(spec["diagonal"], dtype=float)
        return LinOp((d.size,), np.diag(d))
    try:
        return pauli(_axis(spec.get("axis", "z")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_scenario(doc: dict) -> Scenario:
    """Build a scenario from a parsed ``schema: 1`` document."""
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid scenario at {where}: {exc.message}") from None
    probes = ProbeRegister(doc.get("probes", {}))
    dims = tuple(doc.get("dims", [2, 2]))
    init = doc.get("initial", "singlet")
    try:
        if isinstance(init, str):
            ket = named_ket(init)
        else:
            amps = np.array([complex(re, im) for re, im in init["amplitudes"]])
            ket = Ket(dims, amps).normalized()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if ket.dims != dims:
        raise ConfigError(f"initial state dims {ket.dims} do not match declared dims {dims}")
    ops = []
    for item in doc["ops"]:
        event = Event.from_array(item["event"])
        if "measure" in item:
            m = item["measure"]
            action = SpinMeasure(_observable(m), m["subsystem"], m.get("name", item["id"]))
        elif "field" in item:
            from ..measurement import field_unitary

            f = item["field"]
            try:
                gen = pauli(_axis(f["axis"]))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            action = SpinUnitary(field_unitary(gen, f["k"]), f["subsystem"], item["id"])
        elif "kick" in item:
            k = item["kick"]
            if k["pair"] not in probes:
                raise ConfigError(f"op {item['id']!r} kicks unknown probe pair {k['pair']!r}")
            action = Kick(k["pair"], k["particle"], probes.axis(k["pair"]), k["strength"], k.get("subsystem"))
        else:
            r = item["read"]
            action = PiMeasure(r["pair"], r["particle"])
        ops.append(TimelineOp(item["id"], event, action, item.get("pin")))
    scheme_doc = doc.get("scheme", {"type": "foliation"})
    kind = scheme_doc["type"]
    if kind == "foliation":
        scheme = SolutionII(FlatFamily.from_rapidity(scheme_doc.get("rapidity", 0.0)))
    elif kind == "order":
        by_id = {op.op_id: op for op in ops}
        missing = [i for i in scheme_doc["order"] if i not in by_id]
        if missing:
            raise ConfigError(f"order names unknown op {missing[0]!r}")
        events = []
        for op_id in scheme_doc["order"]:
            ev = by_id[op_id].event
            if ev not in events:
                events.append(ev)
        scheme = SolutionII(EventOrder(tuple(events)))
    elif kind == "surfaces":
        scheme = SolutionI(
            tuple(Hyperplane.from_rapidity(s.get("rapidity", 0.0), s["offset"]) for s in scheme_doc["surfaces"])
        )
    else:
        scheme = HellwigKraus(tuple(Event.from_array(p) for p in scheme_doc["points"]))
    return Scenario(QState.from_ket(ket, probes.ids), tuple(ops), probes, scheme, doc.get("name", "scenario"))


def load_scenario(path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(doc)


def _label_to_dict(label) -> dict:
    if isinstance(label, pr.Epr):
        return {"kind": "epr", "net_shift": float(label.net_shift)}
    if isinstance(label, pr.Collapsed):
        return {"kind": "collapsed", "open_particle": label.open_particle, "momentum": label.value}
    return {"kind": "consumed", "readout_sum": float(label.total)}


def qstate_to_dict(s: QState) -> dict:
    return {
        "dims": list(s.dims),
        "terms": [
            {
                "probes": {pid: _label_to_dict(lab) for pid, lab in labels},
                "spin": [[float(a.real), float(a.imag)] for a in vec],
            }
            for labels, vec in s.terms
        ],
    }


def transcript_to_dict(t: Transcript) -> dict:
    return {
        "order": list(t.order),
        "weight": t.weight,
        "outcomes": [
            {
                "op": r.observable,
                "value": r.eigenvalue,
                "probability": r.probability,
                "event": list(r.event.as_tuple()) if r.event is not None else None,
                "readout_sum": r.readout_sum,
            }
            for r in t.outcomes
        ],
        "states": {key: qstate_to_dict(st) for key, st in t.states},
    }
