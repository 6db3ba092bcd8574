"""Scenario files: JSON in, validated :class:`ScenarioSpec` out, and back.

A scenario describes its network either directly (``variables`` + ``cpts``)
or through ``frames`` + ``relations`` + ``cpts``, in which case every frame
element becomes a true/false variable. The memory store (``memories``,
``incompatible``), ``bindings`` and ``decision`` are optional, so BN-only and
memory-only files are both legal. See docs/scenario_schema.md.

Any object may carry a ``"comment"`` key; comments are dropped on parse.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from . import memory
from .bayesnet import ROW_TOL, Cpt, Variable, build_network
from .errors import (
    Malformed,
    RowNotNormalized,
    SchemaViolation,
    UnknownReference,
    ValidationError,
)
from .frames import Frame, SignRelation, classify_relations, compile_to_bn
from .loop import Binding, DecisionRule, LoopParams, ScenarioSpec

FIXTURES = ("appendix1", "explosion", "figure2", "figure5", "maier")

_name = {"type": "string", "minLength": 1}
_names = {"type": "array", "items": _name}
_num = {"type": "number"}
_state_or_null = {"anyOf": [_name, {"type": "null"}]}


def _obj(props: dict, required=()) -> dict:
    return {
        "type": "object",
        "properties": {**props, "comment": {"type": "string"}},
        "required": list(required),
        "additionalProperties": False,
    }


SCHEMA: dict[str, Any] = _obj(
    {
        "description": {"type": "string"},
        "notes": {"type": "array", "items": {"type": "string"}},
        "variables": {
            "type": "array",
            "minItems": 1,
            "items": _obj({"name": _name, "states": {**_names, "minItems": 2}}, ["name", "states"]),
        },
        "cpts": {
            "type": "array",
            "items": _obj(
                {
                    "child": _name,
                    "parents": _names,
                    "rows": {
                        "type": "array",
                        "minItems": 1,
                        "items": _obj(
                            {
                                "given": _names,
                                "p": {"type": "array", "items": _num, "minItems": 1},
                                "fitted": {"type": "boolean"},
                            },
                            ["p"],
                        ),
                    },
                },
                ["child", "rows"],
            ),
        },
        "frames": {
            "type": "array",
            "minItems": 1,
            "items": _obj({"name": _name, "elements": {**_names, "minItems": 1}}, ["name", "elements"]),
        },
        "relations": {
            "type": "array",
            "items": _obj(
                {"source": _name, "target": _name, "kind": {"enum": ["within", "across"]}},
                ["source", "target"],
            ),
        },
        "memories": {
            "type": "array",
            "items": _obj({"name": _name, "attributes": {**_names, "minItems": 1}}, ["name", "attributes"]),
        },
        "incompatible": {
            "type": "array",
            "items": {"type": "array", "items": _name, "minItems": 2, "maxItems": 2},
        },
        "bindings": {
            "type": "array",
            "items": _obj(
                {"attribute": _name, "variable": _name, "on": _state_or_null, "off": _state_or_null},
                ["attribute", "variable"],
            ),
        },
        "decision": _obj(
            {
                "query": _name,
                "trigger": _name,
                "threshold": {"type": "number", "minimum": 0, "maximum": 1},
                "action_if_high": {"type": "string"},
                "action_if_low": {"type": "string"},
            },
            ["query", "trigger", "action_if_high", "action_if_low"],
        ),
        "evidence": {"type": "object", "additionalProperties": _name},
        "params": _obj(
            {
                "dynamics": _obj(
                    {
                        "step": {"type": "number", "exclusiveMinimum": 0},
                        "decay": {"type": "number", "minimum": 0},
                        "a_max": _num,
                        "a_min": _num,
                        "rest": _num,
                        "tol": {"type": "number", "exclusiveMinimum": 0},
                        "max_sweeps": {"type": "integer", "minimum": 1},
                        "memory_bias": _num,
                    }
                ),
                "weights": _obj(
                    {
                        "excitatory": {"type": "number", "exclusiveMinimum": 0},
                        "inhibitory": {"type": "number", "exclusiveMinimum": 0},
                        "normalize": {"type": "boolean"},
                        "overrides": {
                            "type": "array",
                            "items": _obj({"a": _name, "b": _name, "weight": _num}, ["a", "b", "weight"]),
                        },
                    }
                ),
                "theta_on": _num,
                "theta_off": _num,
                "max_rounds": {"type": "integer", "minimum": 1},
                "cue": _names,
            }
        ),
    },
)


def _strip_comments(x):
    if isinstance(x, dict):
        return {k: _strip_comments(v) for k, v in x.items() if k != "comment"}
    if isinstance(x, list):
        return [_strip_comments(v) for v in x]
    return x


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _schema_check(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        path = _path(err.absolute_path)
        raise SchemaViolation(f"{path}: {err.message}", path)


def _check_rows(doc: dict) -> None:
    # Report normalization problems against the file's own row paths.
    for i, c in enumerate(doc.get("cpts", ())):
        for j, row in enumerate(c["rows"]):
            p = row["p"]
            path = f"cpts[{i}].rows[{j}]"
            if any(not 0.0 <= x <= 1.0 for x in p):
                raise RowNotNormalized(f"{path}: entries must lie in [0, 1]: {p}", path, sum(p))
            if abs(sum(p) - 1.0) > ROW_TOL:
                raise RowNotNormalized(
                    f"{path}: CPT row for {c['child']!r} sums to {sum(p)!r}, not 1", path, sum(p)
                )


def _cpts(doc: dict) -> tuple[list[Cpt], frozenset]:
    cpts, fitted = [], set()
    for i, c in enumerate(doc.get("cpts", ())):
        parents = tuple(c.get("parents", ()))
        rows = {}
        for j, row in enumerate(c["rows"]):
            given = tuple(row.get("given", ()))
            if len(given) != len(parents):
                raise SchemaViolation(
                    f"cpts[{i}].rows[{j}].given: expected {len(parents)} parent states, got {len(given)}",
                    f"cpts[{i}].rows[{j}].given",
                )
            if given in rows:
                raise ValidationError(f"cpts[{i}].rows[{j}]: duplicate row for {list(given)}")
            rows[given] = tuple(row["p"])
            if row.get("fitted"):
                fitted.add((c["child"], given))
        cpts.append(Cpt(c["child"], parents, rows))
    return cpts, frozenset(fitted)


def parse_document(doc: Any) -> ScenarioSpec:
    _schema_check(doc)
    doc = _strip_comments(doc)
    _check_rows(doc)
    cpts, fitted = _cpts(doc)

    graph = None
    if "frames" in doc:
        if "variables" in doc:
            raise SchemaViolation(
                "variables: must be absent when frames are given (elements become variables)",
                "variables",
            )
        frames = [Frame(f["name"], f["elements"]) for f in doc["frames"]]
        rels = [SignRelation(r["source"], r["target"], r.get("kind")) for r in doc.get("relations", [])]
        graph = classify_relations(frames, rels)
        children = [c.child for c in cpts]
        if len(set(children)) != len(children):
            raise ValidationError("cpts: an element has more than one CPT")
        net = compile_to_bn(graph, {c.child: c for c in cpts})
    elif "relations" in doc:
        raise SchemaViolation("relations: need a frames section", "relations")
    elif "variables" in doc:
        net = build_network([Variable(v["name"], v["states"]) for v in doc["variables"]], cpts)
    elif cpts:
        raise SchemaViolation("cpts: need a variables or frames section", "cpts")
    else:
        net = None

    params = doc.get("params", {})
    cam = None
    if doc.get("memories"):
        w = params.get("weights", {})
        wc = memory.WeightConfig(
            excitatory=w.get("excitatory", 1.0),
            inhibitory=w.get("inhibitory", 1.0),
            normalize=w.get("normalize", True),
            overrides=tuple((o["a"], o["b"], float(o["weight"])) for o in w.get("overrides", ())),
        )
        dyn = memory.Dynamics(**params.get("dynamics", {}))
        cam = memory.build_cam(
            [(m["name"], m["attributes"]) for m in doc["memories"]],
            [tuple(p) for p in doc.get("incompatible", ())],
            wc,
            dyn,
        )
    elif doc.get("incompatible"):
        raise UnknownReference("incompatible: no memories declared")

    bindings = tuple(
        Binding(b["attribute"], b["variable"], b.get("on"), b.get("off")) for b in doc.get("bindings", ())
    )
    decision = None
    if "decision" in doc:
        d = doc["decision"]
        decision = DecisionRule(
            d["query"], d["trigger"], d.get("threshold", 0.5), d["action_if_high"], d["action_if_low"]
        )
    lp = LoopParams(
        theta_on=params.get("theta_on", 0.5),
        theta_off=params.get("theta_off", 0.0),
        max_rounds=params.get("max_rounds", 5),
    )
    return ScenarioSpec(
        net=net,
        cam=cam,
        bindings=bindings,
        decision=decision,
        params=lp,
        graph=graph,
        cue=tuple(params.get("cue", ())),
        evidence=dict(doc.get("evidence", {})),
        description=doc.get("description", ""),
        notes=tuple(doc.get("notes", ())),
        fitted=fitted,
    )


def parse_scenario(text: str) -> ScenarioSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise Malformed(f"not valid JSON: {exc}") from None
    return parse_document(doc)


# -- serialization -----------------------------------------------------------
def to_document(spec: ScenarioSpec) -> dict:
    """Plain-data form of a scenario with every default spelled out."""
    doc: dict[str, Any] = {}
    if spec.description:
        doc["description"] = spec.description
    if spec.notes:
        doc["notes"] = list(spec.notes)
    net = spec.net
    if net is not None:
        if spec.graph is not None:
            doc["frames"] = [{"name": f.name, "elements": list(f.elements)} for f in spec.graph.frames]
            doc["relations"] = [
                {"source": r.source, "target": r.target, "kind": r.kind} for r in spec.graph.relations
            ]
        else:
            doc["variables"] = [{"name": v.name, "states": list(v.states)} for v in net.variables.values()]
        cpts = []
        for name, cpt in net.cpts.items():
            pvars = [net.variables[p] for p in cpt.parents]
            rows = []
            for given in sorted(cpt.rows):
                row = {"given": list(given), "p": list(cpt.rows[given])}
                if (name, given) in spec.fitted:
                    row["fitted"] = True
                rows.append(row)
            cpts.append({"child": name, "parents": list(cpt.parents), "rows": rows})
        doc["cpts"] = cpts
    params: dict[str, Any] = {
        "theta_on": spec.params.theta_on,
        "theta_off": spec.params.theta_off,
        "max_rounds": spec.params.max_rounds,
    }
    if spec.cue:
        params["cue"] = list(spec.cue)
    cam = spec.cam
    if cam is not None:
        doc["memories"] = [{"name": m, "attributes": list(a)} for m, a in cam.memories.items()]
        if cam.incompatible:
            doc["incompatible"] = [list(p) for p in cam.incompatible]
        d = cam.params
        params["dynamics"] = {
            "step": d.step,
            "decay": d.decay,
            "a_max": d.a_max,
            "a_min": d.a_min,
            "rest": d.rest,
            "tol": d.tol,
            "max_sweeps": d.max_sweeps,
            "memory_bias": d.memory_bias,
        }
        wc = cam.weight_config
        params["weights"] = {
            "excitatory": wc.excitatory,
            "inhibitory": wc.inhibitory,
            "normalize": wc.normalize,
            "overrides": [{"a": a, "b": b, "weight": w} for a, b, w in wc.overrides],
        }
    if spec.bindings:
        doc["bindings"] = [
            {"attribute": b.attribute, "variable": b.variable, "on": b.on, "off": b.off}
            for b in sorted(spec.bindings, key=lambda b: b.attribute)
        ]
    if spec.decision is not None:
        r = spec.decision
        doc["decision"] = {
            "query": r.query,
            "trigger": r.trigger,
            "threshold": r.threshold,
            "action_if_high": r.action_if_high,
            "action_if_low": r.action_if_low,
        }
    if spec.evidence:
        doc["evidence"] = dict(spec.evidence)
    doc["params"] = params
    return doc


def serialize(spec: ScenarioSpec) -> str:
    """Canonical text: sorted keys, two-space indent, LF, trailing newline.

    Floats keep their shortest round-trip form so that parsing the output
    gives back exactly the same numbers.
    """
    return json.dumps(to_document(spec), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def canonicalize(text: str) -> str:
    return serialize(parse_scenario(text))


# -- fixtures ----------------------------------------------------------------
def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise Malformed(f"no bundled fixture named {name!r} (have {', '.join(FIXTURES)})")
    return resources.files("sensemaking").joinpath("fixtures", f"{name}.json").read_text("utf-8")


def load_fixture(name: str) -> ScenarioSpec:
    return parse_scenario(fixture_text(name))


def read_source(source: str | Path) -> str:
    """Text of a scenario given as a file path or a bundled fixture name."""
    path = Path(source)
    if path.is_file():
        try:
            return path.read_text("utf-8")
        except UnicodeDecodeError as exc:
            raise Malformed(f"{path}: not UTF-8 ({exc})") from None
    if str(source) in FIXTURES:
        return fixture_text(str(source))
    raise Malformed(f"{source}: no such file or bundled fixture")


def load(source: str | Path) -> ScenarioSpec:
    return parse_scenario(read_source(source))
