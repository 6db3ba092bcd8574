"""Run reports as plain data, canonical JSON and ``key=value`` text."""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

import numpy as np

from .bayesnet import Distribution
from .loop import Round, SensemakingDecision
from .memory import SettleResult, SynthesizedSign

DIGITS = 9


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot emit non-finite number {x!r}")
    s = f"{x:.{DIGITS}f}"
    return s[1:] if s.startswith("-") and float(s) == 0.0 else s


def canonical_json(obj: Any, indent: int = 2) -> str:
    """Sorted keys, floats in fixed point with 9 decimals, LF, trailing newline.

    The stdlib encoder has no hook for float formatting, hence the small
    recursive writer.
    """

    def enc(x, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(x, (bool, np.bool_)) or x is None:
            return json.dumps(None if x is None else bool(x))
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        if isinstance(x, (float, np.floating)):
            return _fmt(float(x))
        if isinstance(x, str):
            return json.dumps(x, ensure_ascii=False)
        if isinstance(x, Mapping):
            if not x:
                return "{}"
            items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {enc(x[k], level + 1)}" for k in sorted(x, key=str)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(x, (list, tuple)):
            if not x:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in x) + "\n" + end + "]"
        raise TypeError(f"cannot emit {type(x).__name__}")

    return enc(obj, 0) + "\n"


# -- plain-data builders -----------------------------------------------------
def distribution(d: Distribution) -> dict[str, float]:
    return dict(zip(d.states, d.probs))


def sign(s: SynthesizedSign | None) -> dict | None:
    if s is None:
        return None
    return {"attributes": list(s.attributes), "memories": list(s.memories), "recombined": s.recombined}


def settle_data(res: SettleResult) -> dict:
    return {
        "activations": dict(res.activations),
        "sweeps": res.sweeps,
        "converged": res.converged,
        "energy_initial": res.energies[0],
        "energy_final": res.energies[-1],
        "clamped": dict(res.network.clamped),
        "inputs": dict(res.network.external),
    }


def round_data(r: Round) -> dict:
    return {
        "index": r.index,
        "activations": dict(r.activations),
        "sweeps": r.sweeps,
        "converged": r.converged,
        "sign": sign(r.sign),
        "extracted": dict(r.extracted),
        "evidence": dict(r.evidence),
        "posterior": distribution(r.posterior),
    }


def decision_data(d: SensemakingDecision) -> dict:
    return {
        "query": d.rule.query,
        "trigger": d.rule.trigger,
        "threshold": d.rule.threshold,
        "action": d.action,
        "cue": list(d.cue),
        "initial": distribution(d.initial),
        "posterior": distribution(d.posterior),
        "rounds_executed": d.rounds_executed,
        "fixpoint": d.fixpoint,
        "evidence": dict(d.evidence),
        "rounds": [round_data(r) for r in d.rounds],
    }


# -- text --------------------------------------------------------------------
def _scalar(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (float, np.floating)):
        return _fmt(float(v))
    return str(v)


def text_lines(data: Mapping, prefix: str = "") -> list[str]:
    """Flatten nested data to sorted ``a.b.c=value`` lines."""
    out = []
    for k in sorted(data, key=str):
        v = data[k]
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            out.extend(text_lines(v, key + ".") if v else [f"{key}={{}}"])
        elif isinstance(v, (list, tuple)):
            if any(isinstance(x, Mapping) for x in v):
                for i, x in enumerate(v):
                    out.extend(text_lines(x, f"{key}[{i}].") if isinstance(x, Mapping) else [f"{key}[{i}]={_scalar(x)}"])
            else:
                out.append(f"{key}=" + ",".join(_scalar(x) for x in v))
        else:
            out.append(f"{key}={_scalar(v)}")
    return out


def probability_lines(dists: Mapping[str, Distribution]) -> list[str]:
    return [f"P({name}={s})={_fmt(p)}" for name, d in dists.items() for s, p in zip(d.states, d.probs)]
