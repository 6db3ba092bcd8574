"""Command-line entry point.

Exit codes: 0 success, 1 invalid input or usage, 2 the model could not
answer (impossible or conflicting evidence, a failed oracle check, ...).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import memory, oracle, plotting, report, scenario
from .bayesnet import posterior, posteriors
from .errors import InferenceError, SensemakingError, ValidationError
from .loop import ScenarioSpec, run_sensemaking

ORACLE_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _pairs(items: Sequence[str] | None, what: str) -> dict[str, str]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise UsageError(f"{what} must look like NAME=VALUE, got {item!r}")
        out[key] = value
    return out


def _floats(items, what) -> dict[str, float]:
    out = {}
    for k, v in _pairs(items, what).items():
        if v == "max":
            out[k] = None
            continue
        try:
            out[k] = float(v)
        except ValueError:
            raise UsageError(f"{what} value for {k!r} is not a number: {v!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="settling tolerance (overrides the file)")
    common.add_argument("--max-sweeps", type=int, help="settling sweep cap (overrides the file)")
    common.add_argument("--max-rounds", type=int, help="loop round cap (overrides the file)")
    common.add_argument("--json", action="store_true", help="emit canonical JSON instead of text")
    common.add_argument("--seed", type=int, help="accepted and ignored; every computation is deterministic")
    common.add_argument("--figures", type=Path, metavar="DIR", help="also write PNG figures into DIR")

    p = _Parser(prog="sensemaking", description="Frames, Bayesian networks and memory relaxation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", parents=[common], help="check a scenario file")
    v.add_argument("file", help="path or bundled fixture name")
    v.add_argument("--canonical", action="store_true", help="print the canonical form of the file")

    i = sub.add_parser("infer", parents=[common], help="exact posterior(s) given evidence")
    i.add_argument("file")
    i.add_argument("--evidence", nargs="*", default=[], metavar="VAR=STATE")
    i.add_argument("--query", help="one variable (default: all)")

    s = sub.add_parser("settle", parents=[common], help="settle the memory network")
    s.add_argument("file")
    s.add_argument("--clamp", nargs="*", metavar="UNIT=VALUE", help="VALUE may be 'max' (default: the file's cue at a_max)")
    s.add_argument("--input", nargs="*", default=[], metavar="UNIT=VALUE", help="constant external input")
    s.add_argument("--without", nargs="*", default=[], metavar="MEMORY", help="drop memories before settling")
    s.add_argument("--theta-on", type=float, help="readout threshold for the sign")

    m = sub.add_parser("sensemake", parents=[common], help="run the full cue-to-decision loop")
    m.add_argument("file")
    m.add_argument("--cue", nargs="*", metavar="UNIT", help="units clamped at a_max (default: the file's cue)")
    m.add_argument("--evidence", nargs="*", default=[], metavar="VAR=STATE", help="evidence held from the start")

    o = sub.add_parser("oracle", parents=[common], help="brute-force references")
    o.add_argument("file")
    o.add_argument("--check", action="store_true", help="compare engine against oracle; exit 2 on disagreement")
    o.add_argument("--clamp", nargs="*", metavar="UNIT=VALUE")
    return p


def _override(spec: ScenarioSpec, args) -> ScenarioSpec:
    changes = {}
    if spec.cam is not None and (args.tol is not None or args.max_sweeps is not None):
        dyn = spec.cam.params
        if args.tol is not None:
            dyn = dataclasses.replace(dyn, tol=args.tol)
        if args.max_sweeps is not None:
            dyn = dataclasses.replace(dyn, max_sweeps=args.max_sweeps)
        changes["cam"] = dataclasses.replace(spec.cam, params=dyn)
    if args.max_rounds is not None:
        changes["params"] = dataclasses.replace(spec.params, max_rounds=args.max_rounds)
    return dataclasses.replace(spec, **changes) if changes else spec


def _need(spec: ScenarioSpec, what: str):
    if what == "net" and spec.net is None:
        raise ValidationError("this scenario has no Bayesian network")
    if what == "cam" and spec.cam is None:
        raise ValidationError("this scenario has no memory store")


def _clamped_cam(spec: ScenarioSpec, clamp_args, input_args=()) -> memory.CamNetwork:
    cam = spec.cam
    a_max = cam.params.a_max
    if clamp_args is None and not input_args:
        cue = {u: memory.Clamp(a_max) for u in spec.cue}
    else:
        cue = {u: memory.Clamp(a_max if v is None else v) for u, v in _floats(clamp_args, "--clamp").items()}
    for u, v in _floats(input_args, "--input").items():
        if v is None:
            raise UsageError("--input needs a number")
        cue[u] = memory.Input(v)
    return memory.clamp(cam, cue)


# -- subcommands -------------------------------------------------------------
def cmd_validate(spec, args, figs):
    if args.canonical:
        return None, scenario.serialize(spec)
    data = {
        "valid": True,
        "variables": len(spec.net.variables) if spec.net else 0,
        "edges": len(spec.net.edges) if spec.net else 0,
        "frames": len(spec.graph.frames) if spec.graph else 0,
        "memories": len(spec.cam.memories) if spec.cam else 0,
        "units": len(spec.cam.units) if spec.cam else 0,
        "bindings": len(spec.bindings),
        "decision": spec.decision is not None,
    }
    return data, None


def cmd_infer(spec, args, figs):
    _need(spec, "net")
    evidence = _pairs(args.evidence, "--evidence")
    if args.query:
        dists = {args.query: posterior(spec.net, evidence, args.query)}
    else:
        dists = posteriors(spec.net, evidence)
    data = {
        "evidence": evidence,
        "posteriors": {k: report.distribution(d) for k, d in dists.items()},
    }
    if spec.graph is not None:
        data["relations"] = {f"{s}->{t}": k for (s, t), k in sorted(spec.net.edge_kinds.items())}
    if figs is not None:
        figs.append(plotting.posterior_bars(dists, args.figures / "infer_posteriors.png", "posteriors"))
    return data, "\n".join(report.probability_lines(dists)) + "\n"


def cmd_settle(spec, args, figs):
    _need(spec, "cam")
    if args.without:
        spec = dataclasses.replace(spec, cam=memory.drop_memories(spec.cam, args.without), cue=())
        if args.clamp is None and not args.input:
            raise UsageError("--without needs explicit --clamp units")
    net = _clamped_cam(spec, args.clamp, args.input)
    res = memory.settle(net)
    theta = spec.params.theta_on if args.theta_on is None else args.theta_on
    data = report.settle_data(res)
    data["sign"] = report.sign(memory.synthesize_sign(res, theta))
    data["theta_on"] = theta
    if figs is not None:
        figs.append(plotting.settle_trace(res, args.figures / "settle_trace.png", theta))
    return data, None


def cmd_sensemake(spec, args, figs):
    _need(spec, "net")
    evidence = _pairs(args.evidence, "--evidence") or None
    dec = run_sensemaking(spec, cue=args.cue, evidence=evidence)
    data = report.decision_data(dec)
    if figs is not None:
        figs.append(plotting.round_posteriors(dec, args.figures / "sensemake_rounds.png"))
        last = dec.rounds[-1].settle
        if last is not None:
            figs.append(plotting.settle_trace(last, args.figures / "sensemake_settle.png", spec.params.theta_on))
    text = "\n".join(
        [f"action={dec.action}"]
        + report.probability_lines({dec.rule.query: dec.posterior})
        + [f"rounds_executed={dec.rounds_executed}", f"fixpoint={str(dec.fixpoint).lower()}"]
        + [f"evidence.{k}={v}" for k, v in sorted(dec.evidence.items())]
    )
    return data, text + "\n"


def bn_deviation(net) -> tuple[int, float]:
    """Max |VE - enumeration| over no-evidence and single-evidence queries."""
    cases, worst = 0, 0.0
    evidences = [{}] + [{v: s} for v in net.names for s in net.variables[v].states]
    for ev in evidences:
        for q in net.names:
            try:
                a = posterior(net, ev, q)
            except InferenceError:
                a = None
            try:
                b = oracle.enumerate_joint(net, ev, q)
            except InferenceError:
                b = None
            cases += 1
            if (a is None) != (b is None):
                worst = float("inf")
            elif a is not None:
                worst = max(worst, max(abs(x - y) for x, y in zip(a.probs, b.probs)))
    return cases, worst


def cmd_oracle(spec, args, figs):
    data: dict = {}
    ok = True
    if spec.net is not None:
        if args.check:
            cases, worst = bn_deviation(spec.net)
            data["bn"] = {"cases": cases, "max_deviation": worst, "tolerance": ORACLE_TOL}
            ok &= worst < ORACLE_TOL
        else:
            dists = {q: oracle.enumerate_joint(spec.net, {}, q) for q in spec.net.names}
            data["bn"] = {"priors": {k: report.distribution(d) for k, d in dists.items()}}
    if spec.cam is not None:
        cam = _clamped_cam(spec, args.clamp)
        land = oracle.min_energy_states(cam)
        marked = None
        if args.check:
            data["cam"] = oracle.settle_agreement(cam, spec.params.theta_on)
            ok &= data["cam"]["attribute_match"]
            marked = data["cam"]["settled_pattern_energy"]
        else:
            data["cam"] = {
                "free_units": len(land.free_units),
                "minimum_energy": land.minimum,
                "minimizers": [[u for u, on in p.items() if on] for p in land.minimizer_patterns()],
            }
        if figs is not None:
            figs.append(plotting.energy_landscape(land, args.figures / "oracle_energies.png", marked))
    if args.check:
        data["ok"] = bool(ok)
    return data, None


COMMANDS = {
    "validate": cmd_validate,
    "infer": cmd_infer,
    "settle": cmd_settle,
    "sensemake": cmd_sensemake,
    "oracle": cmd_oracle,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    try:
        spec = _override(scenario.load(args.file), args)
        figs: list | None = [] if args.figures else None
        data, text = COMMANDS[args.command](spec, args, figs)
        if data is not None and figs:
            data["figures"] = [str(f.name) for f in figs]
    except UsageError as exc:
        print(f"{parser.format_usage()}sensemaking: error: {exc}", file=sys.stderr)
        return 1
    except SensemakingError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, ValidationError) else 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.json and data is not None:
        sys.stdout.write(report.canonical_json({"command": args.command, **data}))
    elif text is not None and not (args.json and data is not None):
        sys.stdout.write(text)
    else:
        sys.stdout.write("\n".join(report.text_lines(data)) + "\n")

    if args.command == "oracle" and args.check and not data.get("ok", True):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
