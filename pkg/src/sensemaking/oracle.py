"""Brute-force references the engine is checked against.

``enumerate_joint`` sums the full joint distribution term by term in plain
Python; it reads only the CPT rows, never the factor tables used by variable
elimination. ``min_energy_states`` scores every on/off configuration of the
free units of a memory network.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

from .bayesnet import BayesNet, Distribution, Evidence
from .errors import ImpossibleEvidence, TooLarge, UnknownState, UnknownVariable
from . import memory

MAX_JOINT = 2**22
MAX_FREE_UNITS = 20


@dataclass(frozen=True)
class JointTable:
    variables: tuple[str, ...]
    assignments: tuple[tuple[str, ...], ...]
    probs: tuple[float, ...]


def joint_table(net: BayesNet) -> JointTable:
    names = tuple(net.names)
    size = math.prod(len(net.variables[n].states) for n in names)
    if size > MAX_JOINT:
        raise TooLarge(f"joint has {size} assignments (limit {MAX_JOINT})")
    assignments = []
    probs = []
    for combo in itertools.product(*(net.variables[n].states for n in names)):
        a = dict(zip(names, combo))
        p = 1.0
        for n in names:
            cpt = net.cpts[n]
            row = cpt.rows[tuple(a[q] for q in cpt.parents)]
            p *= row[net.variables[n].states.index(a[n])]
        assignments.append(combo)
        probs.append(p)
    return JointTable(names, tuple(assignments), tuple(probs))


def enumerate_joint(net: BayesNet, evidence: Evidence | None, query: str) -> Distribution:
    evidence = dict(evidence or {})
    for var, state in list(evidence.items()) + [(query, None)]:
        if var not in net.variables:
            raise UnknownVariable(f"unknown variable {var!r}")
        if state is not None and state not in net.variables[var].states:
            raise UnknownState(f"{state!r} is not a state of {var!r}")
    table = joint_table(net)
    pos = {n: i for i, n in enumerate(table.variables)}
    states = net.variables[query].states
    mass = dict.fromkeys(states, 0.0)
    for combo, p in zip(table.assignments, table.probs):
        if all(combo[pos[v]] == s for v, s in evidence.items()):
            mass[combo[pos[query]]] += p
    total = sum(mass.values())
    if total <= 0.0:
        raise ImpossibleEvidence(f"evidence {evidence} has probability 0")
    return Distribution(query, states, tuple(mass[s] / total for s in states))


# -- memory network ----------------------------------------------------------
@dataclass(frozen=True)
class EnergyLandscape:
    free_units: tuple[str, ...]
    energies: Mapping[tuple[bool, ...], float]
    minimizers: tuple[tuple[bool, ...], ...]
    minimum: float

    def minimizer_patterns(self) -> list[dict[str, bool]]:
        return [dict(zip(self.free_units, m)) for m in self.minimizers]


def min_energy_states(
    cam: "memory.CamNetwork", clamps: Mapping[str, float] | None = None, tie_tol: float = 1e-12
) -> EnergyLandscape:
    """Exhaustive search over free units at the two levels a_max (on) and rest (off).

    Clamped units are held at their clamp value. Minimizers within ``tie_tol``
    of the minimum are all reported, ordered lexicographically with on < off.
    """
    if clamps is not None:
        cam = memory.clamp(cam, {u: memory.Clamp(v) for u, v in clamps.items()})
    free = tuple(u for u in cam.names if u not in cam.clamped)
    if len(free) > MAX_FREE_UNITS:
        raise TooLarge(f"{len(free)} free units (limit {MAX_FREE_UNITS})")
    p = cam.params
    base = cam.initial_activations()
    idx = {u: i for i, u in enumerate(cam.names)}
    energies = {}
    for bits in itertools.product((True, False), repeat=len(free)):
        a = base.copy()
        for u, on in zip(free, bits):
            a[idx[u]] = p.a_max if on else p.rest
        energies[bits] = memory.energy(cam, a)
    lowest = min(energies.values())
    minimizers = tuple(b for b, e in energies.items() if e - lowest <= tie_tol)
    return EnergyLandscape(free, energies, minimizers, lowest)


def settle_agreement(cam: memory.CamNetwork, theta_on: float = 0.5) -> dict:
    """Settle ``cam`` and compare its thresholded pattern with the minimizers."""
    res = memory.settle(cam)
    land = min_energy_states(cam)
    free = land.free_units
    settled = tuple(res.activations[u] >= theta_on for u in free)
    attrs = [i for i, u in enumerate(free) if cam.kind(u) == memory.ATTRIBUTE]
    mins_attr = {tuple(m[i] for i in attrs) for m in land.minimizers}
    return {
        "free_units": len(free),
        "settled_pattern": [u for u, on in zip(free, settled) if on],
        "minimizers": [[u for u, on in zip(free, m) if on] for m in land.minimizers],
        "minimum_energy": land.minimum,
        "settled_pattern_energy": land.energies[settled],
        "attribute_match": tuple(settled[i] for i in attrs) in mins_attr,
        "full_match": settled in set(land.minimizers),
        "converged": res.converged,
    }
