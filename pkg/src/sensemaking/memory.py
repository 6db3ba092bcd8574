"""Content-addressable distributed memory settled by graded relaxation.

Each memory is a unit with mutually excitatory links to the units of its
attributes. Attributes with the same name are one unit, so activation
spreads between memories that share them. Declared-incompatible attributes
inhibit each other.

Dynamics (interactive-activation style, asynchronous, fixed name order)::

    net_i = sum_j w_ij * (a_j - rest) + ext_i   (+ memory_bias on memory units)
    a_i  += step * [(a_max - a_i) * max(net_i, 0) + (a_i - a_min) * min(net_i, 0)]
          - step * decay * (a_i - rest)

Units send their deviation from rest, so an undisturbed network sits exactly
at rest. The energy

    E(a) = -sum_{i<j} w_ij b_i b_j - sum_i ext_i b_i + sum_{i free} phi_i(a_i),
    b_i = a_i - rest

is non-increasing under these updates as long as
``step * (N_i + decay) <= 1`` for every unit, where ``N_i`` bounds |net_i|
(see :func:`stability_bound`). ``phi_i`` is the decay potential, the
integral of ``decay * (x - rest) / g(x)`` from rest, with ``g(x) = a_max - x``
above rest and ``x - a_min`` below. Its slope at the settling point of a
unit with input ``n`` equals ``n``, which is what makes each single-unit
update a descent step. It diverges at the bounds, so it is continued
linearly beyond the settling points for |net| = N_i; activations never
reach that region under the dynamics, and the continuation keeps on/off
configurations at a_max finite for the exhaustive oracle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import (
    DuplicateMemory,
    EmptyMemory,
    SelfIncompatibility,
    UnknownUnit,
    ValidationError,
)

log = logging.getLogger(__name__)

MEMORY = "memory"
ATTRIBUTE = "attribute"


@dataclass(frozen=True)
class Dynamics:
    step: float = 0.1
    decay: float = 0.1
    a_max: float = 1.0
    a_min: float = -0.2
    rest: float = -0.1
    tol: float = 1e-6
    max_sweeps: int = 10_000
    # Constant input to every memory unit. A negative value keeps a memory
    # dormant until enough of its attributes agree.
    memory_bias: float = 0.0

    def __post_init__(self):
        if not self.a_min <= self.rest <= self.a_max or self.a_min >= self.a_max:
            raise ValidationError("need a_min <= rest <= a_max and a_min < a_max")
        if self.step <= 0 or self.decay < 0 or self.tol <= 0 or self.max_sweeps < 1:
            raise ValidationError("step and tol must be positive, decay >= 0, max_sweeps >= 1")


@dataclass(frozen=True)
class WeightConfig:
    excitatory: float = 1.0
    inhibitory: float = 1.0  # magnitude; inhibitory links get -inhibitory
    normalize: bool = True  # divide every weight by the largest unit degree
    overrides: tuple[tuple[str, str, float], ...] = ()


@dataclass(frozen=True)
class Unit:
    name: str
    kind: str


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    weight: float


@dataclass(frozen=True)
class Clamp:
    """Hold a unit at ``value`` for the whole settle."""

    value: float


@dataclass(frozen=True)
class Input:
    """Constant external input added to a unit's net input."""

    value: float


Cue = Mapping[str, Union[Clamp, Input, float]]


@dataclass(frozen=True)
class CamNetwork:
    units: tuple[Unit, ...]
    memories: Mapping[str, tuple[str, ...]]
    incompatible: tuple[tuple[str, str], ...]
    weights: np.ndarray = field(repr=False)
    params: Dynamics = Dynamics()
    weight_config: WeightConfig = WeightConfig()
    external: Mapping[str, float] = field(default_factory=dict)
    clamped: Mapping[str, float] = field(default_factory=dict)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(u.name for u in self.units)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownUnit(f"unknown unit {name!r}") from None

    def kind(self, name: str) -> str:
        return self.units[self.index(name)].kind

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(u.name for u in self.units if u.kind == ATTRIBUTE)

    @property
    def links(self) -> list[Link]:
        names = self.names
        out = []
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                if self.weights[i, j] != 0.0:
                    out.append(Link(names[i], names[j], float(self.weights[i, j])))
        return out

    def memories_with(self, attribute: str) -> tuple[str, ...]:
        return tuple(m for m, attrs in self.memories.items() if attribute in attrs)

    def external_vector(self) -> np.ndarray:
        bias = self.params.memory_bias
        return np.array(
            [self.external.get(u.name, 0.0) + (bias if u.kind == MEMORY else 0.0) for u in self.units]
        )

    def initial_activations(self) -> np.ndarray:
        return np.array([self.clamped.get(n, self.params.rest) for n in self.names])


def build_cam(
    memories: Sequence[tuple[str, Sequence[str]]],
    incompatible_pairs: Sequence[tuple[str, str]] = (),
    weights: WeightConfig = WeightConfig(),
    params: Dynamics = Dynamics(),
) -> CamNetwork:
    mems: dict[str, tuple[str, ...]] = {}
    for name, attrs in memories:
        if name in mems:
            raise DuplicateMemory(f"memory {name!r} declared twice")
        attrs = tuple(attrs)
        if not attrs:
            raise EmptyMemory(f"memory {name!r} has no attributes")
        if len(set(attrs)) != len(attrs):
            raise ValidationError(f"memory {name!r} lists an attribute twice")
        mems[name] = attrs

    attr_names = {a for attrs in mems.values() for a in attrs}
    clash = attr_names & set(mems)
    if clash:
        raise ValidationError(f"names used for both a memory and an attribute: {sorted(clash)}")

    pairs = []
    for a, b in incompatible_pairs:
        if a == b:
            raise SelfIncompatibility(f"attribute {a!r} declared incompatible with itself")
        for x in (a, b):
            if x not in attr_names:
                raise UnknownUnit(f"incompatible pair names unknown attribute {x!r}")
        pair = tuple(sorted((a, b)))
        if pair in pairs:
            raise ValidationError(f"incompatible pair {list(pair)} declared twice")
        pairs.append(pair)

    units = sorted(
        [Unit(m, MEMORY) for m in mems] + [Unit(a, ATTRIBUTE) for a in attr_names],
        key=lambda u: u.name,
    )
    idx = {u.name: i for i, u in enumerate(units)}
    n = len(units)
    w = np.zeros((n, n))
    for m, attrs in mems.items():
        for a in attrs:
            w[idx[m], idx[a]] = w[idx[a], idx[m]] = weights.excitatory
    for a, b in pairs:
        w[idx[a], idx[b]] = w[idx[b], idx[a]] = -weights.inhibitory

    if weights.normalize and n:
        degree = int((w != 0).sum(axis=1).max())
        if degree:
            w = w / degree

    for a, b, value in weights.overrides:
        if a not in idx or b not in idx:
            raise UnknownUnit(f"weight override names unknown unit {a if a not in idx else b!r}")
        current = w[idx[a], idx[b]]
        if current == 0.0:
            raise ValidationError(f"weight override for {a!r}-{b!r}: no such link")
        if (current > 0) != (value > 0):
            raise ValidationError(
                f"weight override for {a!r}-{b!r} would flip an "
                f"{'excitatory' if current > 0 else 'inhibitory'} link"
            )
        w[idx[a], idx[b]] = w[idx[b], idx[a]] = float(value)

    return CamNetwork(
        units=tuple(units),
        memories={m: mems[m] for m in sorted(mems)},
        incompatible=tuple(sorted(pairs)),
        weights=w,
        params=params,
        weight_config=weights,
    )


def clamp(net: CamNetwork, cue: Cue) -> CamNetwork:
    """Return a copy of ``net`` with the cue applied.

    Bare numbers are hard clamps. A later entry for the same unit replaces
    an earlier clamp or input on it.
    """
    if not cue:
        return net
    external = dict(net.external)
    clamped = dict(net.clamped)
    p = net.params
    for unit, how in cue.items():
        net.index(unit)
        if isinstance(how, (int, float)):
            how = Clamp(float(how))
        if isinstance(how, Clamp):
            if not p.a_min <= how.value <= p.a_max:
                raise ValidationError(
                    f"clamp value {how.value} for {unit!r} outside [{p.a_min}, {p.a_max}]"
                )
            clamped[unit] = float(how.value)
            external.pop(unit, None)
        elif isinstance(how, Input):
            external[unit] = float(how.value)
            clamped.pop(unit, None)
        else:
            raise TypeError(f"cue entries must be Clamp, Input or float, got {how!r}")
    return replace(net, external=external, clamped=clamped)


def drop_memories(net: CamNetwork, names: Sequence[str]) -> CamNetwork:
    """Rebuild ``net`` without the named memories.

    Attributes no remaining memory owns disappear with them, as do
    incompatibilities and weight overrides that mention a vanished unit.
    Clamps and inputs are not carried over.
    """
    for n in names:
        if n not in net.memories:
            raise UnknownUnit(f"no memory named {n!r}")
    kept = [(m, a) for m, a in net.memories.items() if m not in names]
    units = {m for m, _ in kept} | {x for _, a in kept for x in a}
    wc = net.weight_config
    wc = replace(wc, overrides=tuple(o for o in wc.overrides if o[0] in units and o[1] in units))
    pairs = [p for p in net.incompatible if p[0] in units and p[1] in units]
    return build_cam(kept, pairs, wc, net.params)


# -- energy ------------------------------------------------------------------
def net_bounds(net: CamNetwork) -> np.ndarray:
    """Upper bound on |net input| of every unit over all reachable states."""
    p = net.params
    span = max(p.a_max - p.rest, p.rest - p.a_min)
    return np.abs(net.weights).sum(axis=1) * span + np.abs(net.external_vector())


def stability_bound(net: CamNetwork) -> float:
    """Largest step for which boundedness and energy descent are guaranteed."""
    if not net.units:
        return math.inf
    worst = float(net_bounds(net).max()) + net.params.decay
    return math.inf if worst == 0 else 1.0 / worst


def decay_potential(a: float, bound: float, p: Dynamics) -> float:
    d, r = p.decay, p.rest
    if d == 0.0 or bound == 0.0:
        return 0.0
    hi = (bound * p.a_max + d * r) / (bound + d)
    lo = (bound * p.a_min + d * r) / (bound + d)

    def upper(x):
        return d * ((p.a_max - r) * math.log((p.a_max - r) / (p.a_max - x)) - (x - r))

    def lower(x):
        return d * ((x - r) - (r - p.a_min) * math.log((x - p.a_min) / (r - p.a_min)))

    if a > hi:
        return upper(hi) + bound * (a - hi)
    if a >= r:
        return upper(a)
    if a >= lo:
        return lower(a)
    return lower(lo) - bound * (a - lo)


def energy(net: CamNetwork, activations: Mapping[str, float] | Sequence[float]) -> float:
    if isinstance(activations, Mapping):
        a = np.array([activations[n] for n in net.names], dtype=float)
    else:
        a = np.asarray(activations, dtype=float)
    p = net.params
    b = a - p.rest
    pair = -0.5 * float(b @ net.weights @ b)
    ext = -float(net.external_vector() @ b)
    bounds = net_bounds(net)
    penalty = 0.0
    for i, name in enumerate(net.names):
        if name not in net.clamped:
            penalty += decay_potential(float(a[i]), float(bounds[i]), p)
    return pair + ext + penalty


# -- settling ----------------------------------------------------------------
@dataclass(frozen=True)
class SettleResult:
    network: CamNetwork = field(repr=False)
    activations: Mapping[str, float]
    sweeps: int
    converged: bool
    energies: tuple[float, ...]  # energies[0] is the starting state
    trajectory: tuple[tuple[float, ...], ...] = field(repr=False)  # state after each sweep
    last_change: float = 0.0


def settle(net: CamNetwork) -> SettleResult:
    p = net.params
    if p.step > stability_bound(net):
        log.warning(
            "step %.4g exceeds stability bound %.4g; energy descent is not guaranteed",
            p.step,
            stability_bound(net),
        )
    names = net.names
    w = net.weights
    ext = net.external_vector()
    a = net.initial_activations()
    free = [i for i, n in enumerate(names) if n not in net.clamped]

    energies = [energy(net, a)]
    trajectory = []
    converged = False
    sweeps = 0
    change = 0.0
    while sweeps < p.max_sweeps:
        sweeps += 1
        change = 0.0
        for i in free:
            ai = a[i]
            n_in = float(w[i] @ (a - p.rest)) + ext[i]
            if n_in > 0:
                delta = (p.a_max - ai) * n_in
            else:
                delta = (ai - p.a_min) * n_in
            new = ai + p.step * delta - p.step * p.decay * (ai - p.rest)
            new = min(p.a_max, max(p.a_min, new))
            change = max(change, abs(new - ai))
            a[i] = new
        energies.append(energy(net, a))
        trajectory.append(tuple(float(x) for x in a))
        if change < p.tol:
            converged = True
            break

    return SettleResult(
        network=net,
        activations={n: float(x) for n, x in zip(names, a)},
        sweeps=sweeps,
        converged=converged,
        energies=tuple(energies),
        trajectory=tuple(trajectory),
        last_change=change,
    )


# -- synthesis ---------------------------------------------------------------
@dataclass(frozen=True)
class SynthesizedSign:
    attributes: tuple[str, ...]
    memories: tuple[str, ...]
    recombined: bool


def synthesize_sign(result: SettleResult, theta_on: float = 0.5) -> SynthesizedSign:
    """Read the settled pattern out as a sign: the attributes at or above
    ``theta_on`` and every memory that owns one of them."""
    net = result.network
    p = net.params
    if not p.rest < theta_on <= p.a_max:
        raise ValidationError(f"theta_on must lie in (rest, a_max], got {theta_on}")
    active = tuple(a for a in net.attributes if result.activations[a] >= theta_on)
    mems = sorted({m for a in active for m in net.memories_with(a)})
    return SynthesizedSign(active, tuple(mems), len(mems) >= 2)
