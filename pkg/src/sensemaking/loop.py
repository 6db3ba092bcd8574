"""The cue -> memory -> evidence -> inference -> decision loop.

Each round clamps the cue units at ``a_max``, settles the memory network
from rest, reads bound attributes out as hard evidence, adds that to the
evidence held so far and re-runs inference on the decision variable. The
loop stops once a round extracts exactly what the previous round did (the
empty extraction counts as round 0), or after ``max_rounds``.

Nothing flows back from the network's posteriors into the memory network,
so with a fixed cue the loop settles in at most two rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import memory
from .bayesnet import BayesNet, Distribution, check_evidence, posterior
from .errors import (
    ConflictingEvidence,
    ImpossibleEvidence,
    UnknownReference,
    UnknownUnit,
    ValidationError,
    VariableMismatch,
)
from .frames import FrameGraph


@dataclass(frozen=True)
class Binding:
    attribute: str
    variable: str
    on: str | None
    off: str | None = None


@dataclass(frozen=True)
class DecisionRule:
    query: str
    trigger: str
    threshold: float = 0.5
    action_if_high: str = "act"
    action_if_low: str = "wait"

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError(f"decision threshold must lie in [0, 1], got {self.threshold}")


@dataclass(frozen=True)
class LoopParams:
    theta_on: float = 0.5
    theta_off: float = 0.0
    max_rounds: int = 5

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValidationError("max_rounds must be at least 1")
        if not self.theta_off < self.theta_on:
            raise ValidationError(
                f"theta_off ({self.theta_off}) must be below theta_on ({self.theta_on})"
            )


@dataclass(frozen=True)
class ScenarioSpec:
    net: BayesNet | None
    cam: memory.CamNetwork | None = None
    bindings: tuple[Binding, ...] = ()
    decision: DecisionRule | None = None
    params: LoopParams = LoopParams()
    graph: FrameGraph | None = None
    cue: tuple[str, ...] = ()
    evidence: Mapping[str, str] = field(default_factory=dict)
    description: str = ""
    notes: tuple[str, ...] = ()
    # (variable, parent-state tuple) pairs whose CPT row was fitted rather than read off a source
    fitted: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "bindings", tuple(self.bindings))
        object.__setattr__(self, "cue", tuple(self.cue))
        object.__setattr__(self, "notes", tuple(self.notes))
        self.validate()

    def validate(self) -> None:
        net, cam = self.net, self.cam
        if net is None and cam is None:
            raise ValidationError("scenario needs a network, a memory store, or both")
        if net is not None and self.evidence:
            check_evidence(net, self.evidence)
        seen = set()
        for b in self.bindings:
            if b.attribute in seen:
                raise ValidationError(f"attribute {b.attribute!r} bound twice")
            seen.add(b.attribute)
            if cam is None or net is None:
                raise UnknownReference("bindings need both a network and a memory store")
            if b.attribute not in cam.attributes:
                raise UnknownReference(f"binding names unknown attribute {b.attribute!r}")
            if b.variable not in net.variables:
                raise UnknownReference(f"binding names unknown variable {b.variable!r}")
            if b.on is None and b.off is None:
                raise ValidationError(f"binding for {b.attribute!r} has neither an on nor an off state")
            for s in (b.on, b.off):
                if s is not None:
                    net.variables[b.variable].index(s)
        if self.decision is not None:
            if net is None:
                raise UnknownReference("a decision rule needs a network")
            if self.decision.query not in net.variables:
                raise UnknownReference(f"decision query {self.decision.query!r} is not a variable")
            net.variables[self.decision.query].index(self.decision.trigger)
        for u in self.cue:
            if cam is None:
                raise UnknownReference("a cue needs a memory store")
            cam.index(u)
        if cam is not None:
            p = cam.params
            if not p.rest < self.params.theta_on <= p.a_max:
                raise ValidationError(f"theta_on must lie in (rest, a_max], got {self.params.theta_on}")


# -- evidence ----------------------------------------------------------------
def extract_evidence(
    settled: memory.SettleResult | Mapping[str, float],
    bindings: Sequence[Binding],
    theta_on: float = 0.5,
    theta_off: float = 0.0,
) -> dict[str, str]:
    """Bound attributes at or above ``theta_on`` give their on-state, those at
    or below ``theta_off`` their off-state; anything in between says nothing."""
    if not theta_off < theta_on:
        raise ValidationError(f"theta_off ({theta_off}) must be below theta_on ({theta_on})")
    acts = settled.activations if isinstance(settled, memory.SettleResult) else settled
    out: dict[str, str] = {}
    source: dict[str, str] = {}
    for b in sorted(bindings, key=lambda b: b.attribute):
        if b.attribute not in acts:
            raise UnknownUnit(f"binding names unknown unit {b.attribute!r}")
        a = acts[b.attribute]
        state = b.on if a >= theta_on else b.off if a <= theta_off else None
        if state is None:
            continue
        if b.variable in out and out[b.variable] != state:
            raise ConflictingEvidence(
                f"{source[b.variable]!r} says {b.variable}={out[b.variable]} "
                f"but {b.attribute!r} says {b.variable}={state}"
            )
        out[b.variable] = state
        source[b.variable] = b.attribute
    return out


def decide(post: Distribution, rule: DecisionRule) -> str:
    """Protective action when P(trigger) >= threshold, ties included."""
    if post.variable != rule.query:
        raise VariableMismatch(
            f"posterior is over {post.variable!r} but the rule queries {rule.query!r}"
        )
    return rule.action_if_high if post[rule.trigger] >= rule.threshold else rule.action_if_low


# -- the loop ----------------------------------------------------------------
@dataclass(frozen=True)
class Round:
    index: int
    activations: Mapping[str, float]
    sweeps: int
    converged: bool
    sign: memory.SynthesizedSign | None
    extracted: Mapping[str, str]
    evidence: Mapping[str, str]  # everything held after this round
    posterior: Distribution
    settle: memory.SettleResult | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class SensemakingDecision:
    action: str
    posterior: Distribution
    initial: Distribution
    rounds: tuple[Round, ...]
    fixpoint: bool
    rule: DecisionRule
    cue: tuple[str, ...] = ()

    @property
    def rounds_executed(self) -> int:
        return len(self.rounds)

    @property
    def evidence(self) -> Mapping[str, str]:
        return self.rounds[-1].evidence if self.rounds else {}


def _merge(held: dict[str, str], new: Mapping[str, str], k: int) -> dict[str, str]:
    out = dict(held)
    for var, state in new.items():
        if var in out and out[var] != state:
            raise ConflictingEvidence(
                f"round {k} extracted {var}={state} but {var}={out[var]} is already held"
            )
        out[var] = state
    return out


def run_sensemaking(
    scenario: ScenarioSpec,
    cue: Sequence[str] | None = None,
    evidence: Mapping[str, str] | None = None,
) -> SensemakingDecision:
    net, cam, rule = scenario.net, scenario.cam, scenario.decision
    if net is None or rule is None:
        raise ValidationError("sensemaking needs a network and a decision rule")
    cue = tuple(scenario.cue if cue is None else cue)
    held = dict(scenario.evidence if evidence is None else evidence)
    check_evidence(net, held)
    params = scenario.params

    initial = posterior(net, held, rule.query)

    clamped = None
    if cam is not None:
        clamped = memory.clamp(cam, {u: memory.Clamp(cam.params.a_max) for u in cue})
    elif cue:
        raise UnknownReference("a cue needs a memory store")

    rounds: list[Round] = []
    previous: Mapping[str, str] = {}
    fixpoint = False
    for k in range(1, params.max_rounds + 1):
        if clamped is not None:
            res = memory.settle(clamped)
            sign = memory.synthesize_sign(res, params.theta_on)
            extracted = extract_evidence(res, scenario.bindings, params.theta_on, params.theta_off)
            acts, sweeps, conv = res.activations, res.sweeps, res.converged
        else:
            res, sign, extracted, acts, sweeps, conv = None, None, {}, {}, 0, True
        held = _merge(held, extracted, k)
        try:
            post = posterior(net, held, rule.query)
        except ImpossibleEvidence as exc:
            err = ImpossibleEvidence(f"round {k}: {exc}")
            err.round = k
            err.trace = tuple(rounds)
            err.evidence = dict(held)
            raise err from exc
        rounds.append(Round(k, acts, sweeps, conv, sign, extracted, dict(held), post, res))
        if extracted == previous:
            fixpoint = True
            break
        previous = extracted

    final = rounds[-1].posterior
    return SensemakingDecision(decide(final, rule), final, initial, tuple(rounds), fixpoint, rule, cue)

