"""Frames, sign relations, and their compilation into a Bayesian network.

A frame is a named group of elements. A sign relation points from a sign to
what it denotes; it is *within*-frame when both ends belong to the same frame
and *across*-frame otherwise. The relation set becomes the edge set of a
network with one binary (true/false) variable per element. The within/across
label rides along as edge metadata and never changes a probability.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .bayesnet import BayesNet, Cpt, Distribution, Variable, build_network, posterior
from .errors import (
    CycleDetected,
    DuplicateElement,
    MissingCptAssignment,
    ParentMismatch,
    SelfRelation,
    UnknownElement,
    UnknownVariable,
    ValidationError,
)

WITHIN = "within"
ACROSS = "across"
ELEMENT_STATES = ("true", "false")


@dataclass(frozen=True)
class Frame:
    name: str
    elements: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise ValidationError(f"frame {self.name!r} has no elements")
        if len(set(self.elements)) != len(self.elements):
            raise DuplicateElement(f"frame {self.name!r} lists an element twice")


@dataclass(frozen=True)
class SignRelation:
    source: str
    target: str
    kind: str | None = None


@dataclass(frozen=True)
class FrameGraph:
    frames: tuple[Frame, ...]
    relations: tuple[SignRelation, ...]

    @property
    def elements(self) -> tuple[str, ...]:
        return tuple(e for f in self.frames for e in f.elements)

    def frame_of(self, element: str) -> str:
        for f in self.frames:
            if element in f.elements:
                return f.name
        raise UnknownElement(f"unknown element {element!r}")

    def incoming(self, element: str) -> tuple[str, ...]:
        return tuple(r.source for r in self.relations if r.target == element)


def _resolve(frames: Sequence[Frame], ref: str) -> str:
    """Map ``element`` or ``frame.element`` to the bare element name."""
    for f in frames:
        if ref in f.elements:
            return ref
    if "." in ref:
        fname, _, elem = ref.partition(".")
        for f in frames:
            if f.name == fname and elem in f.elements:
                return elem
    raise UnknownElement(f"relation endpoint {ref!r} is not an element of any frame")


def classify_relations(
    frames: Iterable[Frame], relations: Iterable[SignRelation | tuple[str, str]]
) -> FrameGraph:
    frames = tuple(frames)
    names = [f.name for f in frames]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate frame name")
    seen: dict[str, str] = {}
    for f in frames:
        for e in f.elements:
            if e in seen:
                raise DuplicateElement(
                    f"element {e!r} appears in frames {seen[e]!r} and {f.name!r}"
                )
            seen[e] = f.name

    out = []
    pairs = set()
    for r in relations:
        src, dst = (r.source, r.target) if isinstance(r, SignRelation) else r
        src, dst = _resolve(frames, src), _resolve(frames, dst)
        if src == dst:
            raise SelfRelation(f"element {src!r} related to itself")
        if (src, dst) in pairs:
            raise ValidationError(f"relation {src!r} -> {dst!r} declared twice")
        pairs.add((src, dst))
        kind = WITHIN if seen[src] == seen[dst] else ACROSS
        if isinstance(r, SignRelation) and r.kind is not None and r.kind != kind:
            raise ValidationError(
                f"relation {src!r} -> {dst!r} declared {r.kind!r} but its endpoints make it {kind!r}"
            )
        out.append(SignRelation(src, dst, kind))

    _check_acyclic(seen, pairs)
    return FrameGraph(frames, tuple(sorted(out, key=lambda r: (r.source, r.target))))


def _check_acyclic(nodes: Iterable[str], pairs: set[tuple[str, str]]) -> None:
    indeg = {n: 0 for n in nodes}
    for _, d in pairs:
        indeg[d] += 1
    ready = [n for n, k in indeg.items() if k == 0]
    done = 0
    while ready:
        n = ready.pop()
        done += 1
        for s, d in pairs:
            if s == n:
                indeg[d] -= 1
                if indeg[d] == 0:
                    ready.append(d)
    if done != len(indeg):
        raise CycleDetected(
            f"sign relations form a cycle among {sorted(n for n, k in indeg.items() if k > 0)}"
        )


def compile_to_bn(graph: FrameGraph, cpt_assignments: Mapping[str, Cpt]) -> BayesNet:
    """One binary variable per element, one edge per relation.

    Each element's CPT must list exactly the sources of its incoming
    relations as parents (in any order).
    """
    variables = [Variable(e, ELEMENT_STATES) for e in graph.elements]
    cpts = []
    for e in graph.elements:
        if e not in cpt_assignments:
            raise MissingCptAssignment(f"element {e!r} has no CPT")
        cpt = cpt_assignments[e]
        if set(cpt.parents) != set(graph.incoming(e)) or len(cpt.parents) != len(set(cpt.parents)):
            raise ParentMismatch(
                f"CPT of {e!r} has parents {sorted(cpt.parents)} but its incoming relations "
                f"come from {sorted(graph.incoming(e))}"
            )
        cpts.append(cpt)
    extra = set(cpt_assignments) - set(graph.elements)
    if extra:
        raise UnknownElement(f"CPTs given for non-elements {sorted(extra)}")
    net = build_network(variables, cpts)
    kinds = {(r.source, r.target): r.kind for r in graph.relations}
    return replace(net, edge_kinds=kinds)


# -- interpretation ----------------------------------------------------------
@dataclass(frozen=True)
class Denotation:
    element: str
    posterior: Distribution
    probability: float  # posterior of the first ("true") state
    flagged: bool
    chain: tuple[SignRelation, ...]


@dataclass(frozen=True)
class DenotationReport:
    evidence: Mapping[str, str]
    threshold: float
    entries: tuple[Denotation, ...]

    @property
    def flagged(self) -> tuple[str, ...]:
        return tuple(d.element for d in self.entries if d.flagged)


def sign_chain(net: BayesNet, signs: Iterable[str], target: str) -> tuple[SignRelation, ...]:
    """Shortest directed path of relations from any instantiated sign to ``target``.

    Empty when the target is itself a sign or cannot be reached downstream.
    BFS visits children in name order, so the chain is deterministic.
    """
    signs = sorted(set(signs))
    if target in signs:
        return ()
    prev: dict[str, str] = {}
    queue = deque(signs)
    seen = set(signs)
    while queue:
        node = queue.popleft()
        for child in sorted(net.children(node)):
            if child in seen:
                continue
            seen.add(child)
            prev[child] = node
            if child == target:
                path = []
                cur = target
                while cur in prev:
                    p = prev[cur]
                    path.append(SignRelation(p, cur, net.edge_kinds.get((p, cur))))
                    cur = p
                return tuple(reversed(path))
            queue.append(child)
    return ()


def interpret_sign(
    net: BayesNet,
    sign_evidence: Mapping[str, str] | None,
    target_elements: Sequence[str],
    threshold: float = 0.5,
) -> DenotationReport:
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError(f"threshold must lie in [0, 1], got {threshold}")
    sign_evidence = dict(sign_evidence or {})
    entries = []
    for t in target_elements:
        if t not in net.variables:
            raise UnknownVariable(f"unknown target {t!r}")
        dist = posterior(net, sign_evidence, t)
        p = dist.probs[0]
        entries.append(
            Denotation(t, dist, p, p >= threshold, sign_chain(net, sign_evidence, t))
        )
    return DenotationReport(sign_evidence, threshold, tuple(entries))
