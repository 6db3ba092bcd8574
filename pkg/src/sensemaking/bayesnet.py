"""Discrete Bayesian networks and exact inference by variable elimination.

A network is a set of finite-state variables and one conditional probability
table per variable. Inference multiplies the (evidence-reduced) tables and
sums out every variable other than the query, in a min-fill order.

State order matters: for the binary fixtures the first state is the
"true/present" state, so a prior of ``[0.7, 0.3]`` means P(X = first) = 0.7.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CycleDetected,
    DuplicateVariable,
    ImpossibleEvidence,
    MissingCpt,
    RowNotNormalized,
    UnknownParent,
    UnknownState,
    UnknownVariable,
    ValidationError,
)

ROW_TOL = 1e-9

Evidence = Mapping[str, str]


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError("variable name must be a nonempty string")
        if len(self.states) < 2:
            raise ValidationError(f"variable {self.name!r} needs at least 2 states")
        if len(set(self.states)) != len(self.states):
            raise ValidationError(f"variable {self.name!r} has duplicate state labels")

    @property
    def card(self) -> int:
        return len(self.states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownState(
                f"{state!r} is not a state of {self.name!r} (states: {list(self.states)})"
            ) from None


@dataclass(frozen=True)
class Cpt:
    """P(child | parents). ``rows`` maps a tuple of parent states, in the
    declared parent order, to a probability vector over the child's states."""

    child: str
    parents: tuple[str, ...]
    rows: Mapping[tuple[str, ...], tuple[float, ...]]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(
            self,
            "rows",
            {tuple(k): tuple(float(p) for p in v) for k, v in dict(self.rows).items()},
        )


@dataclass(frozen=True)
class Distribution:
    variable: str
    states: tuple[str, ...]
    probs: tuple[float, ...]

    def __getitem__(self, state: str) -> float:
        return self.probs[self.states.index(state)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.states, self.probs))


@dataclass(frozen=True)
class BayesNet:
    variables: Mapping[str, Variable]
    cpts: Mapping[str, Cpt]
    edges: tuple[tuple[str, str], ...]
    topological_order: tuple[str, ...]
    _tables: Mapping[str, np.ndarray] = field(repr=False, compare=False)
    # Reporting metadata only (e.g. within/across-frame labels); never read by inference.
    edge_kinds: Mapping[tuple[str, str], str] = field(default_factory=dict, compare=False)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.variables)

    def parents(self, name: str) -> tuple[str, ...]:
        return self.cpts[name].parents

    def children(self, name: str) -> tuple[str, ...]:
        return tuple(c for p, c in self.edges if p == name)

    def card(self, name: str) -> int:
        return self.variables[name].card

    def table(self, name: str) -> np.ndarray:
        """CPT as an array with axes (parents..., child)."""
        return self._tables[name]

    def variable(self, name: str) -> Variable:
        try:
            return self.variables[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None


def build_network(variables: Iterable[Variable], cpts: Iterable[Cpt]) -> BayesNet:
    variables = list(variables)
    cpts = list(cpts)
    if not variables:
        raise ValidationError("a network needs at least one variable")

    by_name: dict[str, Variable] = {}
    for v in variables:
        if v.name in by_name:
            raise DuplicateVariable(f"variable {v.name!r} declared twice")
        by_name[v.name] = v

    by_child: dict[str, Cpt] = {}
    for i, c in enumerate(cpts):
        if c.child not in by_name:
            raise UnknownVariable(f"cpts[{i}]: CPT for undeclared variable {c.child!r}")
        if c.child in by_child:
            raise DuplicateVariable(f"cpts[{i}]: second CPT for {c.child!r}")
        by_child[c.child] = c
    for name in by_name:
        if name not in by_child:
            raise MissingCpt(f"variable {name!r} has no CPT")

    for c in cpts:
        for p in c.parents:
            if p not in by_name:
                raise UnknownParent(f"CPT of {c.child!r} names unknown parent {p!r}")
        if len(set(c.parents)) != len(c.parents):
            raise ValidationError(f"CPT of {c.child!r} lists a parent twice")
        if c.child in c.parents:
            raise CycleDetected(f"{c.child!r} is its own parent")

    topo = _topological_order(by_name, by_child)

    tables = {}
    for idx, c in enumerate(cpts):
        tables[c.child] = _cpt_table(c, by_name, f"cpts[{idx}]")

    names = sorted(by_name)
    edges = tuple(sorted((p, c) for c in names for p in by_child[c].parents))
    return BayesNet(
        variables={n: by_name[n] for n in names},
        cpts={n: by_child[n] for n in names},
        edges=edges,
        topological_order=topo,
        _tables=tables,
    )


def _topological_order(by_name, by_child) -> tuple[str, ...]:
    # Kahn's algorithm; lexicographic among ready nodes for a stable order.
    indeg = {n: len(by_child[n].parents) for n in by_name}
    kids: dict[str, list[str]] = {n: [] for n in by_name}
    for n in by_name:
        for p in by_child[n].parents:
            kids[p].append(n)
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for k in kids[n]:
            indeg[k] -= 1
            if indeg[k] == 0:
                ready.append(k)
        ready.sort()
    if len(order) != len(by_name):
        stuck = sorted(n for n in by_name if n not in order)
        raise CycleDetected(f"directed cycle among {stuck}")
    return tuple(order)


def _cpt_table(c: Cpt, by_name: Mapping[str, Variable], path: str) -> np.ndarray:
    child = by_name[c.child]
    pvars = [by_name[p] for p in c.parents]
    shape = tuple(v.card for v in pvars) + (child.card,)
    table = np.zeros(shape)
    expected = set(itertools.product(*(v.states for v in pvars)))
    for key in c.rows:
        if key not in expected:
            raise ValidationError(
                f"{path}: row {list(key)} is not a parent-state combination of {list(c.parents)}"
            )
    for combo in sorted(expected, key=lambda k: tuple(v.index(s) for v, s in zip(pvars, k))):
        if combo not in c.rows:
            raise ValidationError(f"{path}: CPT of {c.child!r} has no row for {list(combo)}")
        row = c.rows[combo]
        rpath = f"{path}.rows[{list(combo)}]"
        if len(row) != child.card:
            raise ValidationError(
                f"{rpath}: expected {child.card} probabilities, got {len(row)}"
            )
        if any(not (0.0 <= p <= 1.0) for p in row):
            raise RowNotNormalized(f"{rpath}: entries must lie in [0, 1]: {list(row)}", rpath, sum(row))
        total = sum(row)
        if abs(total - 1.0) > ROW_TOL:
            raise RowNotNormalized(f"{rpath}: row sums to {total!r}, not 1", rpath, total)
        idx = tuple(v.index(s) for v, s in zip(pvars, combo))
        table[idx] = row
    return table


# -- factors -----------------------------------------------------------------
@dataclass(frozen=True)
class Factor:
    scope: tuple[str, ...]
    values: np.ndarray

    def expand(self, scope: Sequence[str]) -> np.ndarray:
        """Values broadcast against an array whose axes follow ``scope``."""
        perm = sorted(range(len(self.scope)), key=lambda i: scope.index(self.scope[i]))
        vals = np.transpose(self.values, perm)
        present = set(self.scope)
        shape = []
        it = iter(vals.shape)
        for v in scope:
            shape.append(next(it) if v in present else 1)
        return vals.reshape(shape)

    def marginalize(self, var: str) -> "Factor":
        axis = self.scope.index(var)
        return Factor(self.scope[:axis] + self.scope[axis + 1 :], self.values.sum(axis=axis))

    def reduce(self, var: str, index: int) -> "Factor":
        axis = self.scope.index(var)
        return Factor(
            self.scope[:axis] + self.scope[axis + 1 :], np.take(self.values, index, axis=axis)
        )


def factor_product(factors: Sequence[Factor]) -> Factor:
    scope: list[str] = []
    for f in factors:
        for v in f.scope:
            if v not in scope:
                scope.append(v)
    out = np.ones(())
    for f in factors:
        out = out * f.expand(scope)
    return Factor(tuple(scope), out)


def _cpt_factors(net: BayesNet, evidence: Evidence) -> list[Factor]:
    factors = []
    for name in net.names:
        f = Factor(net.parents(name) + (name,), net.table(name))
        for v in f.scope:
            if v in evidence:
                f = f.reduce(v, net.variables[v].index(evidence[v]))
        factors.append(f)
    return factors


def check_evidence(net: BayesNet, evidence: Evidence) -> None:
    for var, state in evidence.items():
        net.variable(var).index(state)


# -- elimination order -------------------------------------------------------
def interaction_graph(net: BayesNet, evidence: Evidence = ()) -> dict[str, set[str]]:
    """Moral graph over the unobserved variables."""
    graph = {n: set() for n in net.names if n not in evidence}
    for name in net.names:
        family = [v for v in net.parents(name) + (name,) if v not in evidence]
        for a, b in itertools.combinations(family, 2):
            graph[a].add(b)
            graph[b].add(a)
    return graph


def elimination_order(
    net: BayesNet, query: str | None = None, evidence: Evidence | None = None
) -> list[str]:
    """Greedy min-fill order over every non-query, unobserved variable.

    Ties are broken by name so the order is reproducible.
    """
    evidence = evidence or {}
    graph = interaction_graph(net, evidence)
    todo = {n for n in graph if n != query}
    order = []
    while todo:
        def fill(v):
            nb = sorted(graph[v])
            return sum(1 for a, b in itertools.combinations(nb, 2) if b not in graph[a])

        v = min(todo, key=lambda n: (fill(n), n))
        nb = graph.pop(v)
        for a in nb:
            graph[a].discard(v)
            graph[a] |= nb - {a}
        todo.remove(v)
        order.append(v)
    return order


# -- inference ---------------------------------------------------------------
def _eliminate(factors: list[Factor], order: Sequence[str]) -> list[Factor]:
    for var in order:
        touching = [f for f in factors if var in f.scope]
        if not touching:
            continue
        rest = [f for f in factors if var not in f.scope]
        rest.append(factor_product(touching).marginalize(var))
        factors = rest
    return factors


def evidence_probability(net: BayesNet, evidence: Evidence) -> float:
    check_evidence(net, evidence)
    factors = _cpt_factors(net, evidence)
    factors = _eliminate(factors, elimination_order(net, None, evidence))
    return float(factor_product(factors).values)


def posterior(
    net: BayesNet,
    evidence: Evidence | None,
    query: str,
    order: Sequence[str] | None = None,
) -> Distribution:
    """Exact P(query | evidence).

    ``order`` overrides the min-fill elimination order; it must list every
    unobserved variable except the query exactly once.
    """
    evidence = dict(evidence or {})
    qvar = net.variable(query)
    check_evidence(net, evidence)

    if query in evidence:
        if evidence_probability(net, evidence) <= 0.0:
            raise ImpossibleEvidence(f"evidence {evidence} has probability 0")
        hit = qvar.index(evidence[query])
        return Distribution(
            query, qvar.states, tuple(1.0 if i == hit else 0.0 for i in range(qvar.card))
        )

    if order is None:
        order = elimination_order(net, query, evidence)
    else:
        expected = {n for n in net.names if n != query and n not in evidence}
        if sorted(order) != sorted(expected):
            raise ValidationError(f"elimination order {list(order)} does not cover {sorted(expected)}")

    factors = _eliminate(_cpt_factors(net, evidence), order)
    joint = factor_product(factors)
    vec = joint.expand((query,)).reshape(qvar.card)
    total = float(vec.sum())
    if total <= 0.0:
        raise ImpossibleEvidence(f"evidence {evidence} has probability 0")
    return Distribution(query, qvar.states, tuple(float(x) for x in vec / total))


def prior_marginals(net: BayesNet) -> dict[str, Distribution]:
    return {name: posterior(net, {}, name) for name in net.names}


def posteriors(net: BayesNet, evidence: Evidence | None) -> dict[str, Distribution]:
    return {name: posterior(net, evidence, name) for name in net.names}
