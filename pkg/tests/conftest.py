import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from sensemaking import scenario
from sensemaking.bayesnet import Cpt, Variable, build_network
from sensemaking.memory import build_cam

BIN = ("1", "0")


def random_network(rng: np.random.Generator, n_vars: int, max_parents: int = 3, zero_prob: float = 0.0):
    """Random DAG over binary variables named v0..v{n-1}; parents only from lower indices."""
    names = [f"v{i}" for i in range(n_vars)]
    variables = [Variable(n, BIN) for n in names]
    cpts = []
    for i, n in enumerate(names):
        k = int(rng.integers(0, min(i, max_parents) + 1))
        parents = tuple(sorted(rng.choice(names[:i], size=k, replace=False).tolist())) if k else ()
        rows = {}
        for combo in itertools.product(BIN, repeat=len(parents)):
            p = float(rng.random())
            if zero_prob and rng.random() < zero_prob:
                p = float(rng.integers(0, 2))
            rows[combo] = (p, 1.0 - p)
        cpts.append(Cpt(n, parents, rows))
    # shuffle declaration order so nothing relies on it
    order = rng.permutation(n_vars)
    return build_network([variables[j] for j in order], [cpts[j] for j in order])


def random_evidence(rng, net, max_size=3):
    k = int(rng.integers(0, max_size + 1))
    chosen = rng.choice(list(net.names), size=min(k, len(net.names)), replace=False)
    return {v: BIN[int(rng.integers(0, 2))] for v in chosen}


@st.composite
def networks(draw, max_vars=10):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_vars))
    zeros = draw(st.sampled_from([0.0, 0.2]))
    rng = np.random.default_rng(seed)
    net = random_network(rng, n, zero_prob=zeros)
    return net, rng


@st.composite
def memory_stores(draw, max_memories=4, max_attrs=4, pool=7):
    attrs = [f"a{i}" for i in range(pool)]
    n = draw(st.integers(1, max_memories))
    mems = []
    for i in range(n):
        chosen = draw(st.lists(st.sampled_from(attrs), min_size=1, max_size=max_attrs, unique=True))
        mems.append((f"m{i}", chosen))
    used = sorted({a for _, a in mems for a in a})
    pairs = []
    if len(used) >= 2:
        cand = [p for p in itertools.combinations(used, 2)]
        pairs = draw(st.lists(st.sampled_from(cand), max_size=2, unique=True))
    return mems, pairs


def store(mems, pairs=(), **kw):
    return build_cam(mems, pairs, **kw)


@pytest.fixture(params=scenario.FIXTURES)
def fixture_name(request):
    return request.param


@pytest.fixture
def appendix():
    return scenario.load_fixture("appendix1")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
