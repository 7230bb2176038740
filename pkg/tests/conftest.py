import itertools

import numpy as np
import pytest

from botcut.energy import EnergyParams, link_energies, node_energy_arrays
from botcut.graph import InteractionGraph


def random_params(rng, delta=None) -> EnergyParams:
    """Draw a point from the feasible region."""
    if delta is None:
        delta = float(rng.choice([0.0, 0.05, 0.2]))
    lam1 = rng.uniform(0.55, 1.0 - delta - 1e-3)
    lo = max((2.0 - lam1) / 3.0, 1.0 - lam1 - delta + 1e-3)
    lam2 = rng.uniform(lo, lam1 - 1e-6)
    return EnergyParams(
        gamma=rng.uniform(0.5, 3.0),
        lambda1=lam1,
        lambda2=lam2,
        delta=delta,
        alpha1=rng.uniform(1.0, 40.0),
        alpha2=rng.uniform(1.0, 40.0),
    )


def random_graph(rng, n, p_edge=0.35, max_weight=20) -> InteractionGraph:
    g = InteractionGraph()
    for i in range(n):
        g.add_node(f"n{i:02d}")
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p_edge:
                g.add_edge(f"n{i:02d}", f"n{j:02d}", int(rng.integers(1, max_weight + 1)))
    return g


def random_prior(rng, g, p_present=0.3):
    if rng.random() < 0.5:
        return None
    return {node: float(rng.uniform(0.05, 0.95)) for node in g.nodes if rng.random() < p_present}


def all_labelings(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64).reshape(-1, n)


def brute_force_energies(g, params, prior=None):
    """Energy of every labeling (rows of ``all_labelings``), straight from the model definition."""
    a = g.arrays()
    n = len(a.ids)
    psi = link_energies(g, params)
    phi0, phi1 = node_energy_arrays(a.ids, prior)
    X = all_labelings(n)
    # multiplier for (retweeter label, target label)
    mult = {
        (0, 1): 1.0,
        (1, 1): params.lambda1,
        (0, 0): params.lambda2,
        (1, 0): params.epsilon,
    }
    energy = (X * phi1 + (1 - X) * phi0).sum(axis=1)
    for k in range(len(psi)):
        xs, xd = X[:, a.src[k]], X[:, a.dst[k]]
        m = np.zeros(len(X))
        for (u, v), c in mult.items():
            m[(xs == u) & (xd == v)] = c
        energy = energy + psi[k] * m
    return X, energy


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one PASS/FAIL line per acceptance criterion, shown at the end of the run
_criteria: list[str] = []


class Criterion:
    def __init__(self, label):
        self.label = label
        self.line = None

    def check(self, ok, detail):
        self.line = f"{'PASS' if ok else 'FAIL'} {self.label}: {detail}"
        print(self.line)
        assert ok, self.line


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.call_report = rep


@pytest.fixture
def criterion(request):
    c = Criterion(request.node.function.__doc__.strip().splitlines()[0])
    yield c
    if c.line is None:
        rep = getattr(request.node, "call_report", None)
        reason = rep.longrepr.reprcrash.message if rep is not None and rep.failed else "no result recorded"
        c.line = f"FAIL {c.label}: {reason}"
    _criteria.append(c.line)


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
