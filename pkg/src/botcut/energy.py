"""Ising energy model over a retweet graph.

Labels are 1 for bot and 0 for human. A link energy is always looked up with
the retweeter's label first and the retweeted account's label second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Mapping, NamedTuple

import numpy as np

from .graph import InteractionGraph

EQUALITY_TOL = 1e-12

# every (retweeter, target) label pair
PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


class Violation(NamedTuple):
    name: str
    message: str

    def __str__(self) -> str:
        return f"{self.name}: {self.message}"


class InvalidParameters(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class EnergyParams:
    """Link-energy weight, label multipliers and activity thresholds.

    ``epsilon`` defaults to ``lambda1 + lambda2 - 1 + delta``, the smallest
    value that keeps the pairwise energy submodular.
    """

    gamma: float = 1.0
    lambda1: float = 0.8
    lambda2: float = 0.6
    epsilon: float | None = None
    delta: float = 0.0
    alpha1: float = 100.0
    alpha2: float = 100.0

    def __post_init__(self):
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", self.lambda1 + self.lambda2 - 1.0 + self.delta)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.field_names()}

    def factor(self, retweeter: int, target: int) -> float:
        """Multiplier applied to the base link energy for a label pair."""
        if retweeter:
            return self.lambda1 if target else self.epsilon
        return 1.0 if target else self.lambda2

    def require_valid(self) -> None:
        problems = validate(self)
        if problems:
            raise InvalidParameters(problems)


def validate(params: EnergyParams) -> list[Violation]:
    """Return every violated constraint; an empty list means the params are usable."""
    p = params
    out: list[Violation] = []
    values = [p.gamma, p.lambda1, p.lambda2, p.epsilon, p.delta, p.alpha1, p.alpha2]
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in values):
        return [Violation("finite", "all parameters must be finite numbers")]

    if p.gamma <= 0:
        out.append(Violation("gamma", f"gamma must be > 0, got {p.gamma}"))
    for name in ("alpha1", "alpha2"):
        if getattr(p, name) <= 0:
            out.append(Violation(name, f"{name} must be > 0, got {getattr(p, name)}"))

    chain = [
        (0.0 < p.epsilon, f"0 < epsilon (epsilon={p.epsilon})"),
        (p.epsilon < p.lambda2, f"epsilon < lambda2 ({p.epsilon} >= {p.lambda2})"),
        (p.lambda2 < p.lambda1, f"lambda2 < lambda1 ({p.lambda2} >= {p.lambda1})"),
        (p.lambda1 < 1.0, f"lambda1 < 1 (lambda1={p.lambda1})"),
    ]
    broken = [msg for ok, msg in chain if not ok]
    if broken:
        out.append(Violation("heterophily", "requires " + ", ".join(broken)))

    if p.delta < 0:
        out.append(Violation("submodularity", f"delta must be >= 0, got {p.delta}"))
    expected = p.lambda1 + p.lambda2 - 1.0 + p.delta
    if abs(p.epsilon - expected) > EQUALITY_TOL:
        out.append(Violation(
            "submodularity",
            f"epsilon must equal lambda1 + lambda2 - 1 + delta = {expected:.12g}, got {p.epsilon:.12g}",
        ))

    lhs = 3.0 * p.lambda2 + p.lambda1
    if lhs < 2.0 - EQUALITY_TOL:
        out.append(Violation("positivity", f"3*lambda2 + lambda1 must be >= 2, got {lhs:.12g}"))
    return out


def _gate(x):
    """Numerically stable 1 / (1 + exp(x))."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, e / (1.0 + e), 1.0 / (1.0 + e))


def base_link_energy(w: int, z_out_src: int, z_in_dst: int, params: EnergyParams) -> float:
    """Sigmoid-gated link energy of ``w`` retweets.

    Low-activity retweeters or unpopular targets are pushed toward zero; busy
    pairs approach ``w * gamma``.
    """
    if w < 1:
        raise ValueError(f"edge weight must be >= 1, got {w}")
    if z_out_src < 1 or z_in_dst < 1:
        raise ValueError("strengths must be positive for an existing edge")
    if z_out_src < w or z_in_dst < w:
        raise ValueError("an edge weight cannot exceed either endpoint strength")
    x = (params.alpha1 / z_out_src - 1.0) + (params.alpha2 / z_in_dst - 1.0)
    return float(w * params.gamma * _gate(x))


def link_energies(g: InteractionGraph, params: EnergyParams) -> np.ndarray:
    """Base link energy per edge, aligned with ``g.arrays()``."""
    a = g.arrays()
    if a.weight.size == 0:
        return np.zeros(0)
    x = (params.alpha1 / a.z_out[a.src] - 1.0) + (params.alpha2 / a.z_in[a.dst] - 1.0)
    return a.weight * params.gamma * _gate(x)


def labeled_link_energy(psi: float, pair: tuple[int, int], params: EnergyParams) -> float:
    if psi < 0:
        raise ValueError(f"base link energy must be >= 0, got {psi}")
    retweeter, target = pair
    if retweeter not in (0, 1) or target not in (0, 1):
        raise ValueError(f"labels must be 0 or 1, got {pair}")
    return psi * params.factor(retweeter, target)


def _check_prob(account: str, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"prior for {account!r} must lie strictly in (0, 1), got {p}")
    return p


def node_energy(account: str, label: int, prior: Mapping[str, float] | None = None) -> float:
    """Negative log prior of ``label``; zero when no prior is known for the account."""
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    if not prior or account not in prior:
        return 0.0
    p = _check_prob(account, prior[account])
    return -math.log(p) if label == 1 else -math.log1p(-p)


def node_energy_arrays(ids: list[str], prior: Mapping[str, float] | None) -> tuple[np.ndarray, np.ndarray]:
    """``(phi0, phi1)`` arrays for the given node order."""
    phi0 = np.zeros(len(ids))
    phi1 = np.zeros(len(ids))
    if prior:
        for i, account in enumerate(ids):
            if account in prior:
                phi0[i] = node_energy(account, 0, prior)
                phi1[i] = node_energy(account, 1, prior)
    return phi0, phi1


class EnergyModel:
    """Precomputed energies for repeated evaluation of labelings on one graph."""

    def __init__(self, g: InteractionGraph, params: EnergyParams, prior: Mapping[str, float] | None = None):
        self.graph = g
        self.params = params
        arrays = g.arrays()
        self.ids = arrays.ids
        self.index = arrays.index
        self.src = arrays.src
        self.dst = arrays.dst
        self.psi = link_energies(g, params)
        self.phi0, self.phi1 = node_energy_arrays(self.ids, prior)
        # table[retweeter, target]
        self.table = np.array([[params.factor(0, 0), params.factor(0, 1)],
                               [params.factor(1, 0), params.factor(1, 1)]])

    def energy_vector(self, x) -> float:
        """Energy of a 0/1 label vector in canonical node order."""
        x = np.asarray(x, dtype=np.int64)
        nodes = float(np.where(x == 1, self.phi1, self.phi0).sum())
        links = float((self.psi * self.table[x[self.src], x[self.dst]]).sum())
        return nodes + links

    def to_vector(self, labels: Mapping[str, int]) -> np.ndarray:
        x = np.empty(len(self.ids), dtype=np.int64)
        for i, account in enumerate(self.ids):
            try:
                value = labels[account]
            except KeyError:
                raise KeyError(f"no label for node {account!r}") from None
            if value not in (0, 1):
                raise ValueError(f"label for {account!r} must be 0 or 1, got {value!r}")
            x[i] = value
        return x

    def energy(self, labels: Mapping[str, int]) -> float:
        return self.energy_vector(self.to_vector(labels))


def configuration_energy(
    g: InteractionGraph,
    labels: Mapping[str, int],
    params: EnergyParams,
    prior: Mapping[str, float] | None = None,
) -> float:
    """Total node plus link energy of a full labeling; reciprocal edges both count."""
    return EnergyModel(g, params, prior).energy(labels)
