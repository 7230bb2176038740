"""Retweet interaction graph: ingestion, validation and degree statistics."""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

BOT = "bot"
HUMAN = "human"
LABELS = (BOT, HUMAN)


class IngestError(ValueError):
    """A malformed edge or label record."""


class DegreeRow(NamedTuple):
    z_out: int
    z_in: int
    unique_out: int
    unique_in: int


def _check_id(value, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise IngestError(f"{where}: account id must be a non-empty string, got {value!r}")
    return value


def _check_count(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, numbers.Real) and float(value).is_integer():
            value = int(value)
        else:
            raise IngestError(f"{where}: retweet count must be an integer, got {value!r}")
    value = int(value)
    if value < 1:
        raise IngestError(f"{where}: retweet count must be >= 1, got {value}")
    return value


class InteractionGraph:
    """Directed retweet graph with summed edge weights.

    ``edges[(src, dst)]`` is the number of times ``src`` retweeted ``dst``.
    Out/in strengths are kept in sync on every mutation.
    """

    def __init__(self):
        self._nodes: set[str] = set()
        self.edges: dict[tuple[str, str], int] = {}
        self.z_out: dict[str, int] = {}
        self.z_in: dict[str, int] = {}
        self.self_loops_dropped = 0
        self._arrays = None

    def add_node(self, node: str) -> None:
        if node not in self._nodes:
            self._nodes.add(node)
            self.z_out[node] = 0
            self.z_in[node] = 0
            self._arrays = None

    def add_edge(self, src: str, dst: str, weight: int = 1) -> None:
        if weight < 1:
            raise ValueError(f"edge weight must be >= 1, got {weight}")
        self.add_node(src)
        self.add_node(dst)
        if src == dst:
            self.self_loops_dropped += 1
            return
        key = (src, dst)
        self.edges[key] = self.edges.get(key, 0) + weight
        self.z_out[src] += weight
        self.z_in[dst] += weight
        self._arrays = None

    @property
    def nodes(self) -> list[str]:
        """Node ids in canonical (sorted) order."""
        return sorted(self._nodes)

    def __contains__(self, node) -> bool:
        return node in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, InteractionGraph):
            return NotImplemented
        return self._nodes == other._nodes and self.edges == other.edges

    def __repr__(self) -> str:
        return f"InteractionGraph(nodes={len(self._nodes)}, edges={len(self.edges)})"

    def iter_edges(self):
        """Yield ``(src, dst, weight)`` in canonical order."""
        for key in sorted(self.edges):
            yield key[0], key[1], self.edges[key]

    def arrays(self) -> "GraphArrays":
        """Index-based numpy view of the graph, cached until the next mutation."""
        if self._arrays is None:
            self._arrays = GraphArrays.from_graph(self)
        return self._arrays


@dataclass(frozen=True)
class GraphArrays:
    ids: list[str]
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    z_out: np.ndarray
    z_in: np.ndarray
    index: dict[str, int] = field(repr=False)

    @classmethod
    def from_graph(cls, g: InteractionGraph) -> "GraphArrays":
        ids = g.nodes
        index = {node: i for i, node in enumerate(ids)}
        m = len(g.edges)
        src = np.empty(m, dtype=np.int64)
        dst = np.empty(m, dtype=np.int64)
        weight = np.empty(m, dtype=np.int64)
        for k, (s, d, w) in enumerate(g.iter_edges()):
            src[k] = index[s]
            dst[k] = index[d]
            weight[k] = w
        n = len(ids)
        z_out = np.bincount(src, weights=weight, minlength=n).astype(np.int64)
        z_in = np.bincount(dst, weights=weight, minlength=n).astype(np.int64)
        return cls(ids, src, dst, weight, z_out, z_in, index)


def _numbered(records: Iterable, numbered: bool):
    return records if numbered else enumerate(records, start=1)


def ingest_edges(records: Iterable, numbered: bool = False) -> InteractionGraph:
    """Build a graph from ``(src, dst, count)`` records.

    Duplicate pairs are summed and self-retweets are dropped (counted in
    ``self_loops_dropped``). Errors name the 1-based record number, or the
    caller's line numbers when ``numbered`` records come as ``(line, record)``.
    """
    g = InteractionGraph()
    for lineno, rec in _numbered(records, numbered):
        where = f"line {lineno}"
        try:
            arity = len(rec)
        except TypeError:
            raise IngestError(f"{where}: expected (src, dst, count), got {rec!r}") from None
        if arity != 3:
            raise IngestError(f"{where}: expected 3 fields (src, dst, count), got {arity}")
        src, dst, count = rec
        g.add_edge(_check_id(src, where), _check_id(dst, where), _check_count(count, where))
    return g


@dataclass
class GroundTruth:
    labels: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, account: str) -> str:
        return self.labels[account]

    def __contains__(self, account) -> bool:
        return account in self.labels

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(sorted(self.labels))

    @property
    def bots(self) -> list[str]:
        return sorted(a for a, lab in self.labels.items() if lab == BOT)

    @property
    def humans(self) -> list[str]:
        return sorted(a for a, lab in self.labels.items() if lab == HUMAN)


def ingest_labels(records: Iterable, numbered: bool = False) -> GroundTruth:
    labels: dict[str, str] = {}
    for lineno, rec in _numbered(records, numbered):
        where = f"line {lineno}"
        if len(rec) != 2:
            raise IngestError(f"{where}: expected 2 fields (account_id, label), got {len(rec)}")
        account, label = rec
        account = _check_id(account, where)
        token = label.strip().lower() if isinstance(label, str) else label
        if token not in LABELS:
            raise IngestError(f"{where}: unknown label {label!r} (expected 'bot' or 'human')")
        previous = labels.setdefault(account, token)
        if previous != token:
            raise IngestError(f"{where}: conflicting labels for {account!r}: {previous} vs {token}")
    return GroundTruth(labels)


def degree_summary(g: InteractionGraph) -> dict[str, DegreeRow]:
    unique_out = dict.fromkeys(g.nodes, 0)
    unique_in = dict.fromkeys(g.nodes, 0)
    for src, dst in g.edges:
        unique_out[src] += 1
        unique_in[dst] += 1
    return {
        node: DegreeRow(g.z_out[node], g.z_in[node], unique_out[node], unique_in[node])
        for node in g.nodes
    }
