"""Dinic maximum flow on real-valued capacities.

Arcs are stored in pairs: arc ``a`` and its reverse ``a ^ 1``. ``cap`` holds
residual capacities, so an undirected edge is one pair with capacity on both
sides. Residuals at or below ``eps`` count as saturated.
"""

from __future__ import annotations

from collections import deque


class FlowNetwork:
    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[float] = []
        self.eps = 0.0
        self._journal: list[tuple[int, float]] | None = None

    def add_edge(self, u: int, v: int, cap: float, rev_cap: float = 0.0) -> int:
        """Add arc u->v (and v->u with ``rev_cap``); returns the forward arc id."""
        if cap < 0 or rev_cap < 0:
            raise ValueError("capacities must be nonnegative")
        a = len(self.to)
        self.to += (v, u)
        self.cap += (float(cap), float(rev_cap))
        self.head[u].append(a)
        self.head[v].append(a + 1)
        return a

    def set_tolerance(self, rel: float = 1e-12) -> None:
        largest = max(self.cap, default=0.0)
        self.eps = rel * largest

    # residual updates go through here so local solves can be undone
    def _push(self, a: int, f: float) -> None:
        cap = self.cap
        if self._journal is not None:
            self._journal.append((a, cap[a]))
            self._journal.append((a ^ 1, cap[a ^ 1]))
        cap[a] -= f
        cap[a ^ 1] += f

    def _saturate_short_paths(self, s: int, t: int) -> float:
        """Push flow along every s->u->t path; cheap and handles most of the flow."""
        flow = 0.0
        to, cap = self.to, self.cap
        for a in self.head[s]:
            u = to[a]
            if cap[a] <= self.eps:
                continue
            for b in self.head[u]:
                if to[b] == t and cap[b] > self.eps:
                    f = min(cap[a], cap[b])
                    self._push(a, f)
                    self._push(b, f)
                    flow += f
                    if cap[a] <= self.eps:
                        break
        return flow

    def _levels(self, s: int, t: int, exclude: int | None, r: int) -> dict[int, int] | None:
        level = {s: 0}
        if exclude is not None:
            level[exclude] = -1
        queue = deque([s])
        to, cap, eps, head = self.to, self.cap, self.eps, self.head
        while queue:
            u = queue.popleft()
            lu = level[u] + 1
            for a in head[u]:
                if cap[a ^ r] > eps:
                    v = to[a]
                    if v not in level:
                        level[v] = lu
                        if v == t:
                            return level
                        queue.append(v)
        return None

    def _blocking_flow(self, s: int, t: int, level: dict[int, int], r: int) -> float:
        # with r == 1 the search walks arcs backwards: arc a stands for a ^ 1
        to, cap, eps, head = self.to, self.cap, self.eps, self.head
        lt = level[t]
        it: dict[int, int] = {}
        path: list[int] = []
        total = 0.0
        u = s
        while True:
            if u == t:
                f = min(cap[a ^ r] for a in path)
                for a in path:
                    self._push(a ^ r, f)
                total += f
                # retreat to the tail of the first saturated arc
                for k, a in enumerate(path):
                    if cap[a ^ r] <= eps:
                        del path[k:]
                        break
                u = to[path[-1]] if path else s
                continue
            arcs = head[u]
            i = it.get(u, 0)
            lu = level[u] + 1
            advanced = False
            while i < len(arcs):
                a = arcs[i]
                v = to[a]
                if cap[a ^ r] > eps and level.get(v, -1) == lu and (lu < lt or v == t):
                    path.append(a)
                    it[u] = i
                    u = v
                    advanced = True
                    break
                i += 1
            if advanced:
                continue
            it[u] = i
            level[u] = -1
            if u == s:
                return total
            a = path.pop()
            u = to[a ^ 1]
            it[u] = it.get(u, 0) + 1

    def augment(self, s: int, t: int, exclude: int | None = None, *, backward: bool = False) -> float:
        """Max additional flow s->t on the current residual, never routing through ``exclude``.

        ``backward=True`` computes the flow t->s instead by searching from
        ``s`` against arc direction, which keeps the search local to ``s``.
        """
        r = 1 if backward else 0
        flow = 0.0
        while True:
            level = self._levels(s, t, exclude, r)
            if level is None:
                return flow
            flow += self._blocking_flow(s, t, level, r)

    def max_flow(self, s: int, t: int) -> float:
        self.set_tolerance()
        return self._saturate_short_paths(s, t) + self.augment(s, t)

    def reachable(self, s: int) -> set[int]:
        """Nodes reachable from ``s`` through unsaturated residual arcs."""
        seen = {s}
        stack = [s]
        to, cap, eps, head = self.to, self.cap, self.eps, self.head
        while stack:
            u = stack.pop()
            for a in head[u]:
                if cap[a] > eps:
                    v = to[a]
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
        return seen

    def begin(self) -> None:
        """Start recording residual changes for a later :meth:`rollback`."""
        self._journal = []

    def rollback(self) -> None:
        journal, self._journal = self._journal, None
        cap = self.cap
        for a, old in reversed(journal or ()):
            cap[a] = old
