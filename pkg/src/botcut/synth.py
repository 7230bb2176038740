"""Synthetic retweet graphs with planted bots that retweet humans more than each other."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .graph import BOT, HUMAN, GroundTruth, InteractionGraph


class SynthConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_accounts: int = 5000
    bot_fraction: float = 0.1
    events_per_bot: int = 50
    events_per_human: int = 10
    p_bot_targets_human: float = 0.9
    p_human_targets_human: float = 0.9
    popularity_skew: float = 1.2
    seed: int = 7

    def validate(self) -> None:
        def bad(name, why):
            raise SynthConfigError(f"{name}: {why} (got {getattr(self, name)!r})")

        for name in ("n_accounts", "events_per_bot", "events_per_human", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                bad(name, "must be an integer")
        if self.n_accounts < 4:
            bad("n_accounts", "must be >= 4")
        if not 0.0 < self.bot_fraction < 1.0:
            bad("bot_fraction", "must lie strictly between 0 and 1")
        for name in ("events_per_bot", "events_per_human"):
            if getattr(self, name) < 1:
                bad(name, "must be >= 1")
        for name in ("p_bot_targets_human", "p_human_targets_human"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                bad(name, "must lie in [0, 1]")
        if not (self.popularity_skew > 0 and math.isfinite(self.popularity_skew)):
            bad("popularity_skew", "must be a positive finite number")

    @property
    def n_bots(self) -> int:
        return min(max(1, math.floor(self.n_accounts * self.bot_fraction)), self.n_accounts - 1)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SynthOutput:
    graph: InteractionGraph
    truth: GroundTruth
    config: SynthConfig


def _zipf_weights(k: int, skew: float) -> np.ndarray:
    w = np.arange(1, k + 1, dtype=float) ** -skew
    return w / w.sum()


def generate(cfg: SynthConfig) -> SynthOutput:
    """Sample retweet events account by account and aggregate them into a weighted graph.

    Each event picks the target's class with the emitter's class-conditional
    probability, then a target within that class from a Zipf law over a fixed
    popularity ranking. Self-targets are redrawn; when the emitter is the only
    member of the chosen class the event goes to the other class instead.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_accounts
    width = len(str(n - 1))
    ids = [f"u{k:0{width}d}" for k in range(n)]

    perm = rng.permutation(n)
    bots = perm[: cfg.n_bots]
    humans = perm[cfg.n_bots:]
    # popularity order within each class is a fresh shuffle
    members = {BOT: rng.permutation(bots), HUMAN: rng.permutation(humans)}
    probs = {c: _zipf_weights(len(m), cfg.popularity_skew) for c, m in members.items()}

    is_bot = np.zeros(n, dtype=bool)
    is_bot[bots] = True
    emitted = np.where(is_bot, cfg.events_per_bot, cfg.events_per_human)
    src = np.repeat(np.arange(n), emitted)
    p_human = np.where(is_bot[src], cfg.p_bot_targets_human, cfg.p_human_targets_human)
    to_human = rng.random(src.size) < p_human

    # a lone class member cannot retweet its own class without retweeting itself
    for cls, flag in ((BOT, False), (HUMAN, True)):
        if len(members[cls]) == 1:
            only = members[cls][0]
            lone = (src == only) & (to_human == flag)
            to_human[lone] = not flag

    dst = np.empty_like(src)
    for cls, flag in ((BOT, False), (HUMAN, True)):
        idx = np.flatnonzero(to_human == flag)
        pool, p = members[cls], probs[cls]
        dst[idx] = pool[rng.choice(len(pool), size=idx.size, p=p)]
        clash = idx[dst[idx] == src[idx]]
        while clash.size:
            dst[clash] = pool[rng.choice(len(pool), size=clash.size, p=p)]
            clash = clash[dst[clash] == src[clash]]

    keys, counts = np.unique(src * n + dst, return_counts=True)
    g = InteractionGraph()
    for node in ids:
        g.add_node(node)
    for key, c in zip(keys.tolist(), counts.tolist()):
        g.add_edge(ids[key // n], ids[key % n], c)

    labels = {ids[i]: (BOT if is_bot[i] else HUMAN) for i in range(n)}
    return SynthOutput(g, GroundTruth(labels), cfg)
