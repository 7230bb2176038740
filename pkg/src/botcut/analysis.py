"""Heterophily statistics, ROC evaluation and bot-only hashtags."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .graph import BOT, HUMAN, GroundTruth, InteractionGraph

# (retweeter class, target class) in the column order used for reports
RATE_KEYS = (("bot", "human"), ("bot", "bot"), ("human", "human"), ("human", "bot"))
KS_PAIRS = (
    (("bot", "bot"), ("bot", "human")),
    (("human", "human"), ("human", "bot")),
    (("bot", "human"), ("human", "human")),
    (("human", "bot"), ("bot", "bot")),
)


def rate_name(key: tuple[str, str]) -> str:
    return f"{key[0][0].upper()}->{key[1][0].upper()}"


@dataclass
class RetweetRates:
    """Per-account retweet rates keyed by (own class, target class)."""

    rates: dict[tuple[str, str], dict[str, float]]

    def distribution(self, key: tuple[str, str]) -> list[float]:
        per_account = self.rates[key]
        return [per_account[a] for a in sorted(per_account)]

    def mean(self, key: tuple[str, str]) -> float:
        values = self.distribution(key)
        return float(np.mean(values)) if values else math.nan

    def means(self) -> dict[str, float]:
        return {rate_name(k): self.mean(k) for k in RATE_KEYS}


def retweet_rates(g: InteractionGraph, labels: Mapping[str, str]) -> RetweetRates:
    """Retweets an account gives to a class divided by the distinct accounts of that class it retweets.

    Edges with an unlabeled endpoint are ignored, so an account only gets a
    rate toward a class it actually retweeted.
    """
    totals: dict[tuple[str, str], Counter] = {k: Counter() for k in RATE_KEYS}
    targets: dict[tuple[str, str], Counter] = {k: Counter() for k in RATE_KEYS}
    for (src, dst), w in g.edges.items():
        own, other = labels.get(src), labels.get(dst)
        if own not in (BOT, HUMAN) or other not in (BOT, HUMAN):
            continue
        key = (own, other)
        totals[key][src] += w
        targets[key][src] += 1
    return RetweetRates({
        key: {a: totals[key][a] / targets[key][a] for a in totals[key]}
        for key in RATE_KEYS
    })


def ks_statistic(sample_a: Iterable[float], sample_b: Iterable[float]) -> float:
    """Largest gap between the two empirical CDFs, evaluated at every sample point."""
    a = np.sort(np.asarray(list(sample_a), dtype=float))
    b = np.sort(np.asarray(list(sample_b), dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / a.size
    cdf_b = np.searchsorted(b, points, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 0.5:
        # the alternating series converges too slowly here; use the theta-function dual
        s = 0.0
        k = 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * math.pi ** 2 / (8 * lam * lam))
            s += term
            if term < 1e-16:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2 * math.pi) / lam * s))
    total = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < 1e-12:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_pvalue(d: float, n_a: int, n_b: int) -> float:
    """Asymptotic two-sample KS p-value with the small-sample correction on the scale factor."""
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"KS statistic must lie in [0, 1], got {d}")
    if n_a < 1 or n_b < 1:
        raise ValueError("sample sizes must be >= 1")
    ne = n_a * n_b / (n_a + n_b)
    root = math.sqrt(ne)
    return kolmogorov_sf((root + 0.12 + 0.11 / root) * d)


def ks_test(sample_a, sample_b) -> tuple[float, float]:
    a, b = list(sample_a), list(sample_b)
    d = ks_statistic(a, b)
    return d, ks_pvalue(d, len(a), len(b))


def heterophily_table(g: InteractionGraph, labels: Mapping[str, str]) -> dict[str, float]:
    """The four mean rates followed by the four KS p-values, as one report row."""
    rates = retweet_rates(g, labels)
    row = rates.means()
    for first, second in KS_PAIRS:
        a, b = rates.distribution(first), rates.distribution(second)
        name = f"p({rate_name(first)} vs {rate_name(second)})"
        row[name] = ks_test(a, b)[1] if a and b else math.nan
    return row


@dataclass
class EvalReport:
    roc_points: list[tuple[float, float, float]]
    auc: float
    positives: int
    negatives: int

    def summary(self) -> dict:
        return {"auc": self.auc, "P": self.positives, "N": self.negatives}


def roc_curve(scores: Mapping[str, float], truth: GroundTruth) -> EvalReport:
    """ROC over the labeled accounts; an account is called a bot when its score >= threshold."""
    missing = [a for a in truth if a not in scores]
    if missing:
        raise KeyError(f"no score for {len(missing)} labeled account(s): {', '.join(missing[:20])}")
    accounts = list(truth)
    y = np.array([truth[a] == BOT for a in accounts])
    s = np.array([float(scores[a]) for a in accounts])
    if np.isnan(s).any():
        raise ValueError("scores must not be NaN")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError(f"need at least one bot and one human, got P={n_pos}, N={n_neg}")

    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of each group of equal scores
    group_end = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[group_end]
    fp = np.cumsum(~y)[group_end]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    thresholds = np.r_[math.inf, s[group_end]]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    points = list(zip(fpr.tolist(), tpr.tolist(), thresholds.tolist()))
    return EvalReport(points, auc, n_pos, n_neg)


def normalize_hashtag(tag: str) -> str:
    return tag.strip().lstrip("#").casefold()


def hashtag_diff(
    tweets: Mapping[str, Iterable[str]],
    predicted: Mapping[str, str],
) -> list[tuple[str, int]]:
    """Hashtags used by predicted bots and never by predicted humans, most used first."""
    bot_counts: Counter = Counter()
    human_tags: set[str] = set()
    for account, tags in tweets.items():
        label = predicted.get(account)
        norm = [normalize_hashtag(t) for t in tags]
        norm = [t for t in norm if t]
        if label == BOT:
            bot_counts.update(norm)
        elif label == HUMAN:
            human_tags.update(norm)
    ranked = [(tag, c) for tag, c in bot_counts.items() if tag not in human_tags]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked
