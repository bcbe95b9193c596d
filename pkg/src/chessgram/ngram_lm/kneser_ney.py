"""Interpolated modified Kneser-Ney estimation.

Adjusted counts: the highest order and any n-gram starting with ``<s>`` keep
their raw counts; every other n-gram is counted by its number of distinct
left extensions. Each order gets three discounts (1, 2, 3+) from its
count-of-counts::

    Y  = t1 / (t1 + 2 t2)
    Dk = k - (k + 1) Y t(k+1) / tk

A context ``c`` with adjusted-count total ``S`` gives each continuation
``(a - D(a)) / S`` and hands ``sum(D(a)) / S`` to the next lower order. The
unigram level interpolates with a uniform distribution over every
vocabulary entry except ``<s>``; ``<unk>`` receives only that share.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass

from .counts import NGramCounts
from .model import LOG_ZERO, NGramModel
from .vocab import BOS, EOS, RESERVED, UNK, Vocabulary

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoothingConfig:
    fallback_discount: float = 0.75


@dataclass(frozen=True)
class Discount:
    d1: float
    d2: float
    d3: float
    fallback: bool = False

    def get(self, count: int) -> float:
        if count >= 3:
            return self.d3
        return (0.0, self.d1, self.d2)[count]


def compute_discount(count_of_counts: Counter, fallback: float = 0.75) -> Discount:
    """Closed-form discounts, or ``fallback`` for all three when degenerate.

    Degenerate means no n-grams with adjusted count 1, 2 or 3, or a
    discount outside ``(0, k]``.
    """
    t = [count_of_counts.get(k, 0) for k in range(5)]
    if t[1] and t[2] and t[3]:
        y = t[1] / (t[1] + 2.0 * t[2])
        d = [k - (k + 1) * y * t[k + 1] / t[k] for k in (1, 2, 3)]
        if all(0.0 < dk <= k for k, dk in zip((1, 2, 3), d)):
            return Discount(*d)
    return Discount(fallback, fallback, fallback, fallback=True)


def adjusted_counts(counts: NGramCounts) -> list[dict]:
    """Kneser-Ney adjusted counts per order (index n-1); ``<s>`` unigram dropped."""
    order = counts.order
    out = []
    for n in range(1, order + 1):
        raw = counts.counts[n - 1]
        if n == order:
            adj = dict(raw)
        else:
            cont = counts.continuation[n - 1]
            adj = {g: (c if g[0] == BOS else cont[g]) for g, c in raw.items()}
        if n == 1:
            adj.pop((BOS,), None)
        out.append(adj)
    return out


def estimate(counts: NGramCounts, config: SmoothingConfig = SmoothingConfig(), level=None) -> NGramModel:
    order = counts.order
    adjusted = adjusted_counts(counts)

    vocab = Vocabulary(sorted(g[0] for g in adjusted[0] if g[0] not in RESERVED))
    discounts = []
    for n, adj in enumerate(adjusted, start=1):
        d = compute_discount(Counter(adj.values()), config.fallback_discount)
        if d.fallback:
            log.warning("order %d: degenerate count-of-counts, using fixed discount %g",
                        n, config.fallback_discount)
        discounts.append(d)

    prob: dict = {}
    backoff: dict = {}
    lower: dict = {}
    for n, (adj, disc) in enumerate(zip(adjusted, discounts), start=1):
        denom: dict = defaultdict(int)
        mass: dict = defaultdict(float)
        get_d = disc.get
        for g, a in adj.items():
            c = g[:-1]
            denom[c] += a
            mass[c] += get_d(a)
        gamma = {c: mass[c] / s for c, s in denom.items()}
        current: dict = {}
        if n == 1:
            s = denom.get((), 0)
            g0 = gamma.get((), 1.0)
            uniform = g0 / (len(vocab) - 1)
            for g, a in adj.items():
                current[g] = (a - get_d(a)) / s + uniform
            current[(UNK,)] = uniform
            current.setdefault((EOS,), uniform)
        else:
            for g, a in adj.items():
                c = g[:-1]
                current[g] = (a - get_d(a)) / denom[c] + gamma[c] * lower[g[1:]]
        for g, p in current.items():
            prob[g] = min(0.0, math.log10(p))
        if n == 1:
            prob[(BOS,)] = LOG_ZERO
        # gamma of an (n-1)-token context is that entry's backoff weight
        for c, gm in gamma.items():
            if c:
                backoff[c] = math.log10(gm)
        lower = current
    return NGramModel(order, vocab, prob, backoff, level=level)
