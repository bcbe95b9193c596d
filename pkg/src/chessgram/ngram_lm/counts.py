from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import InvalidOrder
from .vocab import BOS, EOS

NGram = tuple[str, ...]


@dataclass
class NGramCounts:
    """Raw occurrence counts of every n-gram up to ``order``.

    Each game is framed as ``<s> w1 .. wm </s>``. Padding with ``order - 1``
    begin markers is collapsed to one, so no stored n-gram contains more
    than a single ``<s>`` and it only ever appears first. ``counts[n - 1]``
    holds the n-grams; ``continuation[n - 1]`` maps an n-gram to the number
    of distinct tokens seen immediately to its left (defined for n < order).
    """

    order: int
    counts: list[Counter] = field(default_factory=list)
    continuation: list[Counter] = field(default_factory=list)
    games: int = 0
    tokens: int = 0

    def count(self, ngram: Sequence[str]) -> int:
        n = len(ngram)
        if not 1 <= n <= self.order:
            return 0
        return self.counts[n - 1].get(tuple(ngram), 0)


def count_ngrams(corpus: Iterable[Sequence[str]], order: int) -> NGramCounts:
    if order < 1:
        raise InvalidOrder(f"order must be >= 1, got {order}")
    counters = [Counter() for _ in range(order)]
    games = tokens = 0
    for game in corpus:
        seq = (BOS, *game, EOS)
        games += 1
        tokens += len(seq) - 2
        for n in range(1, min(order, len(seq)) + 1):
            counters[n - 1].update(zip(*[seq[i:] for i in range(n)]))
    continuation = []
    for n in range(2, order + 1):
        cont: Counter = Counter()
        for g in counters[n - 1]:
            cont[g[1:]] += 1
        continuation.append(cont)
    return NGramCounts(order, counters, continuation, games, tokens)
