from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import EmptyCorpus
from .vocab import BOS, EOS, UNK, Vocabulary

LOG2_10 = math.log2(10.0)
# ARPA convention for "impossible": <s> is never predicted.
LOG_ZERO = -99.0


@dataclass
class SurprisalTrace:
    """Per-move surprisal in bits. Positions start at 1."""

    entries: list[tuple[int, str, float]] = field(default_factory=list)
    total_surprisal_bits: float = 0.0

    @property
    def token_count(self) -> int:
        return len(self.entries)

    @property
    def bits(self) -> list[float]:
        return [e[2] for e in self.entries]


class NGramModel:
    """Immutable backoff n-gram model with log10 probabilities.

    ``prob`` maps every stored n-gram (a tuple of 1..order tokens) to its
    log10 probability; ``backoff`` maps contexts to log10 backoff weights.
    A context with no entry backs off with weight 1.
    """

    def __init__(self, order: int, vocabulary: Vocabulary, prob: dict, backoff: dict,
                 level=None):
        self.order = order
        self.vocabulary = vocabulary
        self.level = level
        self._prob = prob
        self._backoff = backoff
        self._children = None
        self._unigram = None
        self._dist_cache: dict = {}

    # -- raw access ---------------------------------------------------------

    @property
    def prob_table(self) -> dict:
        return self._prob

    @property
    def backoff_table(self) -> dict:
        return self._backoff

    def ngram_counts(self) -> list[int]:
        sizes = [0] * self.order
        for g in self._prob:
            sizes[len(g) - 1] += 1
        return sizes

    # -- queries ------------------------------------------------------------

    def _context(self, history: Sequence[str]) -> tuple[str, ...]:
        n = self.order - 1
        if n == 0:
            return ()
        return tuple(history[-n:])

    def logprob(self, token: str, history: Sequence[str] = ()) -> float:
        """log10 P(token | history) by standard backoff.

        Only the last ``order - 1`` history tokens are consulted. Unknown
        tokens score as ``<unk>``.
        """
        if token not in self.vocabulary:
            token = UNK
        ctx = self._context(history)
        prob = self._prob
        backoff = self._backoff
        acc = 0.0
        for i in range(len(ctx) + 1):
            c = ctx[i:]
            p = prob.get(c + (token,))
            if p is not None:
                return acc + p
            acc += backoff.get(c, 0.0)
        raise AssertionError(f"unigram entry missing for {token!r}")

    def surprisal(self, token: str, history: Sequence[str] = ()) -> float:
        """-log2 P(token | history) in bits."""
        return max(0.0, -self.logprob(token, history) * LOG2_10)

    def game_bits(self, tokens: Sequence[str], with_end: bool) -> list[float]:
        seq = [BOS, *tokens]
        if with_end:
            seq.append(EOS)
        n = self.order - 1
        lp = self.logprob
        out = []
        for i in range(1, len(seq)):
            lo = i - n if i > n else 0
            out.append(max(0.0, -lp(seq[i], seq[lo:i]) * LOG2_10))
        return out

    def surprisals(self, tokens: Sequence[str]) -> list[float]:
        """Bits for each move, conditioned on the begin marker and earlier moves."""
        return self.game_bits(tokens, False)

    def score_game(self, tokens: Sequence[str]) -> SurprisalTrace:
        bits = self.game_bits(tokens, False)
        entries = [(i + 1, t, b) for i, (t, b) in enumerate(zip(tokens, bits))]
        return SurprisalTrace(entries, math.fsum(bits))

    def perplexity(self, corpus: Iterable[Sequence[str]]) -> float:
        """2 ** (mean bits per scored token); end markers are scored tokens."""
        total = []
        count = 0
        for game in corpus:
            bits = self.game_bits(game, True)
            total.extend(bits)
            count += len(bits)
        if count == 0:
            raise EmptyCorpus("perplexity needs at least one game")
        return 2.0 ** (math.fsum(total) / count)

    # -- full next-token distributions --------------------------------------

    def _build_index(self) -> None:
        vocab = self.vocabulary
        kids: dict[tuple, tuple[list, list]] = {}
        uni = np.zeros(len(vocab))
        for g, lp in self._prob.items():
            if len(g) == 1:
                uni[vocab.id(g[0])] = 10.0 ** lp
            else:
                ids, ps = kids.setdefault(g[:-1], ([], []))
                ids.append(vocab.id(g[-1]))
                ps.append(10.0 ** lp)
        uni[vocab.id(BOS)] = 0.0
        self._unigram = uni
        self._children = {c: (np.array(i, dtype=np.intp), np.array(p)) for c, (i, p) in kids.items()}

    def _dist(self, ctx: tuple) -> np.ndarray:
        if not ctx:
            return self._unigram
        hit = self._dist_cache.get(ctx)
        if hit is not None:
            return hit
        base = self._dist(ctx[1:]) * (10.0 ** self._backoff.get(ctx, 0.0))
        kid = self._children.get(ctx)
        if kid is not None:
            base[kid[0]] = kid[1]
        base[1] = 0.0
        if len(self._dist_cache) > 4096:
            self._dist_cache.clear()
        self._dist_cache[ctx] = base
        return base

    def distribution(self, history: Sequence[str] = ()) -> np.ndarray:
        """P(w | history) for every vocabulary id ``w`` (``<s>`` gets 0).

        The returned array is shared with an internal cache; do not mutate.
        """
        if self._unigram is None:
            self._build_index()
        return self._dist(self._context(history))

    def __repr__(self) -> str:
        tag = f", level={self.level}" if self.level is not None else ""
        return f"NGramModel(order={self.order}, vocab={len(self.vocabulary)}{tag})"
