"""Top-k next-move prediction.

Two modes share one ranking rule (probability descending, then move name):

* ``selector_assisted`` classifies the prefix and ranks moves under the
  selected level's model only;
* ``global_benchmark`` scores every move under all seven models and keeps,
  per move, the highest probability and the level that produced it.

Models see at most their last ``order - 1`` moves of context and know
nothing about the board, so candidates can be illegal unless a legality
callback is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import EmptyGame
from .ngram_lm import BOS, NGramModel
from .pgn_ingest import LEVELS, RatingLevel
from .selector import K_EARLY, ModelBank, classify

SELECTOR_ASSISTED = "selector_assisted"
GLOBAL_BENCHMARK = "global_benchmark"

LegalMoves = Callable[[Sequence[str]], Iterable[str]]


@dataclass
class Candidate:
    move: str
    p: float
    level: RatingLevel


@dataclass
class PredictionResult:
    mode: str
    candidates: list[Candidate]
    k: int
    selected_level: RatingLevel | None = None
    prefix_len: int = 0
    # number of (model, move) probabilities evaluated for the ranking
    scored: int = field(default=0, compare=False)

    @property
    def moves(self) -> list[str]:
        return [c.move for c in self.candidates]

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "selected_level": str(self.selected_level) if self.selected_level else None,
            "prefix_len": self.prefix_len,
            "topk": self.k,
            "candidates": [{"move": c.move, "p": c.p, "level": str(c.level)} for c in self.candidates],
        }


def _rank(moves: Sequence[str], probs: np.ndarray, levels: Sequence[RatingLevel],
          topk: int, prefix: Sequence[str], legal_moves: LegalMoves | None) -> list[Candidate]:
    # ``moves`` is sorted, so position doubles as the lexicographic tie-break
    valid = probs > 0.0
    if legal_moves is not None:
        allowed = set(legal_moves(prefix))
        valid &= np.fromiter((m in allowed for m in moves), dtype=bool, count=len(moves))
    idx = np.flatnonzero(valid)
    order = idx[np.lexsort((idx, -probs[idx]))][:topk]
    return [Candidate(moves[i], float(probs[i]), levels[i]) for i in order]


def _check(prefix: Sequence[str], topk: int) -> None:
    if not prefix:
        raise EmptyGame("prediction needs a non-empty prefix")
    if topk < 1:
        raise ValueError(f"topk must be >= 1, got {topk}")


def _legality(legality_filter: bool, legal_moves: LegalMoves | None) -> LegalMoves | None:
    if not legality_filter:
        return None
    if legal_moves is None:
        raise ValueError("legality_filter requires a legal_moves callback")
    return legal_moves


def predict_with_level(bank: ModelBank, level: RatingLevel, prefix: Sequence[str], topk: int = 3,
                       legal_moves: LegalMoves | None = None) -> PredictionResult:
    """Rank moves under one level's model, skipping classification."""
    _check(prefix, topk)
    moves, index = bank.move_union()
    ids = index[level]
    model: NGramModel = bank[level]
    dist = model.distribution([BOS, *prefix])
    present = ids >= 0
    probs = np.where(present, dist[np.where(present, ids, 0)], 0.0)
    cands = _rank(moves, probs, [level] * len(moves), topk, prefix, legal_moves)
    return PredictionResult(SELECTOR_ASSISTED, cands, topk, level, len(prefix),
                            scored=int(present.sum()))


def predict_selected(bank: ModelBank, prefix: Sequence[str], selector_k: int = K_EARLY,
                     topk: int = 3, legality_filter: bool = False,
                     legal_moves: LegalMoves | None = None) -> PredictionResult:
    _check(prefix, topk)
    level = classify(bank, prefix, selector_k).predicted
    return predict_with_level(bank, level, prefix, topk, _legality(legality_filter, legal_moves))


def predict_global(bank: ModelBank, prefix: Sequence[str], topk: int = 3,
                   legality_filter: bool = False,
                   legal_moves: LegalMoves | None = None) -> PredictionResult:
    _check(prefix, topk)
    moves, index = bank.move_union()
    table = np.zeros((len(LEVELS), len(moves)))
    scored = 0
    context = [BOS, *prefix]
    for row, lv in enumerate(LEVELS):
        ids = index[lv]
        present = ids >= 0
        dist = bank[lv].distribution(context)
        table[row] = np.where(present, dist[np.where(present, ids, 0)], 0.0)
        scored += int(present.sum())
    best = table.max(axis=0)
    source = table.argmax(axis=0)  # first maximum, i.e. the lower level
    levels = [LEVELS[r] for r in source]
    cands = _rank(moves, best, levels, topk, prefix, _legality(legality_filter, legal_moves))
    return PredictionResult(GLOBAL_BENCHMARK, cands, topk, None, len(prefix), scored=scored)


def hit(result: PredictionResult, actual_move: str) -> bool:
    return any(c.move == actual_move for c in result.candidates)
