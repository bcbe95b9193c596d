"""Skill-level classification by lowest cumulative surprisal."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyGame, MissingInput
from .ngram_lm import NGramModel, SmoothingConfig, read_arpa, save_arpa, train
from .pgn_ingest import LEVELS, RatingLevel

K_EARLY = 16
K_FULL = 100


class ModelBank:
    """The seven per-level models, addressed by :class:`RatingLevel`."""

    def __init__(self, models: Mapping[RatingLevel, NGramModel]):
        missing = [str(lv) for lv in LEVELS if lv not in models]
        if missing:
            raise MissingInput(f"model bank lacks levels {', '.join(missing)}")
        self._models = {lv: models[lv] for lv in LEVELS}
        for lv, m in self._models.items():
            if m.level is None:
                m.level = lv
        self._union = None

    def __getitem__(self, level: RatingLevel) -> NGramModel:
        return self._models[level]

    def items(self):
        return self._models.items()

    def models(self) -> list[NGramModel]:
        return list(self._models.values())

    @property
    def order(self) -> int:
        return max(m.order for m in self._models.values())

    def move_union(self):
        """Sorted union of the models' move vocabularies plus, per model, the
        vocabulary id of each union entry (-1 when the model lacks it)."""
        if self._union is None:
            import numpy as np

            moves = sorted(set().union(*(m.vocabulary.moves() for m in self._models.values())))
            index = {}
            for lv, m in self._models.items():
                v = m.vocabulary
                index[lv] = np.array([v.id(t) if t in v else -1 for t in moves], dtype=np.intp)
            self._union = (moves, index)
        return self._union

    @classmethod
    def train(cls, corpora: Mapping[RatingLevel, Iterable[Sequence[str]]], order: int = 5,
              config: SmoothingConfig = SmoothingConfig()) -> "ModelBank":
        return cls({lv: train(corpora[lv], order, config, level=lv) for lv in LEVELS})

    @classmethod
    def load(cls, directory: str | Path) -> "ModelBank":
        directory = Path(directory)
        models = {}
        for lv in LEVELS:
            path = directory / f"{lv}.arpa"
            if not path.exists():
                raise MissingInput(f"no model for {lv}: {path}")
            models[lv] = read_arpa(path, level=lv)
        return cls(models)

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for lv, m in self._models.items():
            save_arpa(m, directory / f"{lv}.arpa")


@dataclass
class SelectorResult:
    totals: dict[RatingLevel, float]
    predicted: RatingLevel
    prefix_used: int
    k: int

    def to_json(self, game=None) -> dict:
        return {
            "game": game,
            "k": self.k,
            "totals_bits": {str(lv): self.totals[lv] for lv in LEVELS},
            "predicted": str(self.predicted),
            "prefix_used": self.prefix_used,
        }


def cumulative_surprisal(model: NGramModel, tokens: Sequence[str], k: int) -> float:
    """Bits summed over the first ``min(k, len(tokens))`` moves."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not tokens:
        raise EmptyGame("cannot score an empty game")
    return math.fsum(model.surprisals(tokens[:k]))


def argmin_level(totals: Mapping[RatingLevel, float]) -> RatingLevel:
    """Lowest total wins; ties go to the lower level."""
    best = None
    for lv in LEVELS:
        if best is None or totals[lv] < totals[best]:
            best = lv
    return best


def classify(bank: ModelBank, tokens: Sequence[str], k: int = K_EARLY) -> SelectorResult:
    totals = {lv: cumulative_surprisal(m, tokens, k) for lv, m in bank.items()}
    return SelectorResult(totals, argmin_level(totals), min(k, len(tokens)), k)
