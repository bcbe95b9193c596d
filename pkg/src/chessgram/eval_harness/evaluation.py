"""Evaluation artifacts: perplexity matrix, surprisal curves, selector
accuracy tables and top-k accuracy-vs-prefix curves.

All per-game work is done once per (game, model) by :class:`ScoredTestsets`
and shared by every artifact, so a full report costs one scoring pass plus
the predictions on the prefix grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from ..errors import MissingInput
from ..pgn_ingest import LEVELS, RatingLevel
from ..predictor import GLOBAL_BENCHMARK, SELECTOR_ASSISTED, hit, predict_global, predict_with_level
from ..selector import ModelBank, argmin_level

DEFAULT_GRID = (2, 4, 8, 16, 30, 50, 70, 100)
MODES = (SELECTOR_ASSISTED, GLOBAL_BENCHMARK)

Corpus = Sequence[Sequence[str]]


@dataclass
class EvalConfig:
    ks: tuple[int, ...] = (16, 100)
    topks: tuple[int, ...] = (1, 3)
    grid: tuple[int, ...] = DEFAULT_GRID
    horizon: int = 100
    curve_level: RatingLevel = RatingLevel.L1
    seed: int = 0
    datasets: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.ks = tuple(int(k) for k in self.ks)
        self.topks = tuple(int(t) for t in self.topks)
        self.grid = tuple(int(h) for h in self.grid)
        self.curve_level = RatingLevel.parse(self.curve_level)
        if any(k < 1 for k in self.ks) or any(t < 1 for t in self.topks):
            raise ValueError("k and topk values must be >= 1")
        if any(h < 1 for h in self.grid) or self.horizon < 1:
            raise ValueError("grid values and horizon must be >= 1")

    def to_dict(self) -> dict:
        return {
            "datasets": dict(self.datasets),
            "ks": list(self.ks),
            "topks": list(self.topks),
            "grid": list(self.grid),
            "horizon": self.horizon,
            "curve_level": str(self.curve_level),
            "seed": self.seed,
        }


def _require_all(testsets: Mapping[RatingLevel, Corpus]) -> None:
    missing = [str(lv) for lv in LEVELS if lv not in testsets]
    if missing:
        raise MissingInput(f"missing test sets for {', '.join(missing)}")


class ScoredTestsets:
    """Per-move bits of every test game under every model.

    ``bits[j][g][i]`` lists the per-move surprisals of game ``g`` of level
    ``LEVELS[j]`` under model ``LEVELS[i]``; ``end[j][g][i]`` is the bits
    of the end marker.
    """

    def __init__(self, bank: ModelBank, testsets: Mapping[RatingLevel, Corpus],
                 levels: Sequence[RatingLevel] = LEVELS):
        self.bank = bank
        self.levels = tuple(levels)
        self.games = {lv: [list(g) for g in testsets[lv]] for lv in self.levels}
        self.bits: dict = {}
        self.end: dict = {}
        for lv in self.levels:
            per_game_bits = []
            per_game_end = []
            for game in self.games[lv]:
                row_bits = []
                row_end = []
                for m in bank.models():
                    b = m.game_bits(game, with_end=True)
                    row_end.append(b.pop())
                    row_bits.append(b)
                per_game_bits.append(row_bits)
                per_game_end.append(row_end)
            self.bits[lv] = per_game_bits
            self.end[lv] = per_game_end

    def totals(self, level: RatingLevel, g: int, k: int) -> dict[RatingLevel, float]:
        rows = self.bits[level][g]
        return {lv: math.fsum(rows[i][:k]) for i, lv in enumerate(LEVELS)}


# --- perplexity -------------------------------------------------------------


def _perplexity_matrix(scored: ScoredTestsets) -> list[list[float | None]]:
    matrix = []
    for i, _model_level in enumerate(LEVELS):
        row = []
        for game_level in LEVELS:
            bits = []
            count = 0
            for g_bits, g_end in zip(scored.bits[game_level], scored.end[game_level]):
                bits.extend(g_bits[i])
                bits.append(g_end[i])
                count += len(g_bits[i]) + 1
            row.append(2.0 ** (math.fsum(bits) / count) if count else None)
        matrix.append(row)
    return matrix


def perplexity_matrix(bank: ModelBank, testsets: Mapping[RatingLevel, Corpus]) -> list[list[float]]:
    """Row i = model level, column j = game level."""
    _require_all(testsets)
    return _perplexity_matrix(ScoredTestsets(bank, testsets))


# --- per-position surprisal -------------------------------------------------


@dataclass
class SurprisalCurves:
    game_level: RatingLevel | None
    positions: list[int]
    counts: list[int]
    models: dict[RatingLevel, list[float]]


def _surprisal_curves(scored: ScoredTestsets, level: RatingLevel, horizon: int) -> SurprisalCurves:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    games = scored.bits[level]
    longest = max((len(g[0]) for g in games), default=0)
    positions = list(range(1, min(horizon, longest) + 1))
    counts = [sum(1 for g in games if len(g[0]) >= p) for p in positions]
    models = {}
    for i, lv in enumerate(LEVELS):
        curve = []
        for p, n in zip(positions, counts):
            curve.append(math.fsum(g[i][p - 1] for g in games if len(g[i]) >= p) / n)
        models[lv] = curve
    return SurprisalCurves(level, positions, counts, models)


def avg_move_surprisal(bank: ModelBank, testset: Corpus, horizon: int = 100) -> SurprisalCurves:
    """Mean bits at each position 1..horizon over games reaching it, per model."""
    scored = ScoredTestsets(bank, {RatingLevel.L1: testset}, levels=(RatingLevel.L1,))
    curves = _surprisal_curves(scored, RatingLevel.L1, horizon)
    curves.game_level = None
    return curves


# --- selector accuracy ------------------------------------------------------


@dataclass
class SelectorTable:
    k: int
    games: dict[RatingLevel, int]
    correct: dict[RatingLevel, int]
    overall: float | None
    avg_error: float | None

    def accuracy(self, level: RatingLevel) -> float | None:
        n = self.games[level]
        return self.correct[level] / n if n else None


def _classification_log(scored: ScoredTestsets, ks: Sequence[int]) -> list[dict]:
    log = []
    for k in ks:
        for lv in scored.levels:
            for g in range(len(scored.games[lv])):
                predicted = argmin_level(scored.totals(lv, g, k))
                log.append({"game": f"{lv}#{g}", "level": str(lv), "k": k, "predicted": str(predicted)})
    return log


def table_from_log(log: Sequence[dict], k: int) -> SelectorTable:
    games = {lv: 0 for lv in LEVELS}
    correct = {lv: 0 for lv in LEVELS}
    errors = []
    for row in log:
        if row["k"] != k:
            continue
        truth = RatingLevel.parse(row["level"])
        pred = RatingLevel.parse(row["predicted"])
        games[truth] += 1
        correct[truth] += truth == pred
        errors.append(abs(int(pred) - int(truth)))
    total = sum(games.values())
    overall = sum(correct.values()) / total if total else None
    avg_error = math.fsum(errors) / total if total else None
    return SelectorTable(k, games, correct, overall, avg_error)


def selector_accuracy(bank: ModelBank, testsets: Mapping[RatingLevel, Corpus], k: int) -> SelectorTable:
    if k < 1:
        raise ValueError("k must be >= 1")
    _require_all(testsets)
    scored = ScoredTestsets(bank, testsets)
    return table_from_log(_classification_log(scored, [k]), k)


def classifier_avg_error(bank: ModelBank, testsets: Mapping[RatingLevel, Corpus], k: int) -> float | None:
    """Mean |predicted ordinal - true ordinal| over all test games."""
    return selector_accuracy(bank, testsets, k).avg_error


# --- top-k curves -----------------------------------------------------------


@dataclass
class AccuracyCurve:
    mode: str
    topk: int
    grid: list[int]
    games: list[int]
    hits: list[int]

    @property
    def accuracy(self) -> list[float | None]:
        return [h / n if n else None for h, n in zip(self.hits, self.games)]


def _accuracy_curves(scored: ScoredTestsets, modes: Sequence[str], topks: Sequence[int],
                     grid: Sequence[int]) -> list[AccuracyCurve]:
    bank = scored.bank
    widest = max(topks)
    hits = {(m, t): [0] * len(grid) for m in modes for t in topks}
    games = [0] * len(grid)
    for gi, h in enumerate(grid):
        if h < 1:
            raise ValueError("grid values must be >= 1")
        for lv in scored.levels:
            for g, game in enumerate(scored.games[lv]):
                if len(game) <= h:
                    continue
                games[gi] += 1
                prefix, actual = game[:h], game[h]
                for mode in modes:
                    if mode == SELECTOR_ASSISTED:
                        level = argmin_level(scored.totals(lv, g, h))
                        result = predict_with_level(bank, level, prefix, widest)
                    else:
                        result = predict_global(bank, prefix, widest)
                    for t in topks:
                        # rankings are deterministic, so top-t is a prefix of top-widest
                        if hit(replace(result, candidates=result.candidates[:t], k=t), actual):
                            hits[(mode, t)][gi] += 1
    return [AccuracyCurve(m, t, list(grid), list(games), hits[(m, t)]) for m in modes for t in topks]


def topk_accuracy_curve(bank: ModelBank, testsets: Mapping[RatingLevel, Corpus], mode: str,
                        topk: int, grid: Sequence[int] = DEFAULT_GRID) -> AccuracyCurve:
    """Accuracy of predicting move h+1 from the first h moves, for h in ``grid``.

    Only games longer than h take part at h. In selector-assisted mode the
    level is chosen from the same h moves.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    _require_all(testsets)
    return _accuracy_curves(ScoredTestsets(bank, testsets), [mode], [topk], grid)[0]


# --- full report ------------------------------------------------------------


@dataclass
class EvalReport:
    config: dict
    perplexity_matrix: list[list[float]]
    selector_tables: list[SelectorTable]
    surprisal_curves: SurprisalCurves
    accuracy_curves: list[AccuracyCurve]
    classification_log: list[dict]

    def selector_table(self, k: int) -> SelectorTable:
        for t in self.selector_tables:
            if t.k == k:
                return t
        raise KeyError(k)

    def curve(self, mode: str, topk: int) -> AccuracyCurve:
        for c in self.accuracy_curves:
            if c.mode == mode and c.topk == topk:
                return c
        raise KeyError((mode, topk))


def evaluate(bank: ModelBank, testsets: Mapping[RatingLevel, Corpus],
             config: EvalConfig | None = None) -> EvalReport:
    config = config or EvalConfig()
    _require_all(testsets)
    scored = ScoredTestsets(bank, testsets)
    log = _classification_log(scored, config.ks)
    cfg = config.to_dict()
    cfg["order"] = bank.order
    return EvalReport(
        config=cfg,
        perplexity_matrix=_perplexity_matrix(scored),
        selector_tables=[table_from_log(log, k) for k in config.ks],
        surprisal_curves=_surprisal_curves(scored, config.curve_level, config.horizon),
        accuracy_curves=_accuracy_curves(scored, MODES, config.topks, config.grid),
        classification_log=log,
    )
