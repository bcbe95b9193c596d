"""Live analysis of one game, move by move.

After every entered half-move the session reports the running cumulative
surprisal under each level's model, the level the selector currently
predicts, and the top next-move candidates in both prediction modes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .pgn_ingest import LEVELS, RatingLevel
from .predictor import PredictionResult, predict_global, predict_with_level
from .selector import K_EARLY, ModelBank, SelectorResult, classify


@dataclass
class SessionState:
    moves: list[str]
    selector: SelectorResult
    selected: PredictionResult
    benchmark: PredictionResult

    def to_json(self) -> dict:
        return {
            "moves": list(self.moves),
            "selector": self.selector.to_json(),
            "selected": self.selected.to_json(),
            "benchmark": self.benchmark.to_json(),
        }

    def render(self) -> str:
        lines = [f"[{len(self.moves)}] {' '.join(self.moves)}"]
        totals = " ".join(f"{lv}={self.selector.totals[lv]:.3f}" for lv in LEVELS)
        lines.append(f"bits(k={self.selector.k}): {totals}")
        lines.append(f"level: {self.selector.predicted}")
        lines.append(f"selected({self.selected.selected_level}): {_cands(self.selected, False)}")
        lines.append(f"benchmark: {_cands(self.benchmark, True)}")
        return "\n".join(lines)


def _cands(result: PredictionResult, with_level: bool) -> str:
    parts = []
    for c in result.candidates:
        tag = f" ({c.level})" if with_level else ""
        parts.append(f"{c.move} {c.p:.4f}{tag}")
    return " | ".join(parts) or "-"


class AnalysisSession:
    def __init__(self, bank: ModelBank, k: int = K_EARLY, topk: int = 3):
        if k < 1 or topk < 1:
            raise ValueError("k and topk must be >= 1")
        self.bank = bank
        self.k = k
        self.topk = topk
        self.moves: list[str] = []

    def push(self, move: str) -> SessionState:
        self.moves.append(move)
        return self.state()

    def undo(self) -> SessionState | None:
        """Drop the last move; returns the new state, or None once the game is empty."""
        if self.moves:
            self.moves.pop()
        return self.state() if self.moves else None

    def reset(self) -> None:
        self.moves = []

    def state(self) -> SessionState:
        sel = classify(self.bank, self.moves, self.k)
        level: RatingLevel = sel.predicted
        return SessionState(
            moves=list(self.moves),
            selector=sel,
            selected=predict_with_level(self.bank, level, self.moves, self.topk),
            benchmark=predict_global(self.bank, self.moves, self.topk),
        )
