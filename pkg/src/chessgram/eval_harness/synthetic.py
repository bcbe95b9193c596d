"""Seeded synthetic "dialects" standing in for per-level game archives.

Each level is a first-order Markov source over a move alphabet: from every
previous move (and from the start state) it prefers its own small set of
continuations, and with probability ``noise`` it plays a uniformly random
move instead. Lower levels are noisier. An optional bump raises the noise
around a middlegame position, mimicking the mid-game loss of predictability.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass, field

from ..errors import InvalidSpec
from ..pgn_ingest import LEVELS, RatingLevel

_PIECES = ("", "N", "B", "R", "Q", "K")
_SQUARES = tuple(f + r for r in "12345678" for f in "abcdefgh")


def default_alphabet(size: int = 40, seed: int = 0) -> tuple[str, ...]:
    """SAN-looking move names, deterministic in ``seed``."""
    pool = [p + s for p, s in itertools.product(_PIECES, _SQUARES)]
    return tuple(sorted(random.Random(seed).sample(pool, size)))


@dataclass(frozen=True)
class SyntheticSpec:
    alphabet: tuple[str, ...] = field(default_factory=default_alphabet)
    noise: tuple[float, ...] = (0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15)
    games_per_level: int = 5000
    min_length: int = 20
    max_length: int = 130
    midgame_noise: float = 0.0
    midgame_center: float = 50.0
    midgame_width: float = 15.0
    shared_alphabet: bool = True
    # per level: (n_states x n_moves) preferred-continuation distributions;
    # state 0 is the start of the game, state i+1 follows alphabet[i]
    preferences: tuple | None = None
    preferred_weights: tuple[float, ...] = (0.7, 0.3)
    # weight of a preference table common to all levels in each level's table
    shared_weight: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if len(self.noise) != len(LEVELS):
            raise InvalidSpec(f"need {len(LEVELS)} noise rates, got {len(self.noise)}")
        if any(not 0.0 <= x <= 1.0 for x in self.noise):
            raise InvalidSpec("noise rates must lie in [0, 1]")
        if not 0.0 <= self.shared_weight <= 1.0:
            raise InvalidSpec("shared_weight must lie in [0, 1]")
        if not 0.0 <= self.midgame_noise <= 1.0:
            raise InvalidSpec("midgame_noise must lie in [0, 1]")
        if len(set(self.alphabet)) != len(self.alphabet) or len(self.alphabet) < 2:
            raise InvalidSpec("alphabet needs at least two distinct moves")
        if not 1 <= self.min_length <= self.max_length:
            raise InvalidSpec("need 1 <= min_length <= max_length")
        if self.games_per_level < 0:
            raise InvalidSpec("games_per_level must be nonnegative")
        _check_distribution(self.preferred_weights, len(self.alphabet), "preferred_weights")
        if self.preferences is not None:
            if len(self.preferences) != len(LEVELS):
                raise InvalidSpec("preferences must hold one table per level")
            for table in self.preferences:
                if len(table) != len(self.alphabet) + 1:
                    raise InvalidSpec("each preference table needs len(alphabet) + 1 rows")
                for row in table:
                    _check_distribution(row, len(self.alphabet), "preference row")


def _check_distribution(weights, size: int, what: str) -> None:
    if not 0 < len(weights) <= size:
        raise InvalidSpec(f"{what}: bad length {len(weights)}")
    if any(w < 0 or not math.isfinite(w) for w in weights):
        raise InvalidSpec(f"{what}: weights must be finite and nonnegative")
    if abs(math.fsum(weights) - 1.0) > 1e-9:
        raise InvalidSpec(f"{what}: weights sum to {math.fsum(weights)!r}, not 1")


def preference_tables(spec: SyntheticSpec) -> list[list[list[float]]]:
    """Dense per-level preference distributions (explicit or seeded)."""
    if spec.preferences is not None:
        return [[list(row) for row in table] for table in spec.preferences]
    rng = random.Random(f"prefs:{spec.seed}")
    a = len(spec.alphabet)
    k = len(spec.preferred_weights)

    def draw() -> list[list[float]]:
        table = []
        for _state in range(a + 1):
            row = [0.0] * a
            for j, w in zip(rng.sample(range(a), k), spec.preferred_weights):
                row[j] = w
            table.append(row)
        return table

    common = draw()
    s = spec.shared_weight
    tables = []
    for _ in LEVELS:
        own = draw()
        tables.append([[s * c + (1.0 - s) * o for c, o in zip(crow, orow)]
                       for crow, orow in zip(common, own)])
    return tables


def _level_alphabet(spec: SyntheticSpec, level: RatingLevel) -> list[str]:
    if spec.shared_alphabet:
        return list(spec.alphabet)
    return [f"{m}@{level}" for m in spec.alphabet]


def generate_synthetic(spec: SyntheticSpec, stream: int = 0) -> dict[RatingLevel, list[list[str]]]:
    """Corpora for all seven levels.

    ``stream`` selects an independent draw from the same dialects, e.g.
    0 for training data and 1 for test data.
    """
    spec.validate()
    tables = preference_tables(spec)
    a = len(spec.alphabet)
    out = {}
    for lv, table, noise in zip(LEVELS, tables, spec.noise):
        names = _level_alphabet(spec, lv)
        cum = [list(itertools.accumulate(row)) for row in table]
        rng = random.Random(f"games:{spec.seed}:{stream}:{int(lv)}")
        rand, randrange = rng.random, rng.randrange
        games = []
        for _ in range(spec.games_per_level):
            length = rng.randint(spec.min_length, spec.max_length)
            state = 0
            game = []
            for pos in range(1, length + 1):
                eps = noise
                if spec.midgame_noise:
                    z = (pos - spec.midgame_center) / spec.midgame_width
                    eps = min(1.0, noise + spec.midgame_noise * math.exp(-0.5 * z * z))
                if rand() < eps:
                    move = randrange(a)
                else:
                    row = cum[state]
                    move = min(bisect.bisect_right(row, rand() * row[-1]), a - 1)
                game.append(names[move])
                state = move + 1
            games.append(game)
        out[lv] = games
    return out
