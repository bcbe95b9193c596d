"""Shared test data builders."""

from __future__ import annotations

import itertools
import random
from functools import lru_cache
from pathlib import Path

from chessgram.eval_harness import SyntheticSpec, default_alphabet, generate_synthetic
from chessgram.ngram_lm import BOS, EOS, train
from chessgram.selector import ModelBank
from oracles import BruteForceKN

FIXTURES = Path(__file__).parent / "fixtures"

# A partially processed Lichess game with engine evaluation comments.
ANNOTATED_MOVETEXT = (
    "1. e4 { [%eval 0.2] } 1... e6 {[%eval 0.13] } 2. Bc4 { [%eval -0.31] } 2... d5 "
    "{[%eval -0.28] } 3. exd5 {[%eval -0.37] } 3... exd5 { [%eval -0.31] } 4. Bb3 "
    "{ [%eval -0.33] } 4... Nf6 { [%eval -0.35] } 5. d4 {[%eval -0.34]} 5... Be7 "
    "{ [%eval 0.0] } 6. Nf3 { [%eval 0.0] } 6... O-O { [%eval -0.08] } 7. Bg5 "
    "{ [%eval -0.19] } 7... h6 { [%eval -0.29] } 8. Bxf6 {[%eval -0.36] } 8... Bxf6 "
    "{ [%eval -0.37] } 9. O-O { [%eval -0.36] } 9... c6 {[%eval -0.12] } 10. Re1 "
    "{ [%eval -0.17]} 10... Bf5 { [%eval -0.04] }"
)
ANNOTATED_CLEAN = "e4 e6 Bc4 d5 exd5 exd5 Bb3 Nf6 d4 Be7 Nf3 O-O Bg5 h6 Bxf6 Bxf6 O-O c6 Re1 Bf5"


def random_corpus(rng: random.Random, alphabet, games, max_len, min_len=0):
    return [[rng.choice(alphabet) for _ in range(rng.randint(min_len, max_len))] for _ in range(games)]


def small_spec(games=150, seed=0, **kw) -> SyntheticSpec:
    kw.setdefault("alphabet", default_alphabet(12, seed))
    kw.setdefault("min_length", 10)
    kw.setdefault("max_length", 40)
    return SyntheticSpec(games_per_level=games, seed=seed, **kw)


@lru_cache(maxsize=None)
def small_world(games=150, test_games=20, order=3, seed=0):
    """(bank, train corpora, test corpora) from a small synthetic spec."""
    spec = small_spec(games, seed)
    train = generate_synthetic(spec, stream=0)
    test = generate_synthetic(small_spec(test_games, seed), stream=1)
    return ModelBank.train(train, order), train, test


def pgn_game(white, black, movetext, extra=(), site="x"):
    lines = ['[Event "Rated Blitz game"]', f'[Site "https://lichess.org/{site}"]']
    if white is not None:
        lines.append(f'[WhiteElo "{white}"]')
    if black is not None:
        lines.append(f'[BlackElo "{black}"]')
    lines.extend(extra)
    return "\n".join(lines) + "\n\n" + movetext + "\n\n"


def oracle_corpora():
    """Deterministic set of <=10-game corpora exercising both discount branches."""
    rng = random.Random(2024)
    out = []
    for i in range(14):
        alphabet = [f"m{j}" for j in range(rng.randint(2, 5))]
        games = rng.randint(1, 10)
        out.append((random_corpus(rng, alphabet, games, 5 if i % 2 else 30), 1 + i % 5))
    return out


def max_rel_error(corpus, order, histories=2):
    m = train(corpus, order)
    ref = BruteForceKN(corpus, order)
    vocab = sorted(ref.vocab) + ["never-seen"]
    worst = 0.0
    for h in itertools.product(vocab, repeat=min(order - 1, histories)):
        for w in vocab:
            q = float(ref.prob(w, h))
            p = 10 ** m.logprob(w, h)
            if w == BOS:
                assert q == 0.0
                continue
            worst = max(worst, abs(p - q) / q)
    return worst


def kenlm_queries(path):
    """Sentences of (word, logprob) pairs from a ``query -v word`` dump."""
    sentences, current = [], []
    for field in path.read_text().split("\t"):
        field = field.strip()
        if not field or "=" not in field:
            continue
        word_id, _n, lp = field.rsplit(" ", 2)
        word = word_id.rsplit("=", 1)[0]
        current.append((word, float(lp)))
        if word == EOS:
            sentences.append(current)
            current = []
    return sentences
