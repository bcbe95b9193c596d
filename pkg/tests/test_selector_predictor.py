import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chessgram.errors import EmptyGame, MissingInput
from chessgram.ngram_lm import BOS, EOS, UNK, NGramModel, Vocabulary
from chessgram.pgn_ingest import LEVELS, RatingLevel
from chessgram.predictor import (GLOBAL_BENCHMARK, SELECTOR_ASSISTED, Candidate, PredictionResult, hit,
                                 predict_global, predict_selected, predict_with_level)
from chessgram.selector import ModelBank, argmin_level, classify, cumulative_surprisal
from helpers import small_world

L = RatingLevel


def unigram(probs: dict[str, float]) -> NGramModel:
    """Order-1 model with the given move probabilities; the rest goes to </s>."""
    rest = 1.0 - sum(probs.values())
    prob = {(w,): math.log10(p) for w, p in probs.items()}
    prob[(EOS,)] = math.log10(rest) if rest > 0 else -99.0
    prob[(UNK,)] = -99.0
    prob[(BOS,)] = -99.0
    return NGramModel(1, Vocabulary(sorted(probs)), prob, {})


def bank_of(per_level: dict) -> ModelBank:
    filler = per_level.get("default")
    return ModelBank({lv: per_level.get(lv, filler) for lv in LEVELS})


# --- selector ---------------------------------------------------------------


def test_argmin_examples():
    totals = dict(zip(LEVELS, [30.1, 28.5, 29.0, 33.0, 35.2, 40.0, 41.3]))
    assert argmin_level(totals) == L.L2
    assert argmin_level(dict.fromkeys(LEVELS, 5.0)) == L.L1
    assert argmin_level(dict(zip(LEVELS, [3, 2, 2, 9, 9, 9, 9]))) == L.L2


def test_cumulative_surprisal_definitions():
    bank, _, test = small_world()
    m = bank[L.L3]
    game = test[L.L3][0]
    assert cumulative_surprisal(m, game, 10**6) == pytest.approx(m.score_game(game).total_surprisal_bits)
    assert cumulative_surprisal(m, game, 1) == pytest.approx(m.score_game(game).bits[0])
    assert cumulative_surprisal(m, game, 16) == pytest.approx(math.fsum(m.score_game(game).bits[:16]))
    with pytest.raises(EmptyGame):
        cumulative_surprisal(m, [], 16)
    with pytest.raises(ValueError):
        cumulative_surprisal(m, game, 0)


def test_classify_short_game_and_json():
    bank, _, test = small_world()
    game = test[L.L5][0][:10]
    res = classify(bank, game, 16)
    assert res.prefix_used == 10
    assert res.predicted == argmin_level(res.totals)
    doc = res.to_json(game=7)
    assert doc == {"game": 7, "k": 16, "totals_bits": {str(lv): res.totals[lv] for lv in LEVELS},
                   "predicted": str(res.predicted), "prefix_used": 10}
    with pytest.raises(EmptyGame):
        classify(bank, [], 16)


def test_cumulative_surprisal_nondecreasing_in_k():
    bank, _, test = small_world()
    game = test[L.L2][3]
    for m in bank.models():
        vals = [cumulative_surprisal(m, game, k) for k in range(1, len(game) + 2)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


@settings(max_examples=1000)
@given(st.lists(st.floats(0, 1e4, allow_nan=False), min_size=7, max_size=7),
       st.floats(-1e3, 1e3, allow_nan=False), st.floats(1e-3, 1e3, allow_nan=False))
def test_argmin_invariance(values, c, lam):
    # perturbations that preserve the order of the totals must preserve the argmin
    totals = dict(zip(LEVELS, values))
    base = argmin_level(totals)
    shifted = {lv: v + c for lv, v in totals.items()}
    scaled = {lv: v * lam for lv, v in totals.items()}
    if _order_preserved(values, [v + c for v in values]):
        assert argmin_level(shifted) == base
    if _order_preserved(values, [v * lam for v in values]):
        assert argmin_level(scaled) == base


def _order_preserved(a, b):
    # float rounding can merge two distinct totals; the invariance is about exact arithmetic
    return all((x < y) == (u < v) and (x == y) == (u == v) for x, u in zip(a, b) for y, v in zip(a, b))


def test_bank_requires_all_levels(tmp_path):
    m = unigram({"a": 0.5})
    with pytest.raises(MissingInput):
        ModelBank({L.L1: m})
    with pytest.raises(MissingInput):
        ModelBank.load(tmp_path)


def test_bank_save_load(tmp_path):
    bank, _, test = small_world()
    bank.save(tmp_path)
    again = ModelBank.load(tmp_path)
    game = test[L.L4][0]
    a, b = classify(bank, game, 16), classify(again, game, 16)
    assert a.predicted == b.predicted
    for lv in LEVELS:
        assert a.totals[lv] == pytest.approx(b.totals[lv], abs=1e-4)


# --- predictor --------------------------------------------------------------


def test_two_token_vocabulary_top1():
    m = unigram({"a": 0.6, "b": 0.4 - 1e-12})
    bank = bank_of({"default": m})
    r = predict_selected(bank, ["a"], topk=1)
    assert r.moves == ["a"] and r.candidates[0].p == pytest.approx(0.6)
    assert r.mode == SELECTOR_ASSISTED
    full = predict_selected(bank, ["a"], topk=10)
    assert full.moves == ["a", "b"]


def test_global_max_over_pairs_and_dedup():
    m1 = unigram({"a": 0.6, "b": 0.4 - 1e-9})
    m2 = unigram({"a": 0.3, "b": 0.7 - 1e-9})
    bank = bank_of({"default": m1, L.L2: m2})
    r = predict_global(bank, ["a"], topk=1)
    assert r.moves == ["b"] and r.candidates[0].level == L.L2
    assert r.candidates[0].p == pytest.approx(0.7)
    r2 = predict_global(bank, ["a"], topk=2)
    assert [(c.move, round(c.p, 6), c.level) for c in r2.candidates] == [("b", 0.7, L.L2), ("a", 0.6, L.L1)]
    assert r2.mode == GLOBAL_BENCHMARK and r2.selected_level is None


def test_dominant_model_supplies_all_candidates():
    strong = unigram({"a": 0.5, "b": 0.3, "c": 0.2 - 1e-9})
    weak = unigram({"a": 0.1, "b": 0.1, "c": 0.1})
    bank = bank_of({"default": weak, L.L6: strong})
    r = predict_global(bank, ["a"], topk=3)
    assert {c.level for c in r.candidates} == {L.L6}


def test_selected_differs_from_global_as_described():
    # the prefix "x" is most likely under L2, whose favourite reply is "a";
    # L4 is far more confident about "b", so the global method follows L4
    l2 = unigram({"x": 0.3, "a": 0.4, "b": 0.1})
    l4 = unigram({"x": 0.01, "a": 0.01, "b": 0.9})
    other = unigram({"x": 0.05, "a": 0.2, "b": 0.2})
    bank = bank_of({"default": other, L.L2: l2, L.L4: l4})
    sel = predict_selected(bank, ["x"], topk=1)
    glob = predict_global(bank, ["x"], topk=1)
    assert sel.selected_level == L.L2 and sel.moves == ["a"]
    assert glob.moves == ["b"] and glob.candidates[0].level == L.L4


def test_ties_break_lexicographically():
    m = unigram({"b": 0.25, "a": 0.25, "c": 0.25})
    r = predict_selected(bank_of({"default": m}), ["a"], topk=3)
    assert r.moves == ["a", "b", "c"]


def test_reserved_tokens_never_predicted_and_unknown_never_hits():
    bank, _, test = small_world()
    prefix = test[L.L1][0][:5]
    for r in (predict_selected(bank, prefix, topk=100), predict_global(bank, prefix, topk=100)):
        assert not {UNK, BOS, EOS} & set(r.moves)
        assert len(set(r.moves)) == len(r.moves)
        assert all(0 < c.p <= 1 for c in r.candidates)
        ps = [c.p for c in r.candidates]
        assert ps == sorted(ps, reverse=True)
        assert not hit(r, "never-seen-move")
        assert not hit(r, UNK)


def test_hit_predicate():
    r = PredictionResult(SELECTOR_ASSISTED, [Candidate("e4", 0.5, L.L1)], 1)
    assert hit(r, "e4") and not hit(r, "d4")


def test_candidate_count_is_min_of_k_and_vocabulary():
    bank, _, test = small_world()
    prefix = test[L.L3][0][:4]
    n_moves = len(bank[L.L3].vocabulary.moves())
    r = predict_with_level(bank, L.L3, prefix, topk=3)
    assert len(r.candidates) == 3
    r = predict_with_level(bank, L.L3, prefix, topk=1000)
    assert len(r.candidates) == n_moves


def test_mode_containment_and_global_dominance():
    bank, _, test = small_world()
    rng = random.Random(3)
    for _ in range(20):
        lv = rng.choice(LEVELS)
        game = rng.choice(test[lv])
        prefix = game[:rng.randint(1, len(game))]
        sel = predict_selected(bank, prefix, topk=10**6)
        glob = predict_global(bank, prefix, topk=10**6)
        assert set(sel.moves) == set(glob.moves)
        gp = {c.move: c.p for c in glob.candidates}
        for c in sel.candidates:
            assert gp[c.move] >= c.p


def test_selected_mode_does_a_seventh_of_the_work():
    bank, _, test = small_world()
    prefix = test[L.L6][0][:8]
    sel = predict_selected(bank, prefix, topk=3)
    glob = predict_global(bank, prefix, topk=3)
    assert sel.scored * 7 <= glob.scored


def test_rank_stability():
    bank, _, test = small_world()
    prefix = test[L.L7][1][:12]
    assert predict_global(bank, prefix, 5) == predict_global(bank, prefix, 5)
    assert predict_selected(bank, prefix, topk=5) == predict_selected(bank, prefix, topk=5)


def test_legality_filter():
    m = unigram({"a": 0.5, "b": 0.3, "c": 0.1})
    bank = bank_of({"default": m})
    legal = lambda prefix: {"b", "c"}  # noqa: E731
    assert predict_selected(bank, ["a"], topk=1, legality_filter=True, legal_moves=legal).moves == ["b"]
    assert predict_global(bank, ["a"], topk=2, legality_filter=True, legal_moves=legal).moves == ["b", "c"]
    assert predict_selected(bank, ["a"], topk=1, legal_moves=legal).moves == ["a"]  # filter off
    with pytest.raises(ValueError):
        predict_selected(bank, ["a"], legality_filter=True)


def test_prediction_errors():
    bank = bank_of({"default": unigram({"a": 0.5})})
    with pytest.raises(EmptyGame):
        predict_selected(bank, [])
    with pytest.raises(EmptyGame):
        predict_global(bank, [])
    with pytest.raises(ValueError):
        predict_global(bank, ["a"], topk=0)


def test_prediction_json():
    bank = bank_of({"default": unigram({"Nf3": 0.31, "e4": 0.2})})
    doc = predict_selected(bank, ["e4"], topk=1).to_json()
    assert doc == {"mode": "selector_assisted", "selected_level": "L1", "prefix_len": 1, "topk": 1,
                   "candidates": [{"move": "Nf3", "p": pytest.approx(0.31), "level": "L1"}]}


def test_prediction_uses_only_the_last_order_minus_one_moves():
    bank, _, test = small_world()
    game = test[L.L2][0]
    a = predict_with_level(bank, L.L2, ["Zz", "Yy", *game[:6]], 3)
    b = predict_with_level(bank, L.L2, game[:6], 3)
    assert a.moves == b.moves
    assert np.allclose([c.p for c in a.candidates], [c.p for c in b.candidates])
