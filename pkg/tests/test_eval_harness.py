import csv
import io
import json
import math
import random
from dataclasses import replace

import jsonschema
import pytest

from chessgram.errors import InvalidSpec, MissingInput
from chessgram.eval_harness import (EvalConfig, avg_move_surprisal, classifier_avg_error,
                                    csv_tables, dumps_report, evaluate, export_report, generate_synthetic,
                                    load_report, loads_report, perplexity_matrix, preference_tables,
                                    report_schema, selector_accuracy, table_from_log, topk_accuracy_curve)
from chessgram.ngram_lm import train
from chessgram.pgn_ingest import LEVELS, RatingLevel
from chessgram.predictor import GLOBAL_BENCHMARK, SELECTOR_ASSISTED
from chessgram.selector import ModelBank
from helpers import small_spec, small_world

L = RatingLevel
SMALL_CFG = EvalConfig(ks=(4, 16), topks=(1, 3), grid=(2, 8, 16, 30, 500), horizon=50)


@pytest.fixture(scope="module")
def report():
    bank, _, test = small_world()
    return evaluate(bank, test, SMALL_CFG)


# --- synthetic generator ----------------------------------------------------


def test_synthetic_deterministic_and_streams_differ():
    spec = small_spec(30)
    assert generate_synthetic(spec) == generate_synthetic(spec)
    assert generate_synthetic(spec, stream=1) != generate_synthetic(spec, stream=0)
    data = generate_synthetic(spec)
    assert set(data) == set(LEVELS)
    assert all(len(g) == 30 for g in data.values())
    assert all(10 <= len(game) <= 40 for g in data.values() for game in g)


def test_synthetic_preference_rows_are_distributions():
    for table in preference_tables(small_spec(1)):
        for row in table:
            assert math.fsum(row) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("change", [
    {"noise": (0.1,) * 6}, {"noise": (1.5,) * 7}, {"preferred_weights": (0.5, 0.4)},
    {"alphabet": ("a",)}, {"min_length": 50, "max_length": 10}, {"shared_weight": 2.0},
])
def test_synthetic_invalid_spec(change):
    with pytest.raises(InvalidSpec):
        generate_synthetic(replace(small_spec(1), **change))


def test_disjoint_zero_noise_is_perfectly_separable():
    spec = small_spec(40, noise=(0.0,) * 7, shared_alphabet=False)
    train_c = generate_synthetic(spec)
    bank = ModelBank.train(train_c, 2)
    table = selector_accuracy(bank, generate_synthetic(replace(spec, games_per_level=10), stream=1), 16)
    assert table.overall == 1.0
    assert table.avg_error == 0.0


def test_uniform_noise_gives_chance_accuracy():
    spec = small_spec(200, noise=(1.0,) * 7)
    bank = ModelBank.train(generate_synthetic(spec), 2)
    test = generate_synthetic(replace(spec, games_per_level=100), stream=1)
    acc = selector_accuracy(bank, test, 16).overall
    n = 700
    sigma = math.sqrt((1 / 7) * (6 / 7) / n)
    assert abs(acc - 1 / 7) <= 3 * sigma


# --- perplexity matrix ------------------------------------------------------


def test_bank_trained_on_its_test_sets_has_diagonal_minimum():
    spec = small_spec(15)
    data = generate_synthetic(spec)
    bank = ModelBank.train(data, 3)
    matrix = perplexity_matrix(bank, data)
    for i, row in enumerate(matrix):
        assert min(range(7), key=row.__getitem__) == i
        assert all(v > 0 for v in row)


def test_identical_corpora_give_identical_rows():
    corpus = generate_synthetic(small_spec(20))[L.L3]
    data = {lv: corpus for lv in LEVELS}
    bank = ModelBank.train(data, 3)
    matrix = perplexity_matrix(bank, data)
    for row in matrix[1:]:
        assert row == pytest.approx(matrix[0], rel=1e-12)


def test_matrix_entry_is_model_perplexity(report):
    bank, _, test = small_world()
    assert report.perplexity_matrix[1][4] == pytest.approx(bank[L.L2].perplexity(test[L.L5]), rel=1e-12)


def test_missing_testset():
    bank, _, test = small_world()
    partial = {lv: test[lv] for lv in LEVELS[:6]}
    with pytest.raises(MissingInput):
        perplexity_matrix(bank, partial)
    with pytest.raises(MissingInput):
        evaluate(bank, partial)


# --- surprisal curves ---------------------------------------------------------


def test_single_game_curve_equals_trace():
    bank, _, test = small_world()
    game = test[L.L1][0]
    curves = avg_move_surprisal(bank, [game], horizon=100)
    assert curves.positions == list(range(1, len(game) + 1))
    assert curves.counts == [1] * len(game)
    for lv in LEVELS:
        assert curves.models[lv] == pytest.approx(bank[lv].score_game(game).bits, rel=1e-12)


def test_curve_steps_up_after_deterministic_opening():
    opening = ["o1", "o2", "o3", "o4", "o5", "o6", "o7", "o8", "o9", "o10"]
    rng = random.Random(0)
    noise = [f"n{i}" for i in range(30)]
    games = [opening + [rng.choice(noise) for _ in range(20)] for _ in range(300)]
    bank = ModelBank({lv: train(games, 3) for lv in LEVELS})
    c = avg_move_surprisal(bank, games[:100], horizon=30).models[L.L1]
    assert max(c[:10]) < 0.1
    assert min(c[10:]) > 3.0


def test_curve_truncates_and_reports_counts():
    bank, _, test = small_world()
    games = test[L.L2][:5]
    longest = max(len(g) for g in games)
    curves = avg_move_surprisal(bank, games, horizon=10_000)
    assert curves.positions[-1] == longest
    assert curves.counts == [sum(len(g) >= p for g in games) for p in curves.positions]
    with pytest.raises(ValueError):
        avg_move_surprisal(bank, games, horizon=0)


# --- selector tables ----------------------------------------------------------


def test_selector_table_consistent_with_log(report):
    for t in report.selector_tables:
        again = table_from_log(report.classification_log, t.k)
        assert again == t
        total = sum(t.games.values())
        weighted = sum(t.accuracy(lv) * t.games[lv] for lv in LEVELS) / total
        assert t.overall == pytest.approx(weighted, abs=1e-12)
        rows = [r for r in report.classification_log if r["k"] == t.k]
        brute = sum(abs(int(r["predicted"][1]) - int(r["level"][1])) for r in rows) / len(rows)
        assert t.avg_error == pytest.approx(brute, abs=1e-12)


def test_selector_accuracy_matches_report(report):
    bank, _, test = small_world()
    t = selector_accuracy(bank, test, 16)
    assert t == report.selector_table(16)
    assert classifier_avg_error(bank, test, 16) == t.avg_error


def test_always_l1_average_error_is_three():
    log = [{"game": str(i), "level": str(lv), "k": 1, "predicted": "L1"} for i, lv in enumerate(LEVELS)]
    assert table_from_log(log, 1).avg_error == 3.0


def test_perfect_classifier_average_error_is_zero():
    log = [{"game": str(i), "level": str(lv), "k": 1, "predicted": str(lv)} for i, lv in enumerate(LEVELS)]
    t = table_from_log(log, 1)
    assert t.avg_error == 0.0 and t.overall == 1.0


# --- accuracy curves ----------------------------------------------------------


def test_accuracy_curve_bounds_and_monotone_population(report):
    for c in report.accuracy_curves:
        assert all(a is None or 0.0 <= a <= 1.0 for a in c.accuracy)
        assert all(x >= y for x, y in zip(c.games, c.games[1:]))
        assert c.games[-1] == 0 and c.accuracy[-1] is None  # grid point 500 exceeds every game


def test_top3_at_least_top1(report):
    for mode in (SELECTOR_ASSISTED, GLOBAL_BENCHMARK):
        one, three = report.curve(mode, 1), report.curve(mode, 3)
        assert all(b >= a for a, b in zip(one.hits, three.hits))


def test_single_curve_function_matches_report(report):
    bank, _, test = small_world()
    c = topk_accuracy_curve(bank, test, GLOBAL_BENCHMARK, 3, (2, 8, 16, 30, 500))
    assert c == report.curve(GLOBAL_BENCHMARK, 3)
    with pytest.raises(ValueError):
        topk_accuracy_curve(bank, test, "nope", 1, (2,))


def test_identical_models_make_modes_coincide():
    _, train_c, test = small_world()
    m = train(train_c[L.L4], 3)
    bank = ModelBank({lv: m for lv in LEVELS})
    rep = evaluate(bank, test, SMALL_CFG)
    for t in (1, 3):
        assert rep.curve(SELECTOR_ASSISTED, t).hits == rep.curve(GLOBAL_BENCHMARK, t).hits


def test_report_is_deterministic(report):
    bank, _, test = small_world()
    assert dumps_report(evaluate(bank, test, SMALL_CFG)) == dumps_report(report)


# --- export -------------------------------------------------------------------


def test_json_round_trip_byte_identical(report, tmp_path):
    text = dumps_report(report)
    assert dumps_report(loads_report(text)) == text
    export_report(report, "json", tmp_path / "r.json")
    assert dumps_report(load_report(tmp_path / "r.json")) == text
    buf = io.StringIO()
    export_report(report, "json", buf)
    assert buf.getvalue() == text


def test_json_matches_schema(report):
    doc = json.loads(dumps_report(report))
    jsonschema.validate(doc, report_schema())
    doc["perplexity_matrix"]["values"][0][0] = -1.0
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(doc, report_schema())


def test_empty_entries_are_nulls(report, tmp_path):
    doc = json.loads(dumps_report(report))
    assert doc["accuracy_curves"][0]["accuracy"][-1] is None
    export_report(report, "csv", tmp_path)
    rows = list(csv.reader((tmp_path / "accuracy_curves.csv").open()))
    last = [r for r in rows if r[2] == "500"]
    assert last and all(r[3] == "0" and r[5] == "null" for r in last)


def test_csv_tables(report, tmp_path):
    export_report(report, "csv", tmp_path)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == sorted(csv_tables(report))
    matrix = list(csv.reader((tmp_path / "perplexity_matrix.csv").open()))
    assert matrix[0] == ["model_level", "L1", "L2", "L3", "L4", "L5", "L6", "L7"]
    assert len(matrix) == 8 and all(len(r) == 8 for r in matrix)
    assert float(matrix[2][5]) == report.perplexity_matrix[1][4]
    sel = list(csv.DictReader((tmp_path / "selector_accuracy.csv").open()))
    overall = [r for r in sel if r["level"] == "overall" and r["k"] == "16"][0]
    assert float(overall["accuracy"]) == report.selector_table(16).overall
    with pytest.raises(ValueError):
        export_report(report, "csv", io.StringIO())
    with pytest.raises(ValueError):
        export_report(report, "xml", tmp_path / "x")
