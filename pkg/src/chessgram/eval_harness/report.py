"""Serialization of :class:`EvalReport` as one JSON document or a set of CSV tables.

Field order is fixed so that export -> parse -> export is byte-identical.
Missing values (an empty population at some prefix length, a level with no
test games) are written as JSON ``null`` / the CSV text ``null``, never 0.
"""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path
from typing import TextIO

from ..pgn_ingest import LEVELS, RatingLevel
from .evaluation import AccuracyCurve, EvalReport, SelectorTable, SurprisalCurves

FORMATS = ("json", "csv")
SCHEMA_VERSION = 1
NULL = "null"

CSV_TABLES = (
    "perplexity_matrix.csv",
    "selector_accuracy.csv",
    "surprisal_curves.csv",
    "accuracy_curves.csv",
    "classification_log.csv",
)


def report_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report.schema.json").read_text())


def report_to_dict(report: EvalReport) -> dict:
    names = [str(lv) for lv in LEVELS]
    curves = report.surprisal_curves
    return {
        "schema_version": SCHEMA_VERSION,
        "config": report.config,
        "perplexity_matrix": {
            "rows": "model_level",
            "columns": "game_level",
            "levels": names,
            "values": [list(row) for row in report.perplexity_matrix],
        },
        "selector_tables": [
            {
                "k": t.k,
                "per_level": [
                    {"level": str(lv), "games": t.games[lv], "correct": t.correct[lv],
                     "accuracy": t.accuracy(lv)}
                    for lv in LEVELS
                ],
                "overall": t.overall,
                "avg_error": t.avg_error,
            }
            for t in report.selector_tables
        ],
        "surprisal_curves": {
            "game_level": str(curves.game_level) if curves.game_level is not None else None,
            "positions": list(curves.positions),
            "counts": list(curves.counts),
            "models": {str(lv): list(curves.models[lv]) for lv in LEVELS},
        },
        "accuracy_curves": [
            {"mode": c.mode, "topk": c.topk, "grid": list(c.grid), "games": list(c.games),
             "hits": list(c.hits), "accuracy": c.accuracy}
            for c in report.accuracy_curves
        ],
        "classification_log": [dict(row) for row in report.classification_log],
    }


def report_from_dict(doc: dict) -> EvalReport:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema_version {doc.get('schema_version')!r}")
    tables = []
    for t in doc["selector_tables"]:
        per = {RatingLevel.parse(e["level"]): e for e in t["per_level"]}
        tables.append(SelectorTable(
            k=t["k"],
            games={lv: per[lv]["games"] for lv in LEVELS},
            correct={lv: per[lv]["correct"] for lv in LEVELS},
            overall=t["overall"],
            avg_error=t["avg_error"],
        ))
    sc = doc["surprisal_curves"]
    curves = SurprisalCurves(
        game_level=RatingLevel.parse(sc["game_level"]) if sc["game_level"] is not None else None,
        positions=list(sc["positions"]),
        counts=list(sc["counts"]),
        models={RatingLevel.parse(k): list(v) for k, v in sc["models"].items()},
    )
    acc = [AccuracyCurve(c["mode"], c["topk"], list(c["grid"]), list(c["games"]), list(c["hits"]))
           for c in doc["accuracy_curves"]]
    return EvalReport(
        config=doc["config"],
        perplexity_matrix=[list(r) for r in doc["perplexity_matrix"]["values"]],
        selector_tables=tables,
        surprisal_curves=curves,
        accuracy_curves=acc,
        classification_log=[dict(r) for r in doc["classification_log"]],
    )


def dumps_report(report: EvalReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, allow_nan=False) + "\n"


def loads_report(text: str) -> EvalReport:
    return report_from_dict(json.loads(text))


def load_report(path: str | Path) -> EvalReport:
    return loads_report(Path(path).read_text(encoding="utf-8"))


# --- CSV ----------------------------------------------------------------------


def _cell(x) -> str:
    if x is None:
        return NULL
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _table(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def csv_tables(report: EvalReport) -> dict[str, str]:
    """File name -> CSV text, one table per file."""
    names = [str(lv) for lv in LEVELS]
    out = {}
    out["perplexity_matrix.csv"] = _table(
        ["model_level", *names],
        ([name, *row] for name, row in zip(names, report.perplexity_matrix)),
    )
    rows = []
    for t in report.selector_tables:
        for lv in LEVELS:
            rows.append([t.k, str(lv), t.games[lv], t.correct[lv], t.accuracy(lv), None])
        rows.append([t.k, "overall", sum(t.games.values()), sum(t.correct.values()), t.overall,
                     t.avg_error])
    out["selector_accuracy.csv"] = _table(["k", "level", "games", "correct", "accuracy", "avg_error"], rows)
    sc = report.surprisal_curves
    out["surprisal_curves.csv"] = _table(
        ["position", "games", *(f"model_{n}" for n in names)],
        ([p, n, *(sc.models[lv][i] for lv in LEVELS)]
         for i, (p, n) in enumerate(zip(sc.positions, sc.counts))),
    )
    rows = []
    for c in report.accuracy_curves:
        for h, n, hits, a in zip(c.grid, c.games, c.hits, c.accuracy):
            rows.append([c.mode, c.topk, h, n, hits, a])
    out["accuracy_curves.csv"] = _table(["mode", "topk", "prefix_len", "games", "hits", "accuracy"], rows)
    out["classification_log.csv"] = _table(
        ["game", "level", "k", "predicted"],
        ([r["game"], r["level"], r["k"], r["predicted"]] for r in report.classification_log),
    )
    return out


def export_report(report: EvalReport, fmt: str, sink: str | Path | TextIO) -> None:
    """Write ``report`` as JSON (to a path or text stream) or CSV (into a directory)."""
    if fmt == "json":
        text = dumps_report(report)
        if hasattr(sink, "write"):
            sink.write(text)
        else:
            Path(sink).write_text(text, encoding="utf-8")
    elif fmt == "csv":
        if hasattr(sink, "write"):
            raise ValueError("csv export writes several files; pass a directory")
        directory = Path(sink)
        directory.mkdir(parents=True, exist_ok=True)
        for name, text in csv_tables(report).items():
            (directory / name).write_text(text, encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
