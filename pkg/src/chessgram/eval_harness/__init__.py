"""Evaluation artifacts and the synthetic-corpus generator."""

from .evaluation import (DEFAULT_GRID, MODES, AccuracyCurve, EvalConfig, EvalReport, ScoredTestsets,
                         SelectorTable, SurprisalCurves, avg_move_surprisal, classifier_avg_error,
                         evaluate, perplexity_matrix, selector_accuracy, table_from_log,
                         topk_accuracy_curve)
from .report import (CSV_TABLES, FORMATS, csv_tables, dumps_report, export_report, load_report,
                     loads_report, report_from_dict, report_schema, report_to_dict)
from .synthetic import SyntheticSpec, default_alphabet, generate_synthetic, preference_tables

__all__ = [
    "DEFAULT_GRID", "MODES", "AccuracyCurve", "EvalConfig", "EvalReport", "ScoredTestsets",
    "SelectorTable", "SurprisalCurves", "avg_move_surprisal", "classifier_avg_error", "evaluate",
    "perplexity_matrix", "selector_accuracy", "table_from_log", "topk_accuracy_curve",
    "CSV_TABLES", "FORMATS", "csv_tables", "dumps_report", "export_report", "load_report",
    "loads_report", "report_from_dict", "report_schema", "report_to_dict",
    "SyntheticSpec", "default_alphabet", "generate_synthetic", "preference_tables",
]
