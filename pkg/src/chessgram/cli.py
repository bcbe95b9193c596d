"""Command-line entry point: ``chessgram <subcommand> ...``.

Exit status is 0 on success, 1 for usage errors and 2 for data errors
(unreadable or malformed inputs, missing models). With ``--error-json`` the
error is also written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import ConfigError, load_config
from .errors import ChessgramError, MissingInput
from .eval_harness import (DEFAULT_GRID, EvalConfig, SyntheticSpec, default_alphabet, evaluate,
                           export_report, generate_synthetic)
from .ngram_lm import SmoothingConfig, read_arpa, save_arpa, train
from .pgn_ingest import (DEFAULT_BINS, LEVELS, IngestStats, RatingBins, RatingLevel, iter_records,
                         open_archive, read_corpus, sample_split, write_corpus)
from .predictor import predict_global, predict_selected
from .selector import K_EARLY, ModelBank, classify
from .session import AnalysisSession

log = logging.getLogger("chessgram")

DEFAULT_SEED = 0
MODE_NAMES = {"selected": "selector_assisted", "benchmark": "global_benchmark"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- argument types -------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None


def _unit(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {v}")
    return v


def _fraction(text: str) -> float:
    v = _unit(text)
    if v == 0.0:
        raise argparse.ArgumentTypeError("fraction must be > 0")
    return v


def _int_list(text: str) -> tuple[int, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise argparse.ArgumentTypeError("expected a comma-separated list of integers")
    return tuple(_positive(p) for p in parts)


def _unit_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != len(LEVELS):
        raise argparse.ArgumentTypeError(f"expected {len(LEVELS)} comma-separated values")
    return tuple(_unit(p) for p in parts)


def _level(text: str) -> RatingLevel:
    try:
        return RatingLevel.parse(text)
    except (ValueError, KeyError):
        raise argparse.ArgumentTypeError(f"expected a level L1..L7, got {text!r}") from None


# --- parser -----------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="chessgram", description="Skill-stratified n-gram models of chess moves.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--error-json", action="store_true", help="also report errors as JSON on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    subs = {}

    p = sub.add_parser("preprocess", help="PGN archives -> per-level corpora + stats.json")
    p.add_argument("archives", nargs="+", help="PGN files, plain or zstd-compressed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--bins", help="rating boundary file (6 numbers, JSON list or whitespace separated)")
    p.add_argument("--compression", choices=("auto", "zstd", "none"), default="auto")
    p.add_argument("--train-fraction", type=_fraction, default=1.0)
    p.add_argument("--test-count", type=_nonneg, default=0,
                   help="per level; when > 0, corpora go to train/ and test/ subdirectories")
    _add_common(p)
    subs["preprocess"] = p

    p = sub.add_parser("train", help="corpus -> ARPA model (or a corpus directory -> model bank)")
    p.add_argument("corpus", help="corpus file, or a directory of L1.txt..L7.txt")
    p.add_argument("--out", required=True, help="ARPA file, or a bank directory when corpus is a directory")
    p.add_argument("--order", type=_positive, default=5)
    _add_common(p)
    subs["train"] = p

    p = sub.add_parser("score", help="model + corpus -> surprisal traces (JSON lines) and perplexity")
    p.add_argument("model", help="ARPA file")
    p.add_argument("corpus")
    _add_common(p)
    subs["score"] = p

    p = sub.add_parser("classify", help="bank + games -> selector results (JSON lines)")
    p.add_argument("bank", help="directory holding L1.arpa..L7.arpa")
    p.add_argument("corpus")
    p.add_argument("--k", type=_positive, default=K_EARLY)
    _add_common(p)
    subs["classify"] = p

    p = sub.add_parser("predict", help="bank + prefix -> top-k next moves (JSON)")
    p.add_argument("bank")
    p.add_argument("moves", nargs="+", help="the game so far, as SAN tokens")
    p.add_argument("--k", type=_positive, default=K_EARLY, help="selector prefix length")
    p.add_argument("--topk", type=_positive, default=3)
    p.add_argument("--mode", choices=tuple(MODE_NAMES), default="selected")
    _add_common(p)
    subs["predict"] = p

    p = sub.add_parser("eval", help="bank + test sets -> evaluation report")
    p.add_argument("bank")
    p.add_argument("testsets", help="directory holding L1.txt..L7.txt")
    p.add_argument("--out", required=True, help="JSON file, or a directory for --format csv")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--ks", type=_int_list, default=(16, 100))
    p.add_argument("--topks", type=_int_list, default=(1, 3))
    p.add_argument("--grid", type=_int_list, default=DEFAULT_GRID)
    p.add_argument("--horizon", type=_positive, default=100)
    p.add_argument("--curve-level", type=_level, default=RatingLevel.L1)
    _add_common(p)
    subs["eval"] = p

    p = sub.add_parser("synth", help="synthetic per-level train/test corpora")
    p.add_argument("--out", required=True)
    p.add_argument("--games-per-level", type=_nonneg, default=5000)
    p.add_argument("--test-games", type=_nonneg, default=300)
    p.add_argument("--alphabet-size", type=_positive, default=40)
    p.add_argument("--noise", type=_unit_list, default=SyntheticSpec().noise)
    p.add_argument("--midgame-noise", type=_unit, default=0.0)
    p.add_argument("--shared-weight", type=_unit, default=SyntheticSpec().shared_weight)
    p.add_argument("--min-length", type=_positive, default=20)
    p.add_argument("--max-length", type=_positive, default=130)
    _add_common(p)
    subs["synth"] = p

    p = sub.add_parser("repl", help="interactive analysis of one game")
    p.add_argument("bank")
    p.add_argument("--k", type=_positive, default=K_EARLY)
    p.add_argument("--topk", type=_positive, default=3)
    p.add_argument("--json", action="store_true", help="print states as JSON lines")
    _add_common(p)
    subs["repl"] = p
    return parser, subs


def _apply_config(sub: argparse.ArgumentParser, path: str) -> dict:
    """Re-parse with config values as defaults, so explicit flags still win."""
    try:
        values = load_config(path)
    except OSError as exc:
        raise MissingInput(f"cannot read config {path}: {exc}") from exc
    actions = {a.dest.replace("_", "-"): a for a in sub._actions if a.option_strings}
    defaults = {}
    for key, text in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"{path}: unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            value = text.lower() in ("1", "true", "yes", "on")
        else:
            try:
                value = action.type(text) if action.type else text
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"{path}: {key}: {exc}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"{path}: {key}: invalid choice {text!r}")
        defaults[action.dest] = value
    sub.set_defaults(**defaults)
    return defaults


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("chessgram: a subcommand is required (see --help)")
    if args.config:
        _apply_config(subs[args.command], args.config)
        args = parser.parse_args(argv)
    if args.command == "synth" and args.min_length > args.max_length:
        raise UsageError("chessgram synth: --min-length exceeds --max-length")
    return args


# --- subcommands ------------------------------------------------------------------


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_corpus_file(path: Path, games) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        return write_corpus(games, fh)


def _digest(paths: Sequence[Path]) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(hashlib.sha256(p.read_bytes()).digest())
    return h.hexdigest()[:16]


def _read_corpus(path: str | Path) -> list[list[str]]:
    path = Path(path)
    if not path.is_file():
        raise MissingInput(f"no such corpus file: {path}")
    return read_corpus(path)


def _load_bank(path: str) -> ModelBank:
    if not Path(path).is_dir():
        raise MissingInput(f"model bank directory not found: {path}")
    return ModelBank.load(path)


def cmd_preprocess(args, out) -> None:
    bins = RatingBins.load(args.bins) if args.bins else DEFAULT_BINS
    for a in args.archives:
        if not Path(a).is_file():
            raise MissingInput(f"no such archive: {a}")
    stats = IngestStats()
    corpora = {lv: [] for lv in LEVELS}
    for a in args.archives:
        for rec in iter_records(open_archive(a, args.compression), stats, bins, source=Path(a).name):
            corpora[rec.level].append(rec)
    dest = Path(args.out)
    split_info = {}
    for lv in LEVELS:
        records = corpora[lv]
        if not records:
            continue
        if args.test_count or args.train_fraction < 1.0:
            split = sample_split(records, args.train_fraction, args.test_count, args.seed)
            split_info[str(lv)] = {"train": len(split.train), "test": len(split.test)}
            if args.test_count:
                _write_corpus_file(dest / "train" / f"{lv}.txt", split.train)
                _write_corpus_file(dest / "test" / f"{lv}.txt", split.test)
            else:
                _write_corpus_file(dest / f"{lv}.txt", split.train)
        else:
            _write_corpus_file(dest / f"{lv}.txt", records)
    doc = stats.to_json()
    doc["bins"] = list(bins.boundaries)
    if split_info:
        doc["split"] = {"seed": args.seed, "train_fraction": args.train_fraction,
                        "test_count": args.test_count, "levels": split_info}
    _write_text(dest / "stats.json", json.dumps(doc, indent=2) + "\n")
    out.write(json.dumps(doc) + "\n")


def cmd_train(args, out) -> None:
    src = Path(args.corpus)
    config = SmoothingConfig()
    if src.is_dir():
        files = [(lv, src / f"{lv}.txt") for lv in LEVELS if (src / f"{lv}.txt").is_file()]
        if not files:
            raise MissingInput(f"no L1.txt..L7.txt corpora in {src}")
        dest = Path(args.out)
        dest.mkdir(parents=True, exist_ok=True)
        for lv, path in files:
            model = train(read_corpus(path), args.order, config, level=lv)
            save_arpa(model, dest / f"{lv}.arpa")
            out.write(json.dumps({"level": str(lv), "model": str(dest / f"{lv}.arpa"),
                                  "ngrams": model.ngram_counts()}) + "\n")
    else:
        model = train(_read_corpus(src), args.order, config)
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        save_arpa(model, args.out)
        out.write(json.dumps({"model": args.out, "ngrams": model.ngram_counts()}) + "\n")


def _read_model(path: str):
    if not Path(path).is_file():
        raise MissingInput(f"no such model: {path}")
    return read_arpa(path)


def cmd_score(args, out) -> None:
    model = _read_model(args.model)
    corpus = _read_corpus(args.corpus)
    name = Path(args.model).stem
    for i, game in enumerate(corpus):
        trace = model.score_game(game)
        out.write(json.dumps({"game": i, "model": name, "tokens": trace.token_count,
                              "total_bits": trace.total_surprisal_bits, "per_token": trace.bits}) + "\n")
    out.write(json.dumps({"model": name, "games": len(corpus), "perplexity": model.perplexity(corpus)}) + "\n")


def cmd_classify(args, out) -> None:
    bank = _load_bank(args.bank)
    for i, game in enumerate(_read_corpus(args.corpus)):
        if not game:
            log.warning("game %d is empty; skipped", i)
            continue
        out.write(json.dumps(classify(bank, game, args.k).to_json(game=i)) + "\n")


def cmd_predict(args, out) -> None:
    bank = _load_bank(args.bank)
    moves = [t for m in args.moves for t in m.split()]
    if args.mode == "selected":
        result = predict_selected(bank, moves, selector_k=args.k, topk=args.topk)
    else:
        result = predict_global(bank, moves, topk=args.topk)
    out.write(json.dumps(result.to_json()) + "\n")


def cmd_eval(args, out) -> None:
    bank_dir, test_dir = Path(args.bank), Path(args.testsets)
    bank = _load_bank(args.bank)
    test_files = [test_dir / f"{lv}.txt" for lv in LEVELS]
    missing = [p.name for p in test_files if not p.is_file()]
    if missing:
        raise MissingInput(f"missing test sets in {test_dir}: {', '.join(missing)}")
    testsets = {lv: read_corpus(p) for lv, p in zip(LEVELS, test_files)}
    config = EvalConfig(
        ks=args.ks, topks=args.topks, grid=args.grid, horizon=args.horizon,
        curve_level=args.curve_level, seed=args.seed,
        datasets={"bank": _digest([bank_dir / f"{lv}.arpa" for lv in LEVELS]),
                  "testsets": _digest(test_files)},
    )
    report = evaluate(bank, testsets, config)
    export_report(report, args.format, args.out)
    summary = {"out": args.out, "format": args.format,
               "selector_overall": {str(t.k): t.overall for t in report.selector_tables}}
    out.write(json.dumps(summary) + "\n")


def cmd_synth(args, out) -> None:
    spec = SyntheticSpec(
        alphabet=default_alphabet(args.alphabet_size, args.seed),
        noise=args.noise,
        games_per_level=args.games_per_level,
        min_length=args.min_length,
        max_length=args.max_length,
        midgame_noise=args.midgame_noise,
        shared_weight=args.shared_weight,
        seed=args.seed,
    )
    dest = Path(args.out)
    trainsets = generate_synthetic(spec, stream=0)
    testsets = generate_synthetic(replace(spec, games_per_level=args.test_games), stream=1)
    for lv in LEVELS:
        _write_corpus_file(dest / "train" / f"{lv}.txt", trainsets[lv])
        _write_corpus_file(dest / "test" / f"{lv}.txt", testsets[lv])
    doc = {"seed": args.seed, "games_per_level": args.games_per_level, "test_games": args.test_games,
           "alphabet": list(spec.alphabet), "noise": list(spec.noise),
           "midgame_noise": spec.midgame_noise, "shared_weight": spec.shared_weight,
           "min_length": spec.min_length, "max_length": spec.max_length}
    _write_text(dest / "spec.json", json.dumps(doc, indent=2) + "\n")
    out.write(json.dumps({"out": str(dest), "train": str(dest / "train"), "test": str(dest / "test")}) + "\n")


REPL_HELP = "enter half-moves in SAN (several per line allowed); commands: undo, reset, help, quit"


def run_repl(session: AnalysisSession, lines, out, as_json: bool = False, prompt=None) -> None:
    """Drive ``session`` from an iterable of input lines.

    Output depends only on the lines, never on whether they came from a
    terminal, so piped and interactive sessions print the same bytes.
    """

    def show(state) -> None:
        if as_json:
            out.write(json.dumps(state.to_json()) + "\n")
        else:
            out.write(state.render() + "\n\n")

    def note(msg: str) -> None:
        if as_json:
            out.write(json.dumps({"message": msg}) + "\n")
        else:
            out.write(msg + "\n\n")

    if prompt:
        prompt()
    for line in lines:
        words = line.split()
        if words and words[0] in ("quit", "exit"):
            break
        if len(words) == 1 and words[0] in ("undo", "reset", "help"):
            cmd = words[0]
            if cmd == "help":
                note(REPL_HELP)
            elif cmd == "reset":
                session.reset()
                note("reset: empty game")
            else:
                state = session.undo()
                if state is None:
                    note("undo: empty game")
                else:
                    show(state)
        else:
            for w in words:
                show(session.push(w))
        out.flush()
        if prompt:
            prompt()


def cmd_repl(args, out) -> None:
    session = AnalysisSession(_load_bank(args.bank), k=args.k, topk=args.topk)
    prompt = None
    if sys.stdin.isatty():
        sys.stderr.write(REPL_HELP + "\n")

        def prompt():
            sys.stderr.write("> ")
            sys.stderr.flush()
    run_repl(session, sys.stdin, out, as_json=args.json, prompt=prompt)


COMMANDS = {
    "preprocess": cmd_preprocess, "train": cmd_train, "score": cmd_score, "classify": cmd_classify,
    "predict": cmd_predict, "eval": cmd_eval, "synth": cmd_synth, "repl": cmd_repl,
}


def _fail(args_json: bool, status: int, kind: str, message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    if args_json:
        sys.stderr.write(json.dumps({"error": kind, "message": message, "status": status}) + "\n")
    return status


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    error_json = "--error-json" in argv
    try:
        args = parse_args(argv)
    except UsageError as exc:
        return _fail(error_json, 1, "UsageError", str(exc))
    except (ConfigError, MissingInput) as exc:
        return _fail(error_json, 2, type(exc).__name__, str(exc))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args, sys.stdout)
    except (ChessgramError, OSError, ValueError) as exc:
        return _fail(error_json, 2, type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
