"""ARPA backoff-model text format.

Floats are written with 7 significant digits, so a read-back model is
exact under further write/read cycles.
"""

from __future__ import annotations

import io
import re
from pathlib import Path
from typing import TextIO

from ..errors import ArpaParseError
from .model import LOG_ZERO, NGramModel
from .vocab import RESERVED, Vocabulary

_NGRAM_LINE = re.compile(r"^ngram\s+(\d+)\s*=\s*(\d+)$")
_SECTION = re.compile(r"^\\(\d+)-grams:$")


def format_float(x: float) -> str:
    s = f"{x:.7g}"
    return "0" if s in ("0", "-0") else s


def write_arpa(model: NGramModel, sink: TextIO) -> None:
    vocab = model.vocabulary
    prob = model.prob_table
    backoff = model.backoff_table
    by_order: list[list] = [[] for _ in range(model.order)]
    for g in prob:
        by_order[len(g) - 1].append(g)
    by_order[0].sort(key=lambda g: vocab.id(g[0]))
    for grams in by_order[1:]:
        grams.sort(key=lambda g: [vocab.id(t) for t in g])

    sink.write("\\data\\\n")
    for n, grams in enumerate(by_order, start=1):
        sink.write(f"ngram {n}={len(grams)}\n")
    for n, grams in enumerate(by_order, start=1):
        sink.write(f"\n\\{n}-grams:\n")
        last = n == model.order
        for g in grams:
            line = f"{format_float(prob[g])}\t{' '.join(g)}"
            if not last:
                line += f"\t{format_float(backoff.get(g, 0.0))}"
            sink.write(line + "\n")
    sink.write("\n\\end\\\n")


def dumps_arpa(model: NGramModel) -> str:
    buf = io.StringIO()
    write_arpa(model, buf)
    return buf.getvalue()


def save_arpa(model: NGramModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_arpa(model, fh)


def _float(text: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ArpaParseError(lineno, f"not a number: {text!r}") from None


def read_arpa(source: TextIO | str | Path, level=None) -> NGramModel:
    """Parse an ARPA file. Missing reserved tokens are added with log10 -99."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_arpa(fh, level)

    lines = iter(enumerate(source, start=1))
    lineno = 0
    for lineno, line in lines:
        if line.strip() == "\\data\\":
            break
    else:
        raise ArpaParseError(lineno, "missing \\data\\ header")

    declared: dict[int, int] = {}
    for lineno, line in lines:
        s = line.strip()
        if not s:
            if declared:
                break
            continue
        m = _NGRAM_LINE.match(s)
        if not m:
            raise ArpaParseError(lineno, f"expected 'ngram N=count', got {s!r}")
        declared[int(m.group(1))] = int(m.group(2))
    if not declared:
        raise ArpaParseError(lineno, "no ngram counts declared")
    order = max(declared)
    if sorted(declared) != list(range(1, order + 1)):
        raise ArpaParseError(lineno, f"ngram orders not contiguous: {sorted(declared)}")

    prob: dict = {}
    backoff: dict = {}
    vocab_tokens: list[str] = []
    unigram_words: set[str] = set()
    seen_order = 0
    current = 0
    found = 0
    ended = False
    for lineno, line in lines:
        s = line.strip()
        if not s:
            continue
        if s == "\\end\\":
            ended = True
            break
        m = _SECTION.match(s)
        if m:
            if current and found != declared[current]:
                raise ArpaParseError(lineno, f"{current}-grams: declared {declared[current]}, found {found}")
            current = int(m.group(1))
            if current != seen_order + 1 or current > order:
                raise ArpaParseError(lineno, f"unexpected section \\{current}-grams:")
            seen_order = current
            found = 0
            continue
        if not current:
            raise ArpaParseError(lineno, f"entry outside an n-gram section: {s!r}")
        fields = s.split()
        if len(fields) == current + 1:
            bo = None
        elif len(fields) == current + 2 and current < order:
            bo = _float(fields[-1], lineno)
        else:
            raise ArpaParseError(lineno, f"bad field count for a {current}-gram: {s!r}")
        g = tuple(fields[1:current + 1])
        if current > 1 and any(t not in unigram_words for t in g):
            raise ArpaParseError(lineno, f"n-gram uses a word missing from \\1-grams: {s!r}")
        if g in prob:
            raise ArpaParseError(lineno, f"duplicate n-gram {' '.join(g)!r}")
        prob[g] = _float(fields[0], lineno)
        if bo:
            backoff[g] = bo
        if current == 1:
            vocab_tokens.append(g[0])
            unigram_words.add(g[0])
        found += 1
    if not ended:
        raise ArpaParseError(lineno, "missing \\end\\")
    if current != order:
        raise ArpaParseError(lineno, f"expected {order} sections, found {current}")
    if found != declared[current]:
        raise ArpaParseError(lineno, f"{current}-grams: declared {declared[current]}, found {found}")

    vocab = Vocabulary()
    for t in vocab_tokens:
        vocab.add(t)
    for t in RESERVED:
        prob.setdefault((t,), LOG_ZERO)
    return NGramModel(order, vocab, prob, backoff, level=level)
