"""Streaming PGN ingestion: rating bins, movetext cleaning and corpus files.

Archives are treated as plain text. No move is ever checked for legality;
the only structure recovered is the header block, the mainline SAN tokens
and the players' ratings.
"""

from __future__ import annotations

import bisect
import enum
import io
import json
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Sequence

from .errors import (
    InsufficientGames,
    InvalidRating,
    MalformedMovetext,
    RatingMissing,
    StreamError,
)

ZSTD_MAGIC = b"\x28\xb5\x2f\xfd"


class RatingLevel(enum.IntEnum):
    L1 = 1
    L2 = 2
    L3 = 3
    L4 = 4
    L5 = 5
    L6 = 6
    L7 = 7

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str | int) -> "RatingLevel":
        """Accept ``"L3"``, ``"l3"``, ``"3"`` or ``3``."""
        if isinstance(text, int):
            return cls(text)
        s = text.strip().upper()
        if s.startswith("L"):
            s = s[1:]
        try:
            return cls(int(s))
        except ValueError:
            raise ValueError(f"not a rating level: {text!r}") from None


LEVELS: tuple[RatingLevel, ...] = tuple(RatingLevel)


@dataclass(frozen=True)
class RatingBins:
    """Six rating boundaries splitting the rating axis into seven levels.

    ``r <= b[0]`` is L1 and ``r >= b[5]`` is L7. Interior boundaries
    ``b[1]..b[4]`` belong to the higher of the two adjacent levels.
    """

    boundaries: tuple[float, ...] = (1000.0, 1400.0, 1600.0, 1800.0, 2000.0, 2250.0)

    def __post_init__(self) -> None:
        b = tuple(float(x) for x in self.boundaries)
        if len(b) != 6:
            raise ValueError(f"expected 6 rating boundaries, got {len(b)}")
        if any(not math.isfinite(x) for x in b) or any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError(f"rating boundaries must be finite and strictly increasing: {b}")
        object.__setattr__(self, "boundaries", b)

    def assign(self, avg_rating: float) -> RatingLevel:
        r = float(avg_rating)
        if math.isnan(r) or r < 0 or math.isinf(r):
            raise InvalidRating(f"rating must be finite and nonnegative, got {avg_rating!r}")
        b = self.boundaries
        if r <= b[0]:
            return RatingLevel.L1
        if r >= b[5]:
            return RatingLevel.L7
        return RatingLevel(2 + bisect.bisect_right(b[1:5], r))

    @classmethod
    def load(cls, path: str | Path) -> "RatingBins":
        """Read boundaries from a JSON list or whitespace/comma separated text."""
        text = Path(path).read_text()
        try:
            values = json.loads(text)
        except json.JSONDecodeError:
            values = [v for v in re.split(r"[\s,]+", text) if v and not v.startswith("#")]
        return cls(tuple(float(v) for v in values))


DEFAULT_BINS = RatingBins()


def assign_level(avg_rating: float, bins: RatingBins = DEFAULT_BINS) -> RatingLevel:
    return bins.assign(avg_rating)


@dataclass
class RawGame:
    headers: dict[str, str]
    movetext: str
    index: int = 0


@dataclass
class GameRecord:
    level: RatingLevel
    avg_rating: float
    tokens: list[str]
    source_id: str = ""


@dataclass
class CorpusSplit:
    train: list[GameRecord]
    test: list[GameRecord]
    seed: int
    train_fraction: float
    test_count: int


# --- streaming --------------------------------------------------------------


class _CountingReader(io.RawIOBase):
    """Raw reader that counts consumed bytes and can replay a sniffed prefix."""

    def __init__(self, raw: BinaryIO, prefix: bytes = b""):
        self._raw = raw
        self._prefix = prefix
        self.consumed = 0
        self.observer = None

    def readable(self) -> bool:
        return True

    def readinto(self, buf) -> int:
        view = memoryview(buf)
        if self._prefix:
            n = min(len(view), len(self._prefix))
            view[:n] = self._prefix[:n]
            self._prefix = self._prefix[n:]
            self._seen(view[:n])
            return n
        data = self._raw.read(len(view))
        if not data:
            return 0
        n = len(data)
        view[:n] = data
        self._seen(view[:n])
        return n

    def _seen(self, chunk) -> None:
        self.consumed += len(chunk)
        if self.observer is not None:
            self.observer(bytes(chunk))


class _ZstdFrameWalker:
    """Follow zstd frame and block headers over the compressed bytes.

    The decompressor accepts a stream that stops mid-frame without complaint,
    so truncation is detected here by checking that input ends on a frame
    boundary. Only headers are parsed; payloads are skipped.
    """

    def __init__(self) -> None:
        self._buf = b""
        self._skip = 0
        self._state = "magic"
        self._need = 4
        self._checksum = False

    def feed(self, data: bytes) -> None:
        view = memoryview(data)
        while view:
            if self._skip:
                n = min(self._skip, len(view))
                self._skip -= n
                view = view[n:]
                if not self._skip:
                    self._after_payload()
                continue
            n = min(self._need - len(self._buf), len(view))
            self._buf += bytes(view[:n])
            view = view[n:]
            if len(self._buf) == self._need:
                head, self._buf = self._buf, b""
                self._header(head)

    @property
    def at_boundary(self) -> bool:
        return self._state == "magic" and not self._buf and not self._skip

    def _expect(self, state: str, need: int) -> None:
        self._state, self._need = state, need

    def _header(self, head: bytes) -> None:
        if self._state == "magic":
            magic = int.from_bytes(head, "little")
            if magic == 0xFD2FB528:
                self._expect("descriptor", 1)
            elif magic & 0xFFFFFFF0 == 0x184D2A50:
                self._expect("skippable", 4)
            else:
                raise ValueError("bad zstd magic")
        elif self._state == "skippable":
            self._state = "skip-frame"
            self._skip = int.from_bytes(head, "little")
            if not self._skip:
                self._after_payload()
        elif self._state == "descriptor":
            fhd = head[0]
            single = bool(fhd & 0x20)
            self._checksum = bool(fhd & 0x04)
            fcs = (1 if single else 0, 2, 4, 8)[fhd >> 6]
            rest = (0 if single else 1) + (0, 1, 2, 4)[fhd & 0x03] + fcs
            if rest:
                self._expect("frame-header", rest)
            else:
                self._expect("block", 3)
        elif self._state == "frame-header":
            self._expect("block", 3)
        elif self._state == "block":
            value = int.from_bytes(head, "little")
            kind = (value >> 1) & 0x03
            if kind == 3:
                raise ValueError("reserved zstd block type")
            self._state = "last-block" if value & 1 else "block-body"
            self._skip = 1 if kind == 1 else value >> 3
            if not self._skip:
                self._after_payload()
        elif self._state == "checksum":
            self._expect("magic", 4)

    def _after_payload(self) -> None:
        if self._state == "block-body":
            self._expect("block", 3)
        elif self._state == "last-block" and self._checksum:
            self._expect("checksum", 4)
        else:
            self._expect("magic", 4)


def _text_lines(source: BinaryIO, compression: str) -> Iterator[str]:
    if compression not in ("auto", "zstd", "none"):
        raise ValueError(f"unknown compression {compression!r}")
    prefix = b""
    if compression == "auto":
        prefix = source.read(4)
        compression = "zstd" if prefix == ZSTD_MAGIC else "none"
    counter = _CountingReader(source, prefix)
    if compression == "zstd":
        import zstandard

        walker = _ZstdFrameWalker()
        counter.observer = walker.feed
        reader = zstandard.ZstdDecompressor().stream_reader(counter, read_across_frames=True)
        text = io.TextIOWrapper(reader, encoding="utf-8", errors="replace", newline=None)
        try:
            yield from text
        except (zstandard.ZstdError, ValueError) as exc:
            raise StreamError(counter.consumed, str(exc)) from exc
        if not walker.at_boundary:
            raise StreamError(counter.consumed, "truncated zstd frame")
    else:
        text = io.TextIOWrapper(io.BufferedReader(counter, 1 << 16), encoding="utf-8",
                                errors="replace", newline=None)
        yield from text


_HEADER_RE = re.compile(r'^\[\s*([A-Za-z0-9_+-]+)\s+"((?:[^"\\]|\\.)*)"\s*\]\s*$')


def _comment_open(line: str, inside: bool) -> bool:
    i = 0
    while True:
        j = line.find("}" if inside else "{", i)
        if j < 0:
            return inside
        inside = not inside
        i = j + 1


def stream_games(source: BinaryIO, compression: str = "auto") -> Iterator[RawGame]:
    """Lazily segment a PGN byte stream into :class:`RawGame` objects.

    ``compression`` is ``"zstd"``, ``"none"`` or ``"auto"`` (sniff the zstd
    frame magic). Memory use is bounded by the largest single game.
    """
    headers: dict[str, str] = {}
    body: list[str] = []
    state = None  # None | "headers" | "body"
    headers_closed = False
    in_comment = False
    index = 0

    def emit() -> RawGame:
        return RawGame(headers, "".join(body).strip(), index)

    for line in _text_lines(source, compression):
        if in_comment:
            body.append(line)
            in_comment = _comment_open(line, True)
            continue
        s = line.strip()
        if s.startswith("["):
            m = _HEADER_RE.match(s)
            if m:
                if state == "body" or (state == "headers" and headers_closed):
                    yield emit()
                    index += 1
                    headers, body = {}, []
                name, value = m.group(1), m.group(2)
                if "\\" in value:
                    value = re.sub(r"\\(.)", r"\1", value)
                headers.setdefault(name, value)
                state = "headers"
                headers_closed = False
                continue
        if not s:
            if state == "headers":
                headers_closed = True
            continue
        state = "body"
        body.append(line)
        in_comment = _comment_open(line, False)
    if state is not None:
        yield emit()


def open_archive(path: str | Path, compression: str = "auto") -> Iterator[RawGame]:
    """Stream games from a file on disk; ``auto`` also honours a ``.zst`` suffix."""
    path = Path(path)
    if compression == "auto" and path.suffix == ".zst":
        compression = "zstd"
    with open(path, "rb") as fh:
        yield from stream_games(fh, compression)


# --- ratings ----------------------------------------------------------------

_RATING_HEADERS = {
    "White": ("WhiteElo", "WhiteRating"),
    "Black": ("BlackElo", "BlackRating"),
}


def _rating(headers: dict[str, str], names: Sequence[str]) -> float:
    for name in names:
        value = headers.get(name)
        if value is None or value.strip() in ("", "?", "-"):
            continue
        try:
            r = float(value)
        except ValueError:
            raise RatingMissing(name) from None
        if not math.isfinite(r):
            raise RatingMissing(name)
        return r
    raise RatingMissing(names[0])


def extract_avg_rating(game: RawGame) -> float:
    white = _rating(game.headers, _RATING_HEADERS["White"])
    black = _rating(game.headers, _RATING_HEADERS["Black"])
    return (white + black) / 2.0


# --- movetext ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"[{}()]|;[^\n]*|\$\d*|[^\s{}();$]+")
_MOVE_NUMBER_RE = re.compile(r"^(?:\d*\.+)+")
_ESCAPE_LINE_RE = re.compile(r"(?m)^%.*$")
_RESULTS = frozenset({"1-0", "0-1", "1/2-1/2", "*", "½-½"})
_ANNOTATION = str.maketrans("", "", "!?")


def _normalize_token(tok: str) -> str:
    while True:
        new = _MOVE_NUMBER_RE.sub("", tok.translate(_ANNOTATION))
        if new.endswith("e.p."):
            new = new[:-4]
        if new == tok:
            break
        tok = new
    if tok in _RESULTS or tok.isdigit() or "%" in tok:
        return ""
    return tok


def clean_movetext(movetext: str) -> list[str]:
    """Return the mainline half-moves of a PGN movetext body.

    Drops comments, variations (any depth), NAGs, ``!``/``?`` suffixes, move
    numbers and the result token.

    >>> clean_movetext("1. e4 e5 2. Nf3! Nc6 (2... d6) 1-0")
    ['e4', 'e5', 'Nf3', 'Nc6']
    """
    if "%" in movetext:
        movetext = _ESCAPE_LINE_RE.sub("", movetext)
    tokens: list[str] = []
    open_parens: list[int] = []
    search = _TOKEN_RE.search
    pos = 0
    while True:
        m = search(movetext, pos)
        if m is None:
            break
        tok = m.group()
        pos = m.end()
        c = tok[0]
        if c == "{":
            end = movetext.find("}", pos)
            if end < 0:
                raise MalformedMovetext(m.start(), "unterminated '{' comment")
            pos = end + 1
        elif c == "}":
            raise MalformedMovetext(m.start(), "unmatched '}'")
        elif c == "(":
            open_parens.append(m.start())
        elif c == ")":
            if not open_parens:
                raise MalformedMovetext(m.start(), "unmatched ')'")
            open_parens.pop()
        elif c == ";" or c == "$" or open_parens:
            continue
        else:
            san = _normalize_token(tok)
            if san:
                tokens.append(san)
    if open_parens:
        raise MalformedMovetext(open_parens[-1], "unterminated '(' variation")
    return tokens


# --- corpora ----------------------------------------------------------------

SKIP_REASONS = ("RatingMissing", "InvalidRating", "MalformedMovetext", "EmptyGame")


@dataclass
class IngestStats:
    games: int = 0
    per_level: Counter = field(default_factory=Counter)
    skipped: Counter = field(default_factory=Counter)

    def to_json(self) -> dict:
        return {
            "games": self.games,
            "levels": {str(lv): self.per_level.get(lv, 0) for lv in LEVELS},
            "skipped": {r: self.skipped.get(r, 0) for r in SKIP_REASONS},
        }


@dataclass
class IngestResult:
    corpora: dict[RatingLevel, list[GameRecord]]
    stats: IngestStats


def iter_records(games: Iterable[RawGame], stats: IngestStats | None = None,
                 bins: RatingBins = DEFAULT_BINS, source: str = "") -> Iterator[GameRecord]:
    """Clean and bin games one at a time, counting skips into ``stats``."""
    stats = stats if stats is not None else IngestStats()
    for game in games:
        stats.games += 1
        try:
            avg = extract_avg_rating(game)
            level = bins.assign(avg)
            tokens = clean_movetext(game.movetext)
        except RatingMissing:
            stats.skipped["RatingMissing"] += 1
            continue
        except InvalidRating:
            stats.skipped["InvalidRating"] += 1
            continue
        except MalformedMovetext:
            stats.skipped["MalformedMovetext"] += 1
            continue
        if not tokens:
            stats.skipped["EmptyGame"] += 1
            continue
        stats.per_level[level] += 1
        source_id = game.headers.get("Site") or f"{source}#{game.index}"
        yield GameRecord(level, avg, tokens, source_id)


def build_corpora(games: Iterable[RawGame], bins: RatingBins = DEFAULT_BINS,
                  source: str = "") -> IngestResult:
    stats = IngestStats()
    corpora: dict[RatingLevel, list[GameRecord]] = {lv: [] for lv in LEVELS}
    for rec in iter_records(games, stats, bins, source):
        corpora[rec.level].append(rec)
    return IngestResult(corpora, stats)


def sample_split(records: Sequence[GameRecord], train_fraction: float = 1.0,
                 test_count: int = 0, seed: int = 0) -> CorpusSplit:
    """Seeded sampling without replacement.

    The test games are drawn first; the training sample is
    ``round(train_fraction * remaining)`` of what is left. Both lists keep
    the input order.
    """
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError(f"train_fraction must be in (0, 1], got {train_fraction}")
    if test_count < 0:
        raise ValueError("test_count must be nonnegative")
    n = len(records)
    if test_count > n:
        raise InsufficientGames(f"requested {test_count} test games from {n}")
    rng = random.Random(seed)
    order = rng.sample(range(n), n)
    test_idx = sorted(order[:test_count])
    rest = order[test_count:]
    n_train = int(math.floor(train_fraction * len(rest) + 0.5))
    train_idx = sorted(rest[:n_train])
    return CorpusSplit(
        train=[records[i] for i in train_idx],
        test=[records[i] for i in test_idx],
        seed=seed,
        train_fraction=train_fraction,
        test_count=test_count,
    )


def write_corpus(records: Iterable[GameRecord | Sequence[str]], sink: BinaryIO) -> int:
    """Write one game per line, tokens separated by single spaces."""
    count = 0
    for rec in records:
        tokens = rec.tokens if isinstance(rec, GameRecord) else rec
        sink.write((" ".join(tokens) + "\n").encode("utf-8"))
        count += 1
    return count


def read_corpus(source: str | Path | BinaryIO) -> list[list[str]]:
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return read_corpus(fh)
    return [line.decode("utf-8").split() for line in source.read().splitlines()]
