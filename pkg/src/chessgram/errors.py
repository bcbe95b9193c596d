"""Exception types shared across the toolkit."""

from __future__ import annotations


class ChessgramError(Exception):
    """Base class for every error raised by chessgram."""


class StreamError(ChessgramError):
    """A compressed archive could not be decoded."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"stream error at byte {offset}: {message}")
        self.offset = offset


class RatingMissing(ChessgramError):
    def __init__(self, header: str):
        super().__init__(f"missing or non-numeric rating header {header!r}")
        self.header = header


class InvalidRating(ChessgramError, ValueError):
    pass


class MalformedMovetext(ChessgramError):
    def __init__(self, position: int, message: str):
        super().__init__(f"malformed movetext at offset {position}: {message}")
        self.position = position


class InsufficientGames(ChessgramError):
    pass


class InvalidOrder(ChessgramError, ValueError):
    pass


class EmptyCorpus(ChessgramError):
    pass


class EmptyGame(ChessgramError):
    pass


class ArpaParseError(ChessgramError):
    def __init__(self, line: int, message: str):
        super().__init__(f"ARPA line {line}: {message}")
        self.line = line


class MissingInput(ChessgramError):
    pass


class InvalidSpec(ChessgramError, ValueError):
    pass
