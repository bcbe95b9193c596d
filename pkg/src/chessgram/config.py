"""Declarative ``key = value`` experiment config files.

Blank lines and lines starting with ``#`` are ignored. Keys use the CLI
flag spelling without the leading dashes (``order``, ``games-per-level``);
underscores and dashes are interchangeable. Values stay strings here and
are converted by whoever consumes them, so a config file and the command
line go through the same validation.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ChessgramError


class ConfigError(ChessgramError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(lineno, f"expected key = value, got {raw!r}")
        key = key.strip().replace("_", "-")
        if not key:
            raise ConfigError(lineno, "empty key")
        if key in out:
            raise ConfigError(lineno, f"duplicate key {key!r}")
        out[key] = value.strip()
    return out


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text(encoding="utf-8"))
