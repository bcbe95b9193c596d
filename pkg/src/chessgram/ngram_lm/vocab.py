from __future__ import annotations

from typing import Iterable, Iterator

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
RESERVED = (UNK, BOS, EOS)


class Vocabulary:
    """Bijection between token strings and dense integer ids.

    The reserved markers always occupy ids 0, 1 and 2. Looking up an unseen
    string yields the id of ``<unk>``.
    """

    __slots__ = ("_ids", "_tokens")

    def __init__(self, tokens: Iterable[str] = ()):
        self._tokens: list[str] = list(RESERVED)
        self._ids: dict[str, int] = {t: i for i, t in enumerate(RESERVED)}
        for t in tokens:
            self.add(t)

    def add(self, token: str) -> int:
        i = self._ids.get(token)
        if i is None:
            i = self._ids[token] = len(self._tokens)
            self._tokens.append(token)
        return i

    def id(self, token: str) -> int:
        return self._ids.get(token, 0)

    def token(self, i: int) -> str:
        return self._tokens[i]

    def __contains__(self, token: object) -> bool:
        return token in self._ids

    def __len__(self) -> int:
        return len(self._tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self._tokens)

    def moves(self) -> list[str]:
        """All tokens except the reserved markers, in id order."""
        return self._tokens[len(RESERVED):]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._tokens == other._tokens

    def __repr__(self) -> str:
        return f"Vocabulary({len(self)} tokens)"
