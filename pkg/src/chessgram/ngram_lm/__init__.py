"""Backoff n-gram language models over move tokens."""

from .arpa import dumps_arpa, read_arpa, save_arpa, write_arpa
from .counts import NGramCounts, count_ngrams
from .kneser_ney import SmoothingConfig, estimate
from .model import NGramModel, SurprisalTrace
from .vocab import BOS, EOS, RESERVED, UNK, Vocabulary


def train(corpus, order: int = 5, config: SmoothingConfig = SmoothingConfig(), level=None) -> NGramModel:
    """Count and estimate in one step."""
    return estimate(count_ngrams(corpus, order), config, level=level)


def logprob(model: NGramModel, token: str, history=()) -> float:
    return model.logprob(token, history)


def surprisal(model: NGramModel, token: str, history=()) -> float:
    return model.surprisal(token, history)


def score_game(model: NGramModel, tokens) -> SurprisalTrace:
    return model.score_game(tokens)


def perplexity(model: NGramModel, corpus) -> float:
    return model.perplexity(corpus)


__all__ = [
    "BOS", "EOS", "UNK", "RESERVED", "Vocabulary", "NGramCounts", "NGramModel",
    "SmoothingConfig", "SurprisalTrace", "count_ngrams", "estimate", "train",
    "logprob", "surprisal", "score_game", "perplexity",
    "read_arpa", "write_arpa", "save_arpa", "dumps_arpa",
]
