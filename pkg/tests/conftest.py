import logging

import pytest


@pytest.fixture(autouse=True)
def _quiet_fallback_warnings(caplog):
    # tiny corpora trigger the fixed-discount fallback constantly
    caplog.set_level(logging.ERROR, logger="chessgram.ngram_lm.kneser_ney")
    yield
