import numpy as np
import pytest

from hardylab import cli


@pytest.fixture(autouse=True)
def _no_log_file(monkeypatch):
    # keep test runs from creating hardylab.log in the working directory
    monkeypatch.setattr(cli, "_logging_ready", True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
