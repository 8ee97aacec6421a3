import numpy as np
import pytest

from app.probcore import bsc_pair


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Keep log files and worker counts out of the developer's environment."""
    monkeypatch.setenv("AUTHCAP_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("AUTHCAP_THREADS", raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pair():
    return bsc_pair(0.1, 0.3)
