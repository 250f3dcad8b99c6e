import importlib

import pytest

import gwcache.config


@pytest.fixture
def reload_config(monkeypatch):
    yield monkeypatch
    monkeypatch.undo()
    importlib.reload(gwcache.config)


def test_config_defaults(reload_config):
    """Unset variables give the documented defaults."""
    for name in (
        "GWCACHE_SEED",
        "GWCACHE_RESTARTS",
        "GWCACHE_SWEEP_RESTARTS",
        "GWCACHE_MAX_ITERS",
        "GWCACHE_BLOCKLENGTH",
        "GWCACHE_LOG_LEVEL",
    ):
        reload_config.delenv(name, raising=False)
    config = importlib.reload(gwcache.config).Config
    assert config.SEED == 0
    assert config.RESTARTS == 64
    assert config.SWEEP_RESTARTS == 8
    assert config.MAX_ITERS == 2000
    assert config.BLOCKLENGTH == 100000
    assert config.LOG_LEVEL == "WARNING"


def test_config_reads_environment(reload_config):
    """GWCACHE_* variables override the defaults."""
    reload_config.setenv("GWCACHE_RESTARTS", "5")
    reload_config.setenv("GWCACHE_BLOCKLENGTH", "4096")
    config = importlib.reload(gwcache.config).Config
    assert config.RESTARTS == 5
    assert config.BLOCKLENGTH == 4096
