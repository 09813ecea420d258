"""Testing environment configuration"""

import logging

import pytest

from tools import config
from tools.errors import ConfigError


def test_defaults(monkeypatch):
    for name in ("CANON_SZEGO_THREADS", "CANON_SZEGO_TOL", "CANON_SZEGO_QUAD_TOL",
                 "CANON_SZEGO_LOG_LEVEL", "CANON_SZEGO_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    assert config.as_dict() == {
        "threads": 1,
        "tol": 1e-10,
        "quad_tol": 1e-9,
        "log_level": "WARNING",
        "output_dir": "output",
    }


def test_threads(monkeypatch):
    monkeypatch.setenv("CANON_SZEGO_THREADS", "4")
    assert config.thread_count() == 4
    monkeypatch.setenv("CANON_SZEGO_THREADS", "many")
    assert config.thread_count() == config.DEFAULT_THREADS
    monkeypatch.setenv("CANON_SZEGO_THREADS", "0")
    assert config.thread_count() == config.DEFAULT_THREADS


def test_tolerance_must_be_positive(monkeypatch):
    monkeypatch.setenv("CANON_SZEGO_TOL", "1e-8")
    assert config.weyl_tol() == 1e-8
    monkeypatch.setenv("CANON_SZEGO_TOL", "-1")
    with pytest.raises(ConfigError):
        config.weyl_tol()


def test_log_level(monkeypatch):
    monkeypatch.setenv("CANON_SZEGO_LOG_LEVEL", "debug")
    assert config.log_level() == logging.DEBUG
    monkeypatch.setenv("CANON_SZEGO_LOG_LEVEL", "chatty")
    assert config.log_level() == logging.WARNING
