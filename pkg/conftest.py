"""Shared pytest fixtures; the repository root is importable as a source root."""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from utils.random_utils import random_density, substream  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch):
    """No run-specific environment leaks into a test"""
    monkeypatch.delenv('ANTISYM_OUTPUT_DIR', raising=False)
    monkeypatch.delenv('SOURCE_DATE_EPOCH', raising=False)


@pytest.fixture
def gen():
    return substream(20240601, 0)


@pytest.fixture
def density(gen):
    """Factory for seeded random density matrices of a given side"""
    def make(side: int, rank=None):
        return random_density(gen, side, rank)
    return make
