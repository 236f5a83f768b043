"""Shared fixtures: kernel-backend parametrization and tiny dataset helpers."""

from __future__ import annotations

import numpy as np
import pytest

from limbpose import kernels
from limbpose.data import FrameSpec


def pytest_generate_tests(metafunc):
    if "backend" in metafunc.fixturenames:
        backends = kernels.available_backends()
        metafunc.parametrize("backend", list(backends.values()), ids=list(backends.keys()))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_spec():
    # 64x48 preserves the 4:3 native aspect and divides by 16.
    return FrameSpec(width=64, height=48)


@pytest.fixture
def working_spec():
    return FrameSpec()
