from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from starmeasure import kernels
from starmeasure.config import load_config
from starmeasure.gifs import AffineMap, GIFSystem
from starmeasure.spaces import GridSpace, PermGroup

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
DATA = Path(__file__).resolve().parent / "data"
SHIPPED = sorted(CONFIGS.glob("*.cfg"))


def half_maps_system(nodes: int = 1025, weights=(1.0, 0.5), tnorm="min") -> GIFSystem:
    """x/2 and x/2 + 1/2 on [0, 1]."""
    space = GridSpace([[0.0, 1.0]], [nodes])
    maps = [AffineMap([[[0.5]]], [0.0]), AffineMap([[[0.5]]], [0.5])]
    return GIFSystem(space, 1, PermGroup.trivial(1), maps, weights, tnorm)


def sym2_line_system(nodes: int = 257, tnorm="product") -> GIFSystem:
    space = GridSpace([[0.0, 1.0]], [nodes])
    maps = [AffineMap([[[0.25]], [[0.25]]], [b]) for b in (0.0, 0.5)]
    return GIFSystem(space, 2, PermGroup.symmetric(2), maps, (1.0, 0.5), tnorm)


@pytest.fixture
def half_maps():
    return half_maps_system()


@pytest.fixture
def sym2_line():
    return sym2_line_system()


@pytest.fixture(scope="session")
def planar():
    return load_config(CONFIGS / "sierpinski_sym2.cfg").system


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.backend.NAME
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, line = RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d} {line}")
