"""Shared fixtures: expensive fronts and reports are computed once per session."""

import time
from functools import lru_cache

import numpy as np
import pytest

from frontspeed import sensitivity
from frontspeed.front_solver import auto_half_length, solve_standing_front
from frontspeed.grid import build_grid, grid_with_spacing
from frontspeed.models import make_model

DBAR = np.diag([1.0, -1.0])
I2 = np.eye(2)
TOY_MUS = (0.25, 0.5, 1.0, 2.0, 4.0)
LV_EPS = (0.4, 0.3, 0.2, 0.1)


@lru_cache(maxsize=None)
def toy_grid():
    return build_grid(40, 1601)


@lru_cache(maxsize=None)
def lv_grid(eps):
    m = make_model("lotka_volterra", eps=eps)
    return grid_with_spacing(auto_half_length(m, I2), 0.05)


@lru_cache(maxsize=None)
def toy_front(mu):
    return solve_standing_front(make_model("toy", mu=mu), I2, toy_grid())


@lru_cache(maxsize=None)
def toy_report(mu):
    return sensitivity.full_report(make_model("toy", mu=mu), I2, DBAR, toy_grid(), front=toy_front(mu))


# wall time of each uncached LV report, for run-time budgets
LV_SECONDS = {}


@lru_cache(maxsize=None)
def lv_report(eps):
    start = time.perf_counter()
    m = make_model("lotka_volterra", eps=eps)
    rep = sensitivity.full_report(m, I2, DBAR, lv_grid(eps), check_spectrum=False)
    LV_SECONDS[eps] = time.perf_counter() - start
    return rep


@pytest.fixture(scope="session")
def grid40():
    return toy_grid()


@pytest.fixture(scope="session")
def toy():
    """Callable ``mu -> SensitivityReport`` with caching."""
    return toy_report


@pytest.fixture(scope="session")
def lv():
    """Callable ``eps -> SensitivityReport`` with caching."""
    return lv_report
