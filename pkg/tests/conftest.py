from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import pytest

from gaussbatt import snapshot, t_star, uniform_config
from gaussbatt.config import SystemConfig, derive_constants
from gaussbatt.covariance import bm_block
from gaussbatt.resolvent import solve_poles

# acceptance verdicts collected here and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []

GRID_T = np.linspace(0.01, 10.0, 20)
GRID_T0 = np.linspace(0.01, 10.0, 20)


def table_config(label: str) -> SystemConfig:
    gamma0, omega_d = {"A": (0.528, 7.344), "B": (1.571, 0.922)}[label]
    return uniform_config(6, gamma0, omega_d, T=0.01, T0=1.0)


def fig1_config(T: float = 0.5, T0: float = 0.5, n_cells: int = 6) -> SystemConfig:
    return uniform_config(n_cells, 5.0, 2.0, T=T, T0=T0)


def block_at(cfg: SystemConfig, t: float):
    dc = derive_constants(cfg)
    return bm_block(cfg, dc, solve_poles(dc, cfg), t), dc


@pytest.fixture(scope="session")
def table_points():
    """Diagnostics of both Table I configs at their own charging times."""
    start = time.perf_counter()
    out = {}
    for label in "AB":
        cfg = table_config(label)
        ts = t_star(cfg)
        out[label] = (cfg, ts, snapshot(cfg, ts))
    return out, time.perf_counter() - start


@dataclass
class GridRun:
    n_cells: int
    points: list  # (T, T0, t_star, cfg, Diagnostics)
    seconds: float


def _run_grid(n_cells: int) -> GridRun:
    start = time.perf_counter()
    points = []
    for T0 in GRID_T0:
        for T in GRID_T:
            cfg = fig1_config(float(T), float(T0), n_cells)
            ts = t_star(cfg)
            points.append((float(T), float(T0), ts, cfg, snapshot(cfg, ts)))
    return GridRun(n_cells, points, time.perf_counter() - start)


@pytest.fixture(scope="session")
def fig1_grid() -> GridRun:
    return _run_grid(6)


@pytest.fixture(scope="session")
def fig4_grid() -> GridRun:
    return _run_grid(4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
