"""Gaussian many-cell quantum battery charged by a Drude reservoir."""

from __future__ import annotations

from .config import DerivedConstants, SystemConfig, config_from_dict, derive_constants, uniform_config
from .covariance import QuadSettings, bm_block
from .diagnostics import Diagnostics, snapshot
from .energetics import find_t_star
from .resolvent import solve_poles

__all__ = [
    "DerivedConstants", "Diagnostics", "QuadSettings", "SystemConfig", "bm_block",
    "config_from_dict", "derive_constants", "find_t_star", "snapshot", "solve_poles",
    "uniform_config", "t_star",
]


def t_star(cfg: SystemConfig, quad: QuadSettings | None = None) -> float:
    """Charging time of ``cfg`` with the default search settings."""
    dc = derive_constants(cfg)
    kw = {} if quad is None else {"quad": quad}
    return find_t_star(cfg, dc, solve_poles(dc, cfg), **kw)
