"""Stored energy, ergotropies and the charging-time search."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DerivedConstants, SystemConfig
from .covariance import (DEFAULT_QUAD, BMBlock, QuadSettings, bm_block, energy_trace_scan,
                         local_block_spectrum, nu1_explicit)
from .errors import FlatLandscape, ValidationError
from .resolvent import PoleSet

_CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class EnergyReport:
    e_b: float
    e_bm: float
    # bright-mode energy above the zero-point value 1/2
    e_bm_prime: float
    ergotropy_glob: float
    ergotropy_loc: float
    eta_glob: float
    ratio_r: float


def energy(bm: BMBlock, dc: DerivedConstants) -> tuple[float, float, float]:
    """(E_B, E_BM, E'_BM); dark modes add a constant (N-1) C/2."""
    c = bm.c_t0
    e_bm = 0.5 * (c + bm.alpha_bar_sq * bm.trace_T)
    return e_bm + 0.5 * c * (dc.n_cells - 1), e_bm, e_bm - 0.5


def energy_report(cfg: SystemConfig, bm: BMBlock, dc: DerivedConstants,
                  warn: bool = True) -> EnergyReport:
    e_b, e_bm, e_bm_p = energy(bm, dc)
    e_glob = ergotropy_global(bm, warn=warn)
    e_loc = ergotropy_local(cfg, bm, warn=warn)
    return EnergyReport(e_b, e_bm, e_bm_p, e_glob, e_loc, eta_global(e_glob, e_bm_p),
                        locality_ratio(e_glob, e_loc))


def _clamped(value: float, what: str, warn: bool = True) -> float:
    if value < 0:
        if warn and value < -_CLAMP_TOL:
            warnings.warn(f"{what} = {value:.3e} < 0 clamped to 0", RuntimeWarning, stacklevel=3)
        return 0.0
    return value


def ergotropy_global(bm: BMBlock, nu1: float | None = None, warn: bool = True) -> float:
    """E_BM - nu1: energy extractable by global unitaries (dark modes are passive)."""
    if nu1 is None:
        nu1 = nu1_explicit(bm.c_t0, bm.alpha_bar_sq, bm.trace_T, bm.delta)
    e_bm = 0.5 * (bm.c_t0 + bm.alpha_bar_sq * bm.trace_T)
    return _clamped(e_bm - nu1, "global ergotropy", warn)


def ergotropy_local(cfg: SystemConfig, bm: BMBlock, warn: bool = True) -> float:
    """Sum over cells of the single-cell ergotropies."""
    total = 0.0
    for l, al in enumerate(cfg.alphas):
        e_l = 0.5 * (bm.c_t0 + al * al * bm.trace_T)
        total += e_l - local_block_spectrum(cfg, bm, l)
    return _clamped(total, "local ergotropy", warn)


def eta_global(e_glob: float, e_bm_prime: float) -> float:
    """Fraction of the bright-mode energy gain that is extractable; 0 when nothing was stored."""
    if e_bm_prime <= 1e-12:
        return 0.0
    return e_glob / e_bm_prime


def locality_ratio(e_glob: float, e_loc: float) -> float:
    return e_loc / e_glob if e_glob > 0 else math.nan


def _stored_energy(cfg, dc, poles, t, quad) -> float:
    return energy(bm_block(cfg, dc, poles, t, quad), dc)[0]


def find_t_star(cfg: SystemConfig, dc: DerivedConstants, poles: PoleSet,
                horizon: float | None = None, quad: QuadSettings = DEFAULT_QUAD,
                coarse_step: float = 1 / 200, rel_tol: float = 1e-4) -> float:
    """First time maximizing the stored energy on [0, horizon].

    A coarse scan on a grid of spacing ``coarse_step * tau`` picks the
    bracket; golden-section search refines it to ``rel_tol * tau``.
    The default horizon is 2 tau.
    """
    tau = dc.tau
    horizon = 2.0 * tau if horizon is None else float(horizon)
    if not horizon > 0:
        raise ValidationError("horizon must be > 0", field="horizon", module="energetics")
    npts = max(int(math.ceil(horizon / (coarse_step * tau))), 2) + 1
    grid = np.linspace(0.0, horizon, npts)
    # E_B is a constant plus alpha_bar^2/2 * (a + c)
    trace = energy_trace_scan(cfg, dc, poles, grid, quad)
    gain = 0.5 * dc.alpha_bar_sq * (trace - trace[0])
    i = int(np.argmax(gain))
    if gain[i] < 1e-9:
        raise FlatLandscape(f"stored energy never rises above its initial value (max gain {gain[i]:.3e})")
    if i == npts - 1:
        warnings.warn("energy maximum sits at the end of the search horizon", RuntimeWarning, stacklevel=2)
        res = minimize_scalar(lambda t: -_stored_energy(cfg, dc, poles, t, quad),
                              bounds=(grid[i - 1], grid[i]), method="bounded",
                              options={"xatol": rel_tol * tau})
        return float(res.x)
    lo, mid, hi = grid[i - 1], grid[i], grid[i + 1]
    res = minimize_scalar(lambda t: -_stored_energy(cfg, dc, poles, t, quad),
                          bracket=(lo, mid, hi), method="golden",
                          options={"xtol": rel_tol * tau / mid})
    t_best = float(res.x)
    if not lo <= t_best <= hi:
        # a bracket escape means the scan was too coarse; keep the scan maximum
        return float(mid)
    return t_best
