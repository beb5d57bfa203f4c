"""One record per (config, time) combining every figure of merit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .bounds import BoundReport, bound_report, classify_regime, eta_from_lambda_minus
from .config import SystemConfig, derive_constants
from .covariance import DEFAULT_QUAD, QuadSettings, bm_block, global_cm, symplectic_spectrum
from .energetics import EnergyReport, energy, energy_report
from .errors import GaussBattError, NumericalError
from .resolvent import solve_poles
from .squeeze_entangle import SqueezeReport, check_partition, default_partition, squeeze_report
from .thermo import ThermoReport, thermo_report

CSV_HEADER = (
    "t", "t_over_tau", "E_B", "E_BM", "E_BM_prime", "ergotropy_glob", "ergotropy_loc", "ratio_R",
    "eta_glob", "eta_th", "exergy", "lambda_plus", "lambda_minus", "r", "phi", "nu1",
    "nu_pt_minus", "log_neg", "B_cl", "B_en", "regime", "W", "delta_S", "sigma_irr", "warnings",
)

_BOUNDARY_WINDOW = 1e-6


@dataclass(frozen=True)
class Diagnostics:
    t: float
    tau: float
    energy: EnergyReport
    squeeze: SqueezeReport
    thermo: ThermoReport
    bounds: BoundReport
    nu1: float
    warnings: tuple[str, ...]

    @property
    def regime(self) -> str:
        return self.bounds.regime

    def row(self) -> list:
        e, s, th, b = self.energy, self.squeeze, self.thermo, self.bounds
        return [
            self.t, self.t / self.tau, e.e_b, e.e_bm, e.e_bm_prime, e.ergotropy_glob,
            e.ergotropy_loc, e.ratio_r, e.eta_glob, th.eta_th, th.exergy, s.lambda_plus,
            s.lambda_minus, s.r, s.phi, self.nu1, s.nu_pt_minus, s.log_neg, b.b_cl, b.b_en,
            b.regime, th.w, th.delta_s, th.sigma_irr, ";".join(self.warnings),
        ]


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".9g")


def csv_row(d: Diagnostics) -> list[str]:
    return [format_value(x) for x in d.row()]


def _close(x: float, y: float, tol: float) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def _cross_check(d: Diagnostics, c_t0: float) -> None:
    s, e = d.squeeze, d.energy
    checks = [
        ("lambda+ lambda- = nu1^2", s.lambda_plus * s.lambda_minus, d.nu1**2, 1e-10),
        ("E_BM = (lambda+ + lambda-)/2", e.e_bm, 0.5 * (s.lambda_plus + s.lambda_minus), 1e-12),
    ]
    if not math.isnan(s.nu_pt_minus):
        checks.append(("nu_pt = sqrt(C lambda- / 2)", s.nu_pt_minus,
                       math.sqrt(0.5 * c_t0 * s.lambda_minus), 1e-10))
    if e.e_bm_prime > 1e-12:
        checks.append(("eta_glob two forms", e.eta_glob,
                       eta_from_lambda_minus(s.lambda_minus, e.e_bm_prime), 1e-10))
    for name, x, y, tol in checks:
        if not _close(x, y, tol):
            raise NumericalError(f"identity {name} fails: {x!r} vs {y!r}", module="diagnostics")


def snapshot(cfg: SystemConfig, t: float, quad: QuadSettings = DEFAULT_QUAD,
             partition: Sequence[int] | None = None) -> Diagnostics:
    """Evaluate every figure of merit at time ``t``; warnings are returned as data."""
    dc = derive_constants(cfg)
    poles = solve_poles(dc, cfg)
    bm = bm_block(cfg, dc, poles, t, quad)
    nu1 = float(symplectic_spectrum(global_cm(bm, cfg.n_cells))[0])
    flags: list[str] = []

    raw_glob = 0.5 * (bm.c_t0 + bm.alpha_bar_sq * bm.trace_T) - nu1
    if raw_glob < -1e-10:
        flags.append("clamped_ergotropy")
    er = energy_report(cfg, bm, dc, warn=False)

    part_ok = True
    try:
        check_partition(cfg, default_partition(cfg.n_cells) if partition is None else partition)
    except GaussBattError:
        part_ok = False
        flags.append("odd_n" if cfg.n_cells % 2 else "unbalanced_partition")
    sq = squeeze_report(cfg, bm, dc, partition)

    delta_e_b = energy(bm, dc)[0] - 0.5 * dc.c_t0 * cfg.n_cells
    th, th_flags = thermo_report(cfg, dc, bm, er.ergotropy_glob, nu1, delta_e_b)
    flags += th_flags

    kappa = er.e_bm_prime
    if kappa > 0:
        br = bound_report(kappa, dc.c_t0, sq.lambda_minus, sq.nu_pt_minus if part_ok else None)
    else:
        br = BoundReport(kappa, math.nan, math.nan,
                         classify_regime(sq.lambda_minus, sq.nu_pt_minus if part_ok else None, dc.c_t0))
        flags.append("nonpositive_kappa")
    lam = sq.lambda_minus
    if min(abs(lam - 0.5), abs(lam - 0.5 / dc.c_t0)) < _BOUNDARY_WINDOW:
        flags.append("boundary_proximity")

    d = Diagnostics(float(t), dc.tau, er, sq, th, br, nu1, tuple(flags))
    _cross_check(d, dc.c_t0)
    return d
