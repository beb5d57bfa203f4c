"""Switching work, entropy production, exergy and thermodynamic efficiency."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .config import DerivedConstants, SystemConfig, coth_half_inverse
from .covariance import BMBlock
from .errors import NumericalError, ZeroCost, ZeroTemperatureReservoir

_SECOND_LAW_SLACK = 1e-6
_ORDER_SLACK = 1e-9


@dataclass(frozen=True)
class ThermoReport:
    w: float
    delta_s: float
    sigma_irr: float
    delta_eps: float
    exergy: float
    eta_th: float


def interaction_energy_initial(dc: DerivedConstants) -> float:
    """<H_int> just after the quench; only the counter-term contributes."""
    return 0.25 * dc.alpha_bar_sq * dc.omega0_sq * dc.c_t0


def interaction_energy(dc: DerivedConstants, bm: BMBlock) -> float:
    """<H_int(t)> from the bright-mode block and its second derivative."""
    ab2 = dc.alpha_bar_sq
    return -ab2 * (0.5 * bm.a_ddot - (bm.c - bm.a)
                   + 0.25 * dc.omega0_sq * (dc.c_t0 + 2.0 * ab2 * bm.a))


def switching_work(cfg: SystemConfig, dc: DerivedConstants, bm: BMBlock, warn: bool = True) -> float:
    """W(t) = <H_int(0)> - <H_int(t)>, the work paid to switch the coupling on and off."""
    w = interaction_energy_initial(dc) - interaction_energy(dc, bm)
    if warn and w < -1e-12:
        warnings.warn(f"negative switching work {w:.6g} at t={bm.t:.6g}", RuntimeWarning, stacklevel=2)
    return w


def entropy_function(nu):
    """Von Neumann entropy of one mode with symplectic eigenvalue ``nu``."""
    nu = np.maximum(np.asarray(nu, dtype=float), 0.5)
    val = xlogy(nu + 0.5, nu + 0.5) - xlogy(nu - 0.5, nu - 0.5)
    return float(val) if val.ndim == 0 else val


def entropy_change(dc: DerivedConstants, nu1: float) -> float:
    """Dark modes keep their spectrum, so only the bright mode contributes."""
    if nu1 < 0.5 - 1e-9:
        raise NumericalError(f"symplectic eigenvalue {nu1!r} below 1/2", module="thermo")
    return entropy_function(nu1) - entropy_function(0.5 * dc.c_t0)


def entropy_production(cfg: SystemConfig, w: float, delta_e_b: float, delta_s: float) -> float:
    """Sigma_irr = [W - dE_B + T dS_B] / T, i.e. heat into the reservoir over T plus dS_B."""
    temp = cfg.temp_reservoir
    if temp == 0:
        raise ZeroTemperatureReservoir(
            f"entropy production undefined at T = 0; heat into the reservoir is {w - delta_e_b:.9g}")
    sigma = (w - delta_e_b + temp * delta_s) / temp
    if sigma < -_SECOND_LAW_SLACK:
        raise NumericalError(f"entropy production {sigma:.3e} < 0", module="thermo")
    return sigma


def _theta(x: float) -> float:
    return 1.0 if x > 0 else 0.0


def exergy_and_eta_th(cfg: SystemConfig, e_glob: float, delta_eps: float, delta_s: float,
                      w: float, temp: float | None = None) -> tuple[float, float]:
    """(Phi, eta_th).

    The cost in the denominator is the work plus the positive parts of the
    entropic and spectral terms; the negative parts are credited in Phi.
    """
    temp = cfg.temp_reservoir if temp is None else temp
    cost = w + _theta(delta_eps) * delta_eps + temp * _theta(delta_s) * delta_s
    if abs(cost) < 1e-12:
        raise ZeroCost(f"thermodynamic cost {cost:.3e} vanishes")
    gain = e_glob - delta_eps * _theta(-delta_eps) - temp * _theta(-delta_s) * delta_s
    phi, eta = gain / cost, e_glob / cost
    if w > 0 and not (-_ORDER_SLACK <= eta <= phi + _ORDER_SLACK and phi <= 1 + _ORDER_SLACK):
        raise NumericalError(f"ordering 0 <= eta_th <= Phi <= 1 broken: eta={eta:.12g}, Phi={phi:.12g}",
                             module="thermo")
    return phi, eta


def crossover_boundary(dc: DerivedConstants, T0):
    """Reservoir temperature on the self-consistent curve T = T*(T, T0)."""
    c = np.vectorize(coth_half_inverse)(np.asarray(T0, dtype=float))
    val = dc.omega_n * np.sqrt(0.5 * c)
    return float(val) if np.ndim(val) == 0 else val


def thermo_report(cfg: SystemConfig, dc: DerivedConstants, bm: BMBlock, e_glob: float,
                  nu1: float, delta_e_b: float) -> tuple[ThermoReport, list[str]]:
    """Assemble the thermodynamic record; undefined quantities are NaN and flagged."""
    flags: list[str] = []
    w = switching_work(cfg, dc, bm, warn=False)
    if w < -1e-12:
        flags.append("negative_work")
    delta_s = entropy_change(dc, nu1)
    delta_eps = 0.5 * dc.c_t0 - nu1
    sigma = phi = eta = math.nan
    if cfg.temp_reservoir == 0:
        flags.append("zero_T_reservoir")
    else:
        sigma = entropy_production(cfg, w, delta_e_b, delta_s)
        try:
            phi, eta = exergy_and_eta_th(cfg, e_glob, delta_eps, delta_s, w)
        except ZeroCost:
            phi, eta = math.nan, 0.0
            flags.append("zero_cost")
    return ThermoReport(w, delta_s, sigma, delta_eps, phi, eta), flags
