"""Brute-force reference: the battery coupled to a finite set of bath oscillators.

The full (N + M)-mode Hamiltonian is quadratic, so its exact evolution is
obtained from the normal modes of the potential matrix.  The initial state
is a product of thermal states, hence the second moments at time t are a
congruence of the diagonal initial covariance.  Nothing here uses the
resolvent or the frequency integrals of the analytic engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, coth_half_inverse, derive_constants
from .covariance import householder_basis
from .errors import DegenerateDirection, StiffIntegration, UnderResolvedBath, ValidationError

KERNEL_TOL = 0.02
DRIFT_TOL = 1e-6
STRETCH_POWER = 3
# the stretched grid stops at CAP_FACTOR * wD, dropping a 2 / (pi CAP_FACTOR) share of the weight
CAP_FACTOR = 1e4


@dataclass(frozen=True)
class BathDiscretization:
    """M bath modes with frequencies ``omegas`` and couplings ``couplings`` (unit masses).

    ``grid="tangent"`` places modes at w = wD tan(theta) with theta uniform on
    (0, pi/2), which samples the Lorentzian tail out to infinity.
    ``"stretched"`` (the default) warps theta to crowd nodes into the far
    tail, where plain tangent spacing is wide enough to alias within the
    horizon, and stops at ``CAP_FACTOR * wD``.  ``"linear"`` uses
    midpoints of a uniform grid on (0, omega_max].
    """

    omegas: np.ndarray
    couplings: np.ndarray
    grid: str
    omega_max: float

    @property
    def n_modes(self) -> int:
        return self.omegas.size

    def renormalization(self) -> float:
        """sum c_k^2 / w_k^2, the discrete estimate of gamma0 * wD."""
        return float(np.sum(self.couplings**2 / self.omegas**2))

    def damping_kernel(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        w2 = self.couplings**2 / self.omegas**2
        return np.cos(np.multiply.outer(t, self.omegas)) @ w2


def discretize_bath(cfg: SystemConfig, n_modes: int = 2000, grid: str = "stretched",
                    omega_max: float | None = None) -> BathDiscretization:
    if n_modes < 1:
        raise ValidationError("need at least one bath mode", field="n_modes", module="bath_oracle")
    wd = cfg.omega_d
    if grid in ("tangent", "stretched"):
        # w = wD tan(pi/2 s(u)) with u on midpoints; s = 1 - (1-u)^p packs nodes
        # into the Lorentzian tail, whose tangent spacing would otherwise alias
        p = 1 if grid == "tangent" else STRETCH_POWER
        u_max = 1.0
        if grid == "stretched":
            cap = CAP_FACTOR * wd if omega_max is None else float(omega_max)
            u_max = 1.0 - (1.0 - 2.0 / math.pi * math.atan(cap / wd)) ** (1.0 / p)
        du = u_max / n_modes
        u = (np.arange(n_modes) + 0.5) * du
        th = 0.5 * math.pi * (1.0 - (1.0 - u) ** p)
        w = wd * np.tan(th)
        dw = wd * 0.5 * math.pi * p * (1.0 - u) ** (p - 1) * du / np.cos(th) ** 2
        wmax = float(w[-1])
    elif grid == "linear":
        wmax = 40.0 * wd if omega_max is None else float(omega_max)
        dw = np.full(n_modes, wmax / n_modes)
        w = (np.arange(n_modes) + 0.5) * dw
    else:
        raise ValidationError(f"unknown grid {grid!r}", field="grid", module="bath_oracle")
    j = cfg.gamma0 * wd**2 * w / (w * w + wd**2)
    c = np.sqrt(2.0 / math.pi * w * j * dw)
    return BathDiscretization(w, c, grid, wmax)


def check_kernel(cfg: SystemConfig, bath: BathDiscretization, horizon: float | None = None,
                 n_points: int = 400) -> float:
    """Sup-norm deviation of the discrete damping kernel from gamma0 wD exp(-wD t), relative to gamma0 wD."""
    dc = derive_constants(cfg)
    horizon = 2.0 * dc.tau if horizon is None else horizon
    t = np.linspace(0.0, horizon, n_points)
    exact = cfg.gamma0 * cfg.omega_d * np.exp(-cfg.omega_d * t)
    dev = float(np.abs(bath.damping_kernel(t) - exact).max() / (cfg.gamma0 * cfg.omega_d))
    if dev > KERNEL_TOL:
        raise UnderResolvedBath(
            f"discrete damping kernel deviates by {dev:.3g} (> {KERNEL_TOL}) on [0, {horizon:.4g}]; "
            f"increase the number of modes (M={bath.n_modes})")
    return dev


@dataclass(frozen=True)
class OracleSnapshot:
    t: float
    battery_cm: np.ndarray
    bm_block: np.ndarray
    dm_blocks: np.ndarray
    bath_energy_change: float
    battery_energy_change: float
    interaction_energy: float
    interaction_energy_initial: float
    energy_drift: float

    @property
    def work(self) -> float:
        return self.interaction_energy_initial - self.interaction_energy


def _collective_rotation(cfg: SystemConfig) -> np.ndarray:
    try:
        return householder_basis(cfg)
    except DegenerateDirection:
        return np.eye(cfg.n_cells)


def evolve_moments(cfg: SystemConfig, bath: BathDiscretization, t_grid,
                   counter_term: bool = True, check: bool = True) -> list[OracleSnapshot]:
    """Exact second moments of battery plus bath at each time in ``t_grid``.

    ``counter_term=False`` drops the renormalizing alpha-alpha term from the
    Hamiltonian, a debug switch for the known frequency-shift failure mode.
    """
    if check:
        check_kernel(cfg, bath)
    al = cfg.alpha_array
    n, m = cfg.n_cells, bath.n_modes
    w, ck = bath.omegas, bath.couplings
    renorm = bath.renormalization() if counter_term else 0.0

    pot = np.zeros((n + m, n + m))
    pot[:n, :n] = np.eye(n) + renorm * np.outer(al, al)
    pot[n:, n:] = np.diag(w * w)
    pot[:n, n:] = -np.outer(al, ck)
    pot[n:, :n] = pot[:n, n:].T
    freq2, modes = np.linalg.eigh(pot)
    if freq2.min() <= 0:
        raise StiffIntegration("coupled system is unstable (non-positive normal-mode frequency)")
    freq = np.sqrt(freq2)

    c_b = coth_half_inverse(cfg.temp_battery)
    temp = cfg.temp_reservoir
    coth_k = 1.0 / np.tanh(w / (2.0 * temp)) if temp > 0 else np.ones(m)
    var_q = np.concatenate([np.full(n, 0.5 * c_b), coth_k / (2.0 * w)])
    var_p = np.concatenate([np.full(n, 0.5 * c_b), w * coth_k / 2.0])

    def total_energy(qq_diag, pp_diag, qq_rows):
        """Battery, bath and interaction energies from the relevant moments."""
        e_bath = 0.5 * float(np.sum(pp_diag[n:] + w * w * qq_diag[n:]))
        e_batt = 0.5 * float(np.sum(pp_diag[:n] + qq_diag[:n]))
        h_int = float(-(al @ qq_rows[:, n:]) @ ck + 0.5 * renorm * al @ qq_rows[:, :n] @ al)
        return e_bath, e_batt, h_int

    qq0 = np.diag(var_q)
    e_bath0, e_batt0, h_int0 = total_energy(var_q, var_p, qq0[:n])
    total0 = e_bath0 + e_batt0 + h_int0

    rot = _collective_rotation(cfg)
    out = []
    for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
        cos, sin = np.cos(freq * t), np.sin(freq * t)
        # q(t) = Aq q0 + Ap p0 ; p(t) = Bq q0 + Bp p0
        a_q = (modes * cos) @ modes.T
        a_p = (modes * (sin / freq)) @ modes.T
        b_q = -(modes * (freq * sin)) @ modes.T
        b_p = a_q
        qq_rows = (a_q[:n] * var_q) @ a_q.T + (a_p[:n] * var_p) @ a_p.T
        pp_bb = (b_q[:n] * var_q) @ b_q[:n].T + (b_p[:n] * var_p) @ b_p[:n].T
        qp_bb = (a_q[:n] * var_q) @ b_q[:n].T + (a_p[:n] * var_p) @ b_p[:n].T
        qq_diag = (a_q**2) @ var_q + (a_p**2) @ var_p
        pp_diag = (b_q**2) @ var_q + (b_p**2) @ var_p
        e_bath, e_batt, h_int = total_energy(qq_diag, pp_diag, qq_rows)
        drift = abs(e_bath + e_batt + h_int - total0) / abs(total0)
        if drift > DRIFT_TOL:
            raise StiffIntegration(f"total energy drift {drift:.3e} at t={t:.6g}")

        cm = np.empty((2 * n, 2 * n))
        cm[0::2, 0::2] = qq_rows[:, :n]
        cm[1::2, 1::2] = pp_bb
        cm[0::2, 1::2] = qp_bb
        cm[1::2, 0::2] = qp_bb.T
        coll = np.kron(rot, np.eye(2)) @ cm @ np.kron(rot, np.eye(2)).T
        dm = np.array([coll[2 * k:2 * k + 2, 2 * k:2 * k + 2] for k in range(1, n)]).reshape(-1, 2, 2)
        out.append(OracleSnapshot(
            t=float(t), battery_cm=cm, bm_block=coll[:2, :2].copy(), dm_blocks=dm,
            bath_energy_change=e_bath - e_bath0, battery_energy_change=e_batt - e_batt0,
            interaction_energy=h_int, interaction_energy_initial=h_int0, energy_drift=drift,
        ))
    return out
