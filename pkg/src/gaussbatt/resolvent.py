"""Laplace-domain resolvent of the Drude-damped battery.

The bright-mode response function is G(t) = alpha_bar**2 * A(t), a sum of
three damped exponentials exp(-mu_i t) whose rates solve

    (1 + mu**2) (omega_D - mu) - mu * Omega_N**2 = 0.

The two free poles +-i carry no weight in G but enter the partial-fraction
products that define the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DerivedConstants, SystemConfig
from .errors import DegeneratePoles, ValidationError

FREE_POLES = np.array([1j, -1j])
_DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class PoleSet:
    free_poles: np.ndarray
    coupled_poles: np.ndarray
    # G(t) = sum_i weights[i] * exp(-coupled_poles[i] * t)
    weights: np.ndarray
    # A(t) = sum_i a_coeffs[i] * exp(-coupled_poles[i] * t)
    a_coeffs: np.ndarray

    @property
    def all_poles(self) -> np.ndarray:
        return np.concatenate([self.free_poles, self.coupled_poles])

    def key(self) -> tuple:
        return tuple(complex(m) for m in self.coupled_poles)


def characteristic_cubic(omega_d: float, omega_n_sq: float) -> np.ndarray:
    """Monic coefficients of mu^3 - wD mu^2 + (1 + Omega_N^2) mu - wD."""
    return np.array([1.0, -omega_d, 1.0 + omega_n_sq, -omega_d])


def pole_residual(mu, omega_d: float, omega_n_sq: float):
    mu = np.asarray(mu)
    return (1.0 + mu**2) * (omega_d - mu) - mu * omega_n_sq


def _companion_roots(coeffs: np.ndarray) -> np.ndarray:
    c = coeffs[1:] / coeffs[0]
    n = len(c)
    comp = np.zeros((n, n))
    comp[0, :] = -c
    comp[1:, :-1] = np.eye(n - 1)
    return np.linalg.eigvals(comp).astype(complex)


def _newton_polish(roots: np.ndarray, coeffs: np.ndarray, steps: int = 2) -> np.ndarray:
    p = np.poly1d(coeffs)
    dp = p.deriv()
    out = roots.copy()
    for _ in range(steps):
        d = dp(out)
        ok = np.abs(d) > 0
        out[ok] = out[ok] - p(out[ok]) / d[ok]
    return out


def _sort_poles(mu: np.ndarray) -> np.ndarray:
    # Snap tiny imaginary parts so the real root sorts deterministically.
    mu = np.where(np.abs(mu.imag) < 1e-14 * (1 + np.abs(mu)), mu.real + 0j, mu)
    order = np.lexsort((mu.imag, mu.real))
    return mu[order]


def solve_poles(dc: DerivedConstants, cfg: SystemConfig) -> PoleSet:
    coeffs = characteristic_cubic(cfg.omega_d, dc.alpha_bar_sq * dc.omega0_sq)
    mu = _sort_poles(_newton_polish(_companion_roots(coeffs), coeffs))
    # enforce exact conjugate symmetry of the complex pair
    if abs(mu[1].imag) > 0 and np.isclose(mu[1], np.conj(mu[2]), rtol=1e-8, atol=1e-12):
        pair = 0.5 * (mu[1] + np.conj(mu[2]))
        mu = _sort_poles(np.array([mu[0], pair, np.conj(pair)]))

    every = np.concatenate([FREE_POLES, mu])
    gaps = np.abs(every[:, None] - every[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() < _DEGENERACY_TOL:
        raise DegeneratePoles(f"two resolvent poles coincide (gap {gaps.min():.3e})")

    a_coeffs = np.empty(3, dtype=complex)
    for i, m in enumerate(mu):
        others = every[np.abs(every - m) > 0]
        a_coeffs[i] = m * dc.omega0_sq / np.prod(others - m)
    return PoleSet(
        free_poles=FREE_POLES.copy(),
        coupled_poles=mu,
        weights=dc.alpha_bar_sq * a_coeffs,
        a_coeffs=a_coeffs,
    )


def _real_checked(z: np.ndarray, what: str) -> np.ndarray:
    tol = 1e-9 * (1.0 + np.abs(z.real))
    if np.any(np.abs(z.imag) > tol):
        raise AssertionError(f"{what} has non-negligible imaginary part {np.max(np.abs(z.imag)):.3e}")
    return z.real


def eval_A(poles: PoleSet, t, order: int = 0):
    """A(t) or its ``order``-th time derivative (order 0..3). Vectorized over t."""
    if order not in (0, 1, 2, 3):
        raise ValidationError(f"order must be 0..3, got {order}", field="order", module="resolvent")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValidationError("time must be >= 0", field="t", module="resolvent")
    mu = poles.coupled_poles
    terms = (-mu) ** order * poles.a_coeffs * np.exp(-np.multiply.outer(t_arr, mu))
    val = _real_checked(terms.sum(axis=-1), "A(t)")
    return float(val) if val.ndim == 0 else val


def eval_chi(poles: PoleSet, cfg: SystemConfig, l: int, lp: int, t):
    """Time-domain resolvent element chi_{l,l'}(t); indices are 0-based."""
    n = cfg.n_cells
    for name, idx in (("l", l), ("l'", lp)):
        if not 0 <= idx < n:
            raise ValidationError(f"index {idx} out of range 0..{n - 1}", field=name, module="resolvent")
    alphas = cfg.alphas
    alpha_bar_sq = sum(a * a for a in alphas)
    s = np.sin(np.asarray(t, dtype=float))
    val = (l == lp) * s + alphas[l] * alphas[lp] * (eval_A(poles, t) - s / alpha_bar_sq)
    return float(val) if np.ndim(val) == 0 else val
