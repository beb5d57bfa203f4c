"""Principal-axis squeezing of the bright mode and bipartite entanglement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DerivedConstants, SystemConfig
from .covariance import BMBlock, symplectic_eigenvalues
from .errors import OddN, UnbalancedPartition

CLASSICAL = "classical_squeezed"
QUANTUM = "quantum_squeezed"
UNSQUEEZED = "unsqueezed"

_BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class SqueezeReport:
    lambda_plus: float
    lambda_minus: float
    r: float
    phi: float
    nu_pt_minus: float
    log_neg: float
    squeezing_class: str


def _discriminant(bm: BMBlock) -> float:
    disc = bm.trace_T**2 - 4.0 * bm.delta
    if disc < -1e-12 * max(1.0, bm.trace_T**2):
        raise AssertionError(f"negative discriminant {disc:.3e} for a symmetric block")
    return max(disc, 0.0)


def principal_variances(bm: BMBlock, dc: DerivedConstants | None = None) -> tuple[float, float, float]:
    """(lambda_plus, lambda_minus, phi) of the bright-mode block.

    ``phi`` in (-pi/2, pi/2] is the angle of the lambda_plus axis measured
    from Q toward P.
    """
    root = math.sqrt(_discriminant(bm))
    c, k = bm.c_t0, bm.alpha_bar_sq
    lam_p = 0.5 * (c + k * (bm.trace_T + root))
    lam_m = 0.5 * (c + k * (bm.trace_T - root))
    phi = 0.5 * math.atan2(2.0 * bm.b, bm.a - bm.c)
    if phi <= -0.5 * math.pi:
        # b -> 0- with a < c; the axis -pi/2 is the same line as +pi/2
        phi += math.pi
    return lam_p, lam_m, phi


def squeezing_parameter(lam_plus: float, lam_minus: float) -> float:
    return 0.25 * math.log(lam_plus / lam_minus)


def squeezing_class(r: float, lam_minus: float) -> str:
    if abs(r) < 1e-9:
        return UNSQUEEZED
    return QUANTUM if lam_minus < 0.5 else CLASSICAL


def default_partition(n_cells: int) -> tuple[int, ...]:
    return tuple(range(n_cells // 2))


def check_partition(cfg: SystemConfig, part_a: Sequence[int]) -> tuple[int, ...]:
    n = cfg.n_cells
    if n % 2:
        raise OddN(f"balanced bipartition needs even N, got {n}")
    part_a = tuple(sorted(int(i) for i in part_a))
    if len(set(part_a)) != n // 2 or not all(0 <= i < n for i in part_a):
        raise UnbalancedPartition(f"subsystem A must hold N/2 = {n // 2} distinct cells, got {part_a}")
    a2 = math.fsum(cfg.alphas[i] ** 2 for i in part_a)
    total = math.fsum(a * a for a in cfg.alphas)
    if abs(a2 - 0.5 * total) > _BALANCE_TOL * max(1.0, total):
        raise UnbalancedPartition(f"coupling weight of A is {a2:.12g}, need {0.5 * total:.12g}")
    return part_a


def nu_pt_closed(bm: BMBlock) -> float:
    """Smallest partial-transpose symplectic eigenvalue for a balanced split."""
    c = bm.c_t0
    inner = c + bm.alpha_bar_sq * (bm.trace_T - math.sqrt(_discriminant(bm)))
    return 0.5 * math.sqrt(c) * math.sqrt(max(inner, 0.0))


def log_negativity(nu_pt: float) -> float:
    return max(0.0, -math.log(2.0 * nu_pt))


def bipartite_covariance(bm: BMBlock) -> np.ndarray:
    """4x4 covariance of (Q_A, P_A, Q_B, P_B) for a balanced split of the bright mode."""
    k = 0.5 * bm.alpha_bar_sq * np.array([[bm.a, bm.b], [bm.b, bm.c]])
    l = 0.5 * bm.c_t0 * np.eye(2) + k
    return np.block([[l, k], [k.T, l]])


def nu_pt_bruteforce(bm: BMBlock) -> float:
    lam = np.diag([1.0, 1.0, 1.0, -1.0])
    return float(symplectic_eigenvalues(lam @ bipartite_covariance(bm) @ lam)[0])


def negativity(cfg: SystemConfig, bm: BMBlock, dc: DerivedConstants | None = None,
               partition: Sequence[int] | None = None) -> tuple[float, float]:
    """(nu_pt_minus, log-negativity) for a balanced bipartition; A defaults to the first N/2 cells."""
    check_partition(cfg, default_partition(cfg.n_cells) if partition is None else partition)
    nu = nu_pt_closed(bm)
    return nu, log_negativity(nu)


def squeeze_report(cfg: SystemConfig, bm: BMBlock, dc: DerivedConstants | None = None,
                   partition: Sequence[int] | None = None) -> SqueezeReport:
    """Squeezing data; for odd N or an unbalanced split the entanglement fields are NaN."""
    lp, lm, phi = principal_variances(bm, dc)
    r = squeezing_parameter(lp, lm)
    try:
        nu, ln = negativity(cfg, bm, dc, partition)
    except (OddN, UnbalancedPartition):
        nu, ln = math.nan, math.nan
    return SqueezeReport(lp, lm, r, phi, nu, ln, squeezing_class(r, lm))
