"""Efficiency bounds separating classical squeezing, quantum squeezing and entanglement."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InconsistentWitness, InvalidC, NonPositiveKappa

CLASSICAL = "classical_squeezing"
QUANTUM_NO_ENT = "quantum_squeezing_no_entanglement"
ENTANGLED = "entangled"

_WITNESS_TOL = 1e-10


@dataclass(frozen=True)
class BoundReport:
    kappa: float
    b_cl: float
    b_en: float
    regime: str


def _check_kappa(kappa: float) -> None:
    if not kappa > 0:
        raise NonPositiveKappa(f"kappa must be > 0, got {kappa!r}", field="kappa")


def eta_from_lambda_minus(lam_minus: float, kappa: float) -> float:
    """Global efficiency written through lambda_minus and kappa = E'_BM.

    Uses lambda_plus = 2 kappa + 1 - lambda_minus, which follows from
    E_BM = (lambda_plus + lambda_minus) / 2.
    """
    _check_kappa(kappa)
    nu1 = math.sqrt(lam_minus * (2.0 * kappa + 1.0 - lam_minus))
    return 1.0 - (nu1 - 0.5) / kappa


def bound_classical(kappa: float) -> float:
    _check_kappa(kappa)
    root = math.sqrt(4.0 * kappa + 1.0)
    # (root - 1) / (2 kappa) rewritten as 2 / (root + 1) to avoid cancellation at small kappa
    return 1.0 - 2.0 / (root + 1.0)


def bound_entangled(kappa: float, c_t0: float) -> float:
    _check_kappa(kappa)
    if not c_t0 >= 1.0:
        raise InvalidC(f"C(T0) must be >= 1, got {c_t0!r}", field="c_t0")
    inv_c = 1.0 / c_t0
    root = math.sqrt((4.0 * kappa + 2.0 - inv_c) * inv_c)
    return 1.0 - (root - 1.0) / (2.0 * kappa)


def classify_regime(lam_minus: float, nu_pt: float | None, c_t0: float) -> str:
    """Hierarchy band from lambda_minus; ``nu_pt`` (if given) must tell the same story."""
    if lam_minus >= 0.5:
        regime = CLASSICAL
    elif lam_minus >= 0.5 / c_t0:
        regime = QUANTUM_NO_ENT
    else:
        regime = ENTANGLED
    if nu_pt is not None and not math.isnan(nu_pt):
        threshold = 0.5 / c_t0
        # the two witnesses may only differ when lambda_minus sits on the threshold
        if abs(lam_minus - threshold) > _WITNESS_TOL:
            by_nu = nu_pt < 0.5
            if by_nu != (regime == ENTANGLED):
                raise InconsistentWitness(
                    f"lambda_minus={lam_minus:.12g} and nu_pt={nu_pt:.12g} disagree on entanglement")
    return regime


def bound_report(kappa: float, c_t0: float, lam_minus: float, nu_pt: float | None) -> BoundReport:
    return BoundReport(kappa, bound_classical(kappa), bound_entangled(kappa, c_t0),
                       classify_regime(lam_minus, nu_pt, c_t0))


def hierarchy_holds(regime: str, eta: float, b_cl: float, b_en: float, slack: float = 1e-9) -> bool:
    """Whether eta lies in the band its regime predicts."""
    if regime == CLASSICAL:
        return eta < b_cl + slack
    if regime == QUANTUM_NO_ENT:
        return b_cl - slack < eta <= b_en + slack
    return b_en - slack < eta <= 1.0 + slack
