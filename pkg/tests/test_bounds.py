from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaussbatt.bounds import (
    CLASSICAL, ENTANGLED, QUANTUM_NO_ENT, bound_classical, bound_entangled, classify_regime,
    eta_from_lambda_minus, hierarchy_holds,
)
from gaussbatt.config import coth_half_inverse
from gaussbatt.errors import InconsistentWitness, InvalidC, NonPositiveKappa

C_T0_ONE = coth_half_inverse(1.0)


def test_classical_bound_values():
    assert bound_classical(1.0) == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-15)
    assert bound_classical(1e-8) == pytest.approx(1e-8, rel=1e-6)
    assert bound_classical(1e12) == pytest.approx(1.0, abs=1e-5)


def test_entangled_bound_values():
    assert bound_entangled(1.0, 2.0) == pytest.approx(1 - 0.5 * (math.sqrt(2.75) - 1), rel=1e-15)
    assert bound_entangled(1.0, 2.0) == pytest.approx(0.6708, abs=1e-4)
    assert bound_entangled(1e12, 3.0) == pytest.approx(1.0, abs=1e-5)


@given(st.floats(1e-3, 1e3))
def test_zero_temperature_bounds_coincide(kappa):
    assert bound_entangled(kappa, 1.0) == pytest.approx(bound_classical(kappa), rel=1e-12)


@given(st.floats(1e-3, 1e3), st.floats(1.0, 50.0))
def test_bounds_are_the_efficiency_at_the_thresholds(kappa, c):
    assert bound_classical(kappa) == pytest.approx(eta_from_lambda_minus(0.5, kappa), abs=1e-10)
    assert bound_entangled(kappa, c) == pytest.approx(eta_from_lambda_minus(0.5 / c, kappa), abs=1e-10)


def test_classical_bound_monotone_in_kappa():
    b_cl = [bound_classical(k) for k in np.geomspace(1e-3, 1e3, 200)]
    assert np.all(np.diff(b_cl) > 0)


@pytest.mark.parametrize("c", [1.2, C_T0_ONE, 2.5, 10.0])
def test_entangled_bound_shape_in_kappa(c):
    """B_en rises with kappa only above kappa* = (2C-1)(C-1)/(2C).

    Below that it falls from 1 at kappa_min = (C-1)^2/(4C), the smallest
    kappa for which lambda_minus = 1/(2C) is a physical state.
    """
    k_min = (c - 1) ** 2 / (4 * c)
    k_star = (2 * c - 1) * (c - 1) / (2 * c)
    assert bound_entangled(k_min, c) == pytest.approx(1.0, abs=1e-12)
    above = [bound_entangled(k, c) for k in np.geomspace(k_star, 1e4, 300)]
    below = [bound_entangled(k, c) for k in np.linspace(k_min, k_star, 50)[1:]]
    assert np.all(np.diff(above) > 0)
    assert np.all(np.diff(below) < 0)


def test_invalid_inputs():
    with pytest.raises(NonPositiveKappa):
        bound_classical(0.0)
    with pytest.raises(NonPositiveKappa):
        eta_from_lambda_minus(0.3, -1.0)
    with pytest.raises(InvalidC):
        bound_entangled(1.0, 0.9)


def test_regime_labels():
    assert classify_regime(0.6, None, 3.0) == CLASSICAL
    assert classify_regime(0.5, None, 3.0) == CLASSICAL
    # Table I row 1 and row 2 at C = coth(1/2)
    assert 0.5 / C_T0_ONE == pytest.approx(0.231, abs=1e-3)
    assert classify_regime(0.29, math.sqrt(0.5 * C_T0_ONE * 0.29), C_T0_ONE) == QUANTUM_NO_ENT
    assert classify_regime(0.19, math.sqrt(0.5 * C_T0_ONE * 0.19), C_T0_ONE) == ENTANGLED
    assert classify_regime(0.5 / C_T0_ONE, 0.5, C_T0_ONE) == QUANTUM_NO_ENT


def test_inconsistent_witness():
    with pytest.raises(InconsistentWitness):
        classify_regime(0.1, 0.6, 2.0)


def test_hierarchy_bands():
    kappa, c = 2.0, 2.0
    b_cl, b_en = bound_classical(kappa), bound_entangled(kappa, c)
    assert b_cl < b_en < 1
    assert hierarchy_holds(CLASSICAL, b_cl - 0.01, b_cl, b_en)
    assert not hierarchy_holds(CLASSICAL, b_cl + 0.01, b_cl, b_en)
    assert hierarchy_holds(QUANTUM_NO_ENT, 0.5 * (b_cl + b_en), b_cl, b_en)
    assert hierarchy_holds(ENTANGLED, 0.5 * (b_en + 1), b_cl, b_en)
    assert not hierarchy_holds(ENTANGLED, b_cl, b_cl, b_en)


@given(st.floats(1e-2, 1e2), st.floats(1.0, 20.0), st.floats(0.0, 1.0))
def test_eta_bands_follow_lambda_minus(kappa, c, frac):
    """eta(lambda-) is decreasing, so the lambda- bands map onto the eta bands."""
    s = 2 * kappa + 1
    # physical states: lambda- (2 kappa + 1 - lambda-) >= 1/4 and lambda- <= lambda+
    lam_lo = 0.5 * (s - math.sqrt(s * s - 1))
    lam = lam_lo + frac * (0.5 * s - lam_lo)
    eta = eta_from_lambda_minus(lam, kappa)
    regime = classify_regime(lam, None, c)
    assert hierarchy_holds(regime, eta, bound_classical(kappa), bound_entangled(kappa, c))
