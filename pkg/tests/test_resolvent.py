from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussbatt.config import SystemConfig, derive_constants
from gaussbatt.errors import ValidationError
from gaussbatt.resolvent import eval_A, eval_chi, pole_residual, solve_poles


def _poles(gamma0=5.0, omega_d=2.0, n=6, alphas="uniform"):
    cfg = SystemConfig(n, alphas, gamma0, omega_d, 0.5, 0.5)
    dc = derive_constants(cfg)
    return cfg, dc, solve_poles(dc, cfg)


def test_fig1_roots_satisfy_cubic():
    _, _, p = _poles()
    # (1 + mu^2)(2 - mu) - 60 mu = 0
    assert np.all(np.abs(pole_residual(p.coupled_poles, 2.0, 60.0)) < 1e-10)
    # independent check against numpy's polynomial roots
    ref = np.sort_complex(np.roots([-1.0, 2.0, -61.0, 2.0]))
    assert np.allclose(np.sort_complex(p.coupled_poles), ref, rtol=1e-10)


def test_weak_coupling_poles_tend_to_uncoupled_factorization():
    # exactly zero coupling is degenerate (coupled poles land on +-i), so approach it
    for gamma0 in (1e-3, 1e-5):
        _, _, p = _poles(gamma0=gamma0, omega_d=2.0, n=1)
        dist = np.abs(np.sort_complex(p.coupled_poles) - np.sort_complex([2.0, 1j, -1j]))
        assert dist.max() < 2 * gamma0


def test_initial_conditions_of_A():
    _, dc, p = _poles()
    assert abs(eval_A(p, 0.0)) < 1e-10
    assert eval_A(p, 0.0, 1) == pytest.approx(1.0 / 6.0, abs=1e-10)
    assert abs(eval_A(p, 0.0, 2)) < 1e-10


def test_A_decays():
    _, _, p = _poles()
    t_end = 10.0 / p.coupled_poles.real.min()
    assert abs(eval_A(p, t_end)) < 1e-4


@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivatives_match_central_differences(order):
    _, _, p = _poles(gamma0=1.571, omega_d=0.922)
    h = 1e-4
    for t in (0.3, 1.1, 2.7):
        fd = (eval_A(p, t + h, order - 1) - eval_A(p, t - h, order - 1)) / (2 * h)
        assert fd == pytest.approx(eval_A(p, t, order), rel=1e-5, abs=1e-9)


def test_chi_free_limit_is_sine():
    cfg, _, p = _poles(gamma0=1e-7, n=3)
    t = np.linspace(0, 10, 50)
    assert np.allclose(eval_chi(p, cfg, 1, 1, t), np.sin(t), atol=1e-5)
    assert np.allclose(eval_chi(p, cfg, 0, 2, t), 0.0, atol=1e-5)


def test_chi_index_bounds():
    cfg, _, p = _poles(n=3)
    with pytest.raises(ValidationError):
        eval_chi(p, cfg, 3, 0, 0.1)


def test_negative_time_and_bad_order_rejected():
    _, _, p = _poles()
    with pytest.raises(ValidationError):
        eval_A(p, -0.1)
    with pytest.raises(ValidationError):
        eval_A(p, 0.1, order=4)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 20.0), st.floats(0.05, 30.0), st.integers(1, 20))
def test_pole_residuals_and_boundary_values(gamma0, omega_d, n):
    _, dc, p = _poles(gamma0, omega_d, n)
    scale = 1.0 + np.abs(p.coupled_poles) ** 3
    assert np.all(np.abs(pole_residual(p.coupled_poles, omega_d, dc.omega_n ** 2)) / scale < 1e-10)
    assert np.all(p.coupled_poles.real > 0)
    assert abs(eval_A(p, 0.0)) < 1e-10
    assert eval_A(p, 0.0, 1) == pytest.approx(1.0 / dc.alpha_bar_sq, rel=1e-8)


def test_pole_ordering_is_deterministic():
    a = _poles(1.571, 0.922)[2]
    b = _poles(1.571, 0.922)[2]
    assert np.array_equal(a.coupled_poles, b.coupled_poles)
    keys = [(m.real, m.imag) for m in a.coupled_poles]
    assert keys == sorted(keys)
