"""Bright-mode covariance block, its time derivatives, and symplectic spectra.

The battery covariance matrix in the collective basis is block diagonal:
one 2x2 bright-mode block

    Sigma_BM(t) = C/2 * 1 + alpha_bar**2 * [[a, b], [b, c]]

and N-1 frozen dark-mode blocks C/2 * 1.  Each of a, b, c is the sum of a
closed-form homogeneous part (memory of the initial battery state) and a
thermal part given by a frequency integral over the reservoir noise.

Thermal integrals are evaluated as adaptive Gauss-Kronrod quadrature on a
finite window [0, W] plus an analytic asymptotic tail on [W, inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import sici

from .config import DerivedConstants, SystemConfig, derive_constants
from .errors import DegenerateDirection, PhysicalityViolation, QuadratureFailure, ValidationError
from .resolvent import PoleSet, eval_A, solve_poles

# rows of the thermal moment array
XX, XP, PP, X_PDOT = range(4)


@dataclass(frozen=True)
class QuadSettings:
    epsrel: float = 1e-8
    epsabs: float = 1e-12
    # finite window is [0, W] with W = max(window_factor * max(omega_D, 1, |mu|), thermal_factor * T)
    window_factor: float = 10.0
    thermal_factor: float = 40.0
    tail_order: int = 7
    limit: int = 20000
    # the window grows 4x per retry when the tail bound is too loose (tiny t, tiny moments)
    max_widenings: int = 4


DEFAULT_QUAD = QuadSettings()


# -- reservoir noise ---------------------------------------------------------

def spectral_density(omega, cfg: SystemConfig):
    """Drude spectral density J(w) = gamma0 wD^2 w / (w^2 + wD^2)."""
    w = np.asarray(omega, dtype=float)
    return cfg.gamma0 * cfg.omega_d**2 * w / (w * w + cfg.omega_d**2)


def _w_coth(omega, temperature: float):
    """w * coth(w / 2T), continuous through w = 0 (limit 2T) and T = 0 (|w|)."""
    w = np.asarray(omega, dtype=float)
    if temperature == 0.0:
        return np.abs(w)
    x = w / (2.0 * temperature)
    ax = np.abs(x)
    small = ax < 1e-4
    safe = np.where(small, 1.0, x)
    val = np.where(small, 1.0 + x * x / 3.0, safe / np.tanh(safe))
    return 2.0 * temperature * val


def noise_spectrum(omega, cfg: SystemConfig):
    """J(w) coth(w/2T): symmetric noise power, finite at w = 0."""
    w = np.asarray(omega, dtype=float)
    return cfg.gamma0 * cfg.omega_d**2 * _w_coth(w, cfg.temp_reservoir) / (w * w + cfg.omega_d**2)


@dataclass(frozen=True)
class QuadratureIntegrand:
    """Integrand of the thermal moments for fixed parameters.

    ``kernel_L`` is the literal pole-pair kernel L_{j,r}(w, t); ``moments``
    is the factorized form actually integrated.  Both give identical
    integrals over the symmetric frequency axis.
    """

    cfg: SystemConfig
    poles: PoleSet

    def spectral_density(self, omega):
        return spectral_density(omega, self.cfg)

    def noise(self, omega):
        return noise_spectrum(omega, self.cfg)

    def kernel_L(self, omega: float, t: float) -> np.ndarray:
        mu = self.poles.coupled_poles
        g = self.poles.weights
        mj, mr = mu[:, None], mu[None, :]
        bracket = (1 + np.exp(-(mj + mr) * t) - np.exp(-(mj - 1j * omega) * t)
                   - np.exp(-(mr + 1j * omega) * t))
        return np.outer(g, g) / ((mr + 1j * omega) * (mj - 1j * omega)) * bracket

    def amplitudes(self, omega: float, times: np.ndarray):
        """I_w(omega, t) = int_0^t G^(k)(t-s) e^{i omega s} ds for the three response weights.

        Returns an array (3, nt): position, momentum, and d/dt of momentum
        response (the last includes the G'(0) = 1 boundary term).
        """
        mu = self.poles.coupled_poles
        d = self.poles.weights / (mu + 1j * omega)
        wts = np.stack([d, -mu * d, mu * mu * d])
        decay = np.exp(-np.multiply.outer(mu, times))
        p = wts.sum(axis=1)
        p[2] += 1.0
        q = wts @ decay
        return np.exp(1j * omega * times)[None, :] * p[:, None] - q

    def moments(self, omega: float, times: np.ndarray) -> np.ndarray:
        """Real integrand rows (XX, XP, PP, X_PDOT) on [0, inf), already folded from (-inf, inf)."""
        i1, i2, i3 = self.amplitudes(omega, times)
        k = float(self.noise(omega)) / math.pi
        return k * np.stack([
            (i1 * i1.conj()).real,
            (i1 * i2.conj()).real,
            (i2 * i2.conj()).real,
            (i1 * i3.conj()).real,
        ])


# -- thermal moments -----------------------------------------------------------

def _window(cfg: SystemConfig, poles: PoleSet, quad: QuadSettings) -> float:
    scale = max(cfg.omega_d, 1.0, float(np.abs(poles.coupled_poles).max()))
    return max(quad.window_factor * scale, quad.thermal_factor * cfg.temp_reservoir)


def _fourier_tail(times: np.ndarray, w: float, nmax: int) -> np.ndarray:
    """E_n(t) = int_w^inf e^{i x t} x^-n dx for n = 0..nmax (row 0 unused)."""
    out = np.zeros((nmax + 1, times.size), dtype=complex)
    pos = times > 0
    x = w * np.where(pos, times, 1.0)
    si, ci = sici(x)
    out[1] = np.where(pos, -ci + 1j * (0.5 * math.pi - si), np.inf)
    phase = np.exp(1j * w * times)
    for n in range(1, nmax):
        out[n + 1] = (1j * times * out[n] + phase * w ** (-n)) / n
        out[n + 1][~pos] = w ** (-n) / n
    return out


def _response_derivs(poles: PoleSet, times: np.ndarray, kmax: int) -> np.ndarray:
    """G^(k)(t) for k < kmax; shape (kmax, nt)."""
    mu = poles.coupled_poles
    decay = poles.weights * np.exp(-np.multiply.outer(times, mu))
    return np.array([((-mu) ** k * decay).sum(axis=-1).real for k in range(kmax)])


def _tail(cfg: SystemConfig, poles: PoleSet, times: np.ndarray, w: float, order: int):
    """Asymptotic [w, inf) contribution to each moment row, and its error bound.

    Expands every amplitude in x = 1/(i omega):  I = e^{i omega t} P(x) - Q(x),
    with P, Q power series whose coefficients are derivatives of G at 0 and t.
    The noise kernel is expanded in 1/omega (coth = 1 for w >> T).
    """
    nt = times.size
    g_t = _response_derivs(poles, times, order + 2)
    g_0 = _response_derivs(poles, np.zeros(1), order + 2)[:, 0]

    def series(shift, coeffs, const=0.0):
        s = np.zeros((order + 1,) + coeffs.shape[1:], dtype=complex)
        s[0] = const
        s[1:] = coeffs[shift:shift + order]
        return s

    p_ser = [series(0, g_0[:, None]), series(1, g_0[:, None]), series(2, g_0[:, None], 1.0)]
    q_ser = [series(0, g_t), series(1, g_t), series(2, g_t)]
    x_pow = (-1j) ** np.arange(order + 1)  # x^k = (-i)^k omega^-k
    flip = (-1.0) ** np.arange(order + 1)  # conj(x) = -x

    def product(a, b):
        out = np.zeros((order + 1, nt), dtype=complex)
        for i in range(order + 1):
            for j in range(order + 1 - i):
                out[i + j] += a[i] * b[j]
        return out * x_pow[:, None]

    kern = np.zeros(order + 2)
    for m in range((order + 2) // 2 + 1):
        if 2 * m + 1 < kern.size:
            kern[2 * m + 1] = (-cfg.omega_d**2) ** m
    kern *= cfg.gamma0 * cfg.omega_d**2 / math.pi
    fourier = _fourier_tail(times, w, 2 * order + 3)

    def integrate(coeffs, oscillating):
        total = np.zeros(nt)
        last = np.zeros(nt)
        for n in range(order + 1):
            for m in np.nonzero(kern)[0]:
                k = n + m
                if k < 2 or k > order + 1:
                    continue
                base = fourier[k] if oscillating else w ** (1 - k) / (k - 1)
                term = (kern[m] * coeffs[n] * base).real
                total += term
                if k == order + 1:
                    last += np.abs(term)
        return total, last

    rows, errs = [], []
    for u, v in ((0, 0), (0, 1), (1, 1), (0, 2)):
        pu, pv, qu, qv = p_ser[u], p_ser[v], q_ser[u], q_ser[v]
        flat = product(pu, pv * flip[:, None]) + product(qu, qv * flip[:, None])
        osc = product(pu, qv * flip[:, None]) + product(pv, qu * flip[:, None])
        f_val, f_err = integrate(flat, False)
        o_val, o_err = integrate(osc, True)
        rows.append(f_val - o_val)
        errs.append(f_err + o_err)
    return np.array(rows), np.array(errs)


def thermal_moments(poles: PoleSet, cfg: SystemConfig, times, quad: QuadSettings = DEFAULT_QUAD) -> np.ndarray:
    """Thermal moment rows (a_th, b_th, c_th, x_pdot) at each time; shape (4, nt).

    ``x_pdot`` is the symmetrized noise correlation of position with the time
    derivative of momentum; it enters the second derivative of a_th as
    a_th'' = 2 c_th + 2 x_pdot.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros((4, times.size))
    live = times > 0
    if not live.any():
        return out
    ts = times[live]
    integrand = QuadratureIntegrand(cfg, poles)
    w = _window(cfg, poles, quad)
    for attempt in range(quad.max_widenings + 1):
        marks = sorted({cfg.omega_d, *np.abs(poles.coupled_poles.imag)} - {0.0})
        marks = [m for m in marks if 0 < m < w]
        res, err, info = quad_vec(
            lambda om: integrand.moments(om, ts), 0.0, w,
            epsrel=quad.epsrel, epsabs=quad.epsabs, limit=quad.limit,
            points=marks or None, full_output=True,
        )
        if not info.success:
            raise QuadratureFailure(
                f"adaptive quadrature did not converge ({info.status}); estimated error {err:.3e}")
        tail, tail_err = _tail(cfg, poles, ts, w, quad.tail_order)
        bound = max(quad.epsabs, 100 * quad.epsrel * np.abs(res).max())
        if tail_err.max() <= bound:
            break
        w *= 4.0
    else:
        raise QuadratureFailure(f"asymptotic tail not converged (bound {tail_err.max():.3e} > {bound:.3e})")
    out[:, live] = res + tail
    return out


@lru_cache(maxsize=65536)
def _thermal_cached(gamma0: float, omega_d: float, alpha_bar_sq: float, temp: float,
                    t: float, quad: QuadSettings) -> tuple:
    # thermal moments depend on the couplings only through alpha_bar^2
    cfg = SystemConfig(1, (math.sqrt(alpha_bar_sq),), gamma0, omega_d, temp, 0.0)
    poles = solve_poles(derive_constants(cfg), cfg)
    return tuple(thermal_moments(poles, cfg, [t], quad)[:, 0])


def _thermal_point(cfg: SystemConfig, t: float, quad: QuadSettings) -> np.ndarray:
    ab2 = math.fsum(a * a for a in cfg.alphas)
    return np.array(_thermal_cached(cfg.gamma0, cfg.omega_d, ab2, cfg.temp_reservoir, float(t), quad))


def clear_cache() -> None:
    _thermal_cached.cache_clear()


def thermal_block(poles: PoleSet, cfg: SystemConfig, t: float, quad: QuadSettings = DEFAULT_QUAD):
    """(a_th, b_th, c_th) at a single time; memoized."""
    if t < 0:
        raise ValidationError("time must be >= 0", field="t", module="covariance")
    m = _thermal_point(cfg, t, quad)
    return float(m[XX]), float(m[XP]), float(m[PP])


# -- homogeneous part ------------------------------------------------------------

def _a_derivs(poles: PoleSet, t):
    return [eval_A(poles, t, k) for k in range(4)]


def homogeneous_block(poles: PoleSet, dc: DerivedConstants, t):
    """(a_h, b_h, c_h): closed form in A and its derivatives. Vectorized over t."""
    A, A1, A2, _ = _a_derivs(poles, t)
    half_c, ab2 = 0.5 * dc.c_t0, dc.alpha_bar_sq
    a_h = half_c * (ab2 * (A1 * A1 + A * A) - 1.0 / ab2)
    b_h = half_c * ab2 * A1 * (A2 + A)
    c_h = half_c * (ab2 * (A2 * A2 + A1 * A1) - 1.0 / ab2)
    # at t = 0 the bracket cancels exactly; remove rounding residue
    at_zero = np.asarray(t) == 0
    return tuple(np.where(at_zero, 0.0, x)[()] for x in (a_h, b_h, c_h))


def homogeneous_a_derivatives(poles: PoleSet, dc: DerivedConstants, t):
    """(d a_h/dt, d^2 a_h/dt^2) from the symbolic derivative of a_h."""
    A, A1, A2, A3 = _a_derivs(poles, t)
    k = dc.c_t0 * dc.alpha_bar_sq
    return k * A1 * (A2 + A), k * (A2 * (A2 + A) + A1 * (A3 + A1))


# -- assembled blocks ----------------------------------------------------------------

@dataclass(frozen=True)
class BMBlock:
    t: float
    a: float
    b: float
    c: float
    a_dot: float
    a_ddot: float
    c_t0: float
    alpha_bar_sq: float
    # split into homogeneous and thermal parts, kept for diagnostics
    parts: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def trace_T(self) -> float:
        return self.a + self.c

    @property
    def delta(self) -> float:
        return self.a * self.c - self.b * self.b

    def matrix(self) -> np.ndarray:
        h, k = 0.5 * self.c_t0, self.alpha_bar_sq
        return np.array([[h + k * self.a, k * self.b], [k * self.b, h + k * self.c]])


def bm_block(cfg: SystemConfig, dc: DerivedConstants, poles: PoleSet, t: float,
             quad: QuadSettings = DEFAULT_QUAD) -> BMBlock:
    if t < 0:
        raise ValidationError("time must be >= 0", field="t", module="covariance")
    a_h, b_h, c_h = homogeneous_block(poles, dc, t)
    ad_h, add_h = homogeneous_a_derivatives(poles, dc, t)
    th = _thermal_point(cfg, t, quad)
    a_th, b_th, c_th = th[XX], th[XP], th[PP]
    add_th = 2.0 * c_th + 2.0 * th[X_PDOT]
    return BMBlock(
        t=float(t),
        a=float(a_h + a_th), b=float(b_h + b_th), c=float(c_h + c_th),
        a_dot=float(ad_h + 2.0 * b_th),
        a_ddot=float(add_h + add_th),
        c_t0=dc.c_t0,
        alpha_bar_sq=dc.alpha_bar_sq,
        parts=dict(a_h=a_h, b_h=b_h, c_h=c_h, a_th=a_th, b_th=b_th, c_th=c_th),
    )


def energy_trace_scan(cfg: SystemConfig, dc: DerivedConstants, poles: PoleSet, times,
                      quad: QuadSettings = DEFAULT_QUAD) -> np.ndarray:
    """a(t) + c(t) on a whole time grid with a single vectorized quadrature."""
    times = np.asarray(times, dtype=float)
    a_h, _, c_h = homogeneous_block(poles, dc, times)
    th = thermal_moments(poles, cfg, times, quad)
    return a_h + c_h + th[XX] + th[PP]


@dataclass(frozen=True)
class GlobalCM:
    bm_block: BMBlock
    n_cells: int

    @property
    def dm_value(self) -> float:
        return 0.5 * self.bm_block.c_t0

    def matrix(self) -> np.ndarray:
        n = self.n_cells
        out = np.eye(2 * n) * self.dm_value
        out[:2, :2] = self.bm_block.matrix()
        return out


def global_cm(bm: BMBlock, n_cells: int) -> GlobalCM:
    return GlobalCM(bm, n_cells)


def nu1_explicit(c_t0: float, alpha_bar_sq: float, trace_T: float, delta: float) -> float:
    """Bright-mode symplectic eigenvalue in the trace/determinant form."""
    arg = c_t0**2 + 2 * alpha_bar_sq * (c_t0 * trace_T + 2 * alpha_bar_sq * delta)
    return 0.5 * math.sqrt(max(arg, 0.0))


def symplectic_spectrum(gcm: GlobalCM) -> np.ndarray:
    bm = gcm.bm_block
    det = float(np.linalg.det(bm.matrix()))
    nu_det = math.sqrt(max(det, 0.0))
    nu_exp = nu1_explicit(bm.c_t0, bm.alpha_bar_sq, bm.trace_T, bm.delta)
    if abs(nu_det - nu_exp) > 1e-12 * max(1.0, nu_exp):
        raise AssertionError(f"nu1 forms disagree: {nu_det!r} vs {nu_exp!r}")
    if nu_exp < 0.5 - 1e-6:
        raise PhysicalityViolation(f"symplectic eigenvalue {nu_exp:.9g} < 1/2 at t={bm.t}")
    return np.array([nu_exp] + [gcm.dm_value] * (gcm.n_cells - 1))


def local_block_spectrum(cfg: SystemConfig, bm: BMBlock, l: int) -> float:
    """Symplectic eigenvalue of cell ``l`` (0-based) alone."""
    if not 0 <= l < cfg.n_cells:
        raise ValidationError(f"index {l} out of range 0..{cfg.n_cells - 1}", field="l", module="covariance")
    return nu1_explicit(bm.c_t0, cfg.alphas[l] ** 2, bm.trace_T, bm.delta)


def local_covariance(cfg: SystemConfig, bm: BMBlock) -> np.ndarray:
    """Full 2N x 2N covariance in the local (Q1, P1, ..., QN, PN) ordering."""
    al = cfg.alpha_array
    inner = np.array([[bm.a, bm.b], [bm.b, bm.c]])
    return 0.5 * bm.c_t0 * np.eye(2 * cfg.n_cells) + np.kron(np.outer(al, al), inner)


def householder_basis(cfg: SystemConfig) -> np.ndarray:
    """Orthogonal N x N reflector whose first row is the normalized coupling vector.

    Rows map local cells to (bright, dark_2, ..., dark_N) collective modes.
    """
    al = cfg.alpha_array
    a_hat = al / np.linalg.norm(al)
    e1 = np.zeros_like(a_hat)
    e1[0] = 1.0
    v = a_hat - e1
    vv = float(v @ v)
    if vv < 1e-30:
        raise DegenerateDirection("coupling vector already along e1; reflector is the identity")
    return np.eye(cfg.n_cells) - 2.0 * np.outer(v, v) / vv


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(sigma: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a (Q1, P1, ...)-ordered covariance, ascending."""
    n = sigma.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ sigma))
    return np.sort(ev)[::2]
