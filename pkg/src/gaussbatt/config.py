"""Physical parameters of the battery/reservoir model.

Natural units throughout: hbar = k_B = m = omega_0 = 1. Energies are in
units of hbar*omega_0, times in 1/omega_0, temperatures in hbar*omega_0/k_B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

# Below this T0 the Bose occupation is exp(-1e8): coth is 1 to machine precision.
_T_COLD = 1e-8
# Above this T0 the two-term Laurent series matches coth to ~1e-16 relative.
_T_HOT = 1e4


def coth_half_inverse(temperature: float) -> float:
    """coth(1/(2T)), the thermal variance factor of a unit-frequency mode."""
    if temperature < _T_COLD:
        return 1.0
    if temperature > _T_HOT:
        return 2.0 * temperature + 1.0 / (6.0 * temperature)
    return 1.0 / math.tanh(0.5 / temperature)


def _finite_nonneg(name: str, value: float, strict: bool = False) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"expected a number, got {value!r}", field=name) from None
    if not math.isfinite(value):
        raise ValidationError("must be finite", field=name)
    if strict and value <= 0:
        raise ValidationError(f"must be > 0, got {value}", field=name)
    if value < 0:
        raise ValidationError(f"must be >= 0, got {value}", field=name)
    return value


@dataclass(frozen=True)
class SystemConfig:
    """N identical unit oscillators coupled with weights ``alphas`` to a Drude bath.

    ``alphas`` may be given as the string ``"uniform"``, which expands to N ones.
    """

    n_cells: int
    alphas: tuple[float, ...] | str = "uniform"
    gamma0: float = 5.0
    omega_d: float = 2.0
    temp_reservoir: float = 0.5
    temp_battery: float = 0.5

    def __post_init__(self):
        n = self.n_cells
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ValidationError(f"must be a positive integer, got {n!r}", field="n_cells")
        object.__setattr__(self, "n_cells", int(n))
        alphas = self.alphas
        if isinstance(alphas, str):
            if alphas != "uniform":
                raise ValidationError(f"unknown keyword {alphas!r}", field="alphas")
            alphas = (1.0,) * n
        try:
            alphas = tuple(float(a) for a in alphas)
        except (TypeError, ValueError):
            raise ValidationError("must be a list of numbers or 'uniform'", field="alphas") from None
        if len(alphas) != n:
            raise ValidationError(f"expected {n} entries, got {len(alphas)}", field="alphas")
        if not all(math.isfinite(a) for a in alphas):
            raise ValidationError("entries must be finite", field="alphas")
        if not any(a != 0.0 for a in alphas):
            raise ValidationError("at least one coupling must be nonzero", field="alphas")
        object.__setattr__(self, "alphas", alphas)
        for name, strict in (("gamma0", True), ("omega_d", True),
                             ("temp_reservoir", False), ("temp_battery", False)):
            object.__setattr__(self, name, _finite_nonneg(name, getattr(self, name), strict))

    @property
    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alphas, dtype=float)

    def replace(self, **changes) -> "SystemConfig":
        kw = dict(n_cells=self.n_cells, alphas=self.alphas, gamma0=self.gamma0,
                  omega_d=self.omega_d, temp_reservoir=self.temp_reservoir,
                  temp_battery=self.temp_battery)
        if "n_cells" in changes and "alphas" not in changes:
            if all(a == 1.0 for a in self.alphas):
                kw["alphas"] = "uniform"
        kw.update(changes)
        return SystemConfig(**kw)

    def key(self) -> tuple:
        """Hashable identity used for memoization."""
        return (self.n_cells, self.alphas, self.gamma0, self.omega_d,
                self.temp_reservoir, self.temp_battery)


@dataclass(frozen=True)
class DerivedConstants:
    alpha_bar: float
    omega0_coupling: float
    omega_n: float
    tau: float
    c_t0: float
    # squares kept separately so they are exact sums, not re-squared roots
    alpha_bar_sq: float
    omega0_sq: float
    n_cells: int = 1


def derive_constants(cfg: SystemConfig) -> DerivedConstants:
    alpha_bar_sq = math.fsum(a * a for a in cfg.alphas)
    omega0_sq = cfg.gamma0 * cfg.omega_d
    omega_n = math.sqrt(alpha_bar_sq * omega0_sq)
    return DerivedConstants(
        alpha_bar=math.sqrt(alpha_bar_sq),
        omega0_coupling=math.sqrt(omega0_sq),
        omega_n=omega_n,
        tau=math.pi / omega_n,
        c_t0=coth_half_inverse(cfg.temp_battery),
        alpha_bar_sq=alpha_bar_sq,
        omega0_sq=omega0_sq,
        n_cells=cfg.n_cells,
    )


def uniform_config(n_cells: int, gamma0: float, omega_d: float, T: float, T0: float) -> SystemConfig:
    return SystemConfig(n_cells, "uniform", gamma0, omega_d, T, T0)


def config_from_dict(doc: dict) -> SystemConfig:
    """Build a config from the JSON document layout used by the CLI."""
    missing = [k for k in ("n_cells", "gamma0", "omega_d") if k not in doc]
    if missing:
        raise ValidationError(f"missing keys {missing}", field="config")
    return SystemConfig(
        n_cells=doc["n_cells"],
        alphas=doc.get("alphas", "uniform"),
        gamma0=doc["gamma0"],
        omega_d=doc["omega_d"],
        temp_reservoir=doc.get("T", 0.5),
        temp_battery=doc.get("T0", 0.5),
    )

