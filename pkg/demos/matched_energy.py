"""Two baths, same stored energy: which one leaves more work extractable?

The first pair is the Table I setting.  The second uses the Fig. 3 pair at
a temperature where their stored energies agree, found by root search.
"""

from __future__ import annotations

from scipy.optimize import brentq

from gaussbatt import snapshot, t_star, uniform_config


def at_t_star(gamma0, omega_d, T, T0, n=6):
    cfg = uniform_config(n, gamma0, omega_d, T=T, T0=T0)
    return snapshot(cfg, t_star(cfg))


def show(title, a, b):
    print(title)
    for name, d in (("A", a), ("B", b)):
        print(f"  {name}: E_B={d.energy.e_b:.3f} eta_glob={d.energy.eta_glob:.4f} "
              f"eta_th={d.thermo.eta_th:.3f} lambda-={d.squeeze.lambda_minus:.3f} "
              f"logneg={d.squeeze.log_neg:.3f} {d.regime}")


show("Table I pair, T=0.01, T0=1",
     at_t_star(0.528, 7.344, 0.01, 1.0), at_t_star(1.571, 0.922, 0.01, 1.0))

T0 = 2.0
gap = lambda T: at_t_star(0.99, 12.5, T, T0).energy.e_b - at_t_star(1.63, 3.49, T, T0).energy.e_b
T = brentq(gap, 1.0, 4.0, xtol=1e-8)
show(f"Fig. 3 pair at matched energy, T={T:.4f}, T0={T0}",
     at_t_star(0.99, 12.5, T, T0), at_t_star(1.63, 3.49, T, T0))
