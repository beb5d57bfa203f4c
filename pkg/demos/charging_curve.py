"""Stored energy over two charging periods for N = 6, 12, 18.

Prints where the largest maximum sits in units of tau and the power at
that time, then the log-log slopes across the three sizes.
"""

from __future__ import annotations

import numpy as np

from gaussbatt import derive_constants, snapshot, t_star, uniform_config

sizes = (6, 12, 18)
e_star, p_star = [], []
for n in sizes:
    cfg = uniform_config(n, gamma0=5.0, omega_d=2.0, T=0.5, T0=0.5)
    tau = derive_constants(cfg).tau
    grid = np.linspace(0.0, 2.0, 81)
    e_b = np.array([snapshot(cfg, f * tau).energy.e_b for f in grid])
    ts = t_star(cfg)
    d = snapshot(cfg, ts)
    e_star.append(d.energy.e_b)
    p_star.append(d.energy.e_b / ts)
    print(f"N={n:2d}  coarse peak at t/tau={grid[e_b.argmax()]:.3f}  "
          f"t*/tau={ts / tau:.3f}  E_B={d.energy.e_b:.3f}  P={p_star[-1]:.2f}  "
          f"eta_glob={d.energy.eta_glob:.3f}  regime={d.regime}")

log_n = np.log(sizes)
print("slope of E_B vs N:", np.polyfit(log_n, np.log(e_star), 1)[0].round(3))
print("slope of P vs N:  ", np.polyfit(log_n, np.log(p_star), 1)[0].round(3))
