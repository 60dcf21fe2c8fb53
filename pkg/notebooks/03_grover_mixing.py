"""
Mixing of the Grover walk
=========================

Distance of the running average to the limiting distribution, the
averaging bound, and the growth of M_eps with lattice size. The sweep at
the end takes about half a minute.
"""

import numpy as np

from toruswalk.evolution import grover_coin
from toruswalk.lattice import LatticeGeometry, make_localized_uniform_coin
from toruswalk.limiting import limiting_distribution
from toruswalk.mixing import (
    aharonov_bound,
    classical_mixing_baseline,
    mixing_time,
    scaling_sweep,
)
from toruswalk.spectral import build_eigensystem

g = LatticeGeometry(41)
start = make_localized_uniform_coin(g)
pi = limiting_distribution(g, start)
res = mixing_time(g, grover_coin(), start, pi, epsilon=0.3, horizon=10_000)
tr = res.trace
print("M_0.3 =", res.average_mixing_time, " I_0.3 =", res.instantaneous_mixing_time)
for t in (10, 100, 1000, 10_000):
    print(f"t={t:6d}  to pi {tr.average[t - 1]:.4f}  t*d {t * tr.average[t - 1]:7.2f}  to uniform {tr.average_to_uniform[t - 1]:.4f}")

# the bound is valid but loose; for side 41 the gap is tiny
bound = aharonov_bound(g, build_eigensystem(g).gap, tr.t)
print("bound / measured at t=1e4:", bound[-1] / tr.average[-1])

sweep = scaling_sweep(range(21, 102, 10), [0.1, 0.2, 0.3, 0.4, 0.5])
for eps, fit in sweep.size_fits.items():
    print(f"eps={eps}: M = {fit['slope']:.3f} sqrt(N ln N) + {fit['intercept']:.1f}   R^2 {fit.r_squared:.4f}")
print("joint exponent c = %.3f" % sweep.joint_fit["exponent"])
print("per-side c:", {s: round(f["exponent"], 3) for s, f in sweep.epsilon_fits.items()})

records, fit = classical_mixing_baseline(range(5, 42, 4), 0.1)
print("classical t_mix ~ N^%.3f" % fit["exponent"], [r.outputs["t_mix"] for r in records])
quantum = [r.outputs["M_eps"] for r in sweep.records if r.parameters["epsilon"] == 0.1]
print("quantum M_0.1:", dict(zip(range(21, 102, 10), quantum)))
