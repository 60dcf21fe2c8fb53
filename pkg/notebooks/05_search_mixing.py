"""
Mixing of the search walk
=========================

The marked walk is measured against its own long-time average. Its
distance trace oscillates, dipping each time the probability refocuses on
the target, while the unmarked walk decays smoothly. Takes about a minute.
"""

from toruswalk.lattice import LatticeGeometry
from toruswalk.mixing import scaling_sweep
from toruswalk.search import search_mixing_comparison, sub_band_minima

rep = search_mixing_comparison(LatticeGeometry(41), (0, 0), epsilon=0.1)
print("M_0.1 =", rep.mixing_time, " t* =", rep.first_max_step, " ratio", rep.ratio)
print("sub-band minima: marked", rep.marked_minima, " grover", rep.grover_minima)
print("first few dips:", sub_band_minima(rep.marked_trace.average, 41)[:8] + 1)

# small lattices are different: the unmarked trace oscillates as well
for side in (11, 21, 31):
    r = search_mixing_comparison(LatticeGeometry(side), (0, 0), 0.1, T_max=4000, reference_steps=4000)
    print(f"side {side}: marked {r.marked_minima}, grover {r.grover_minima}")

sweep = scaling_sweep(range(21, 102, 10), [0.1, 0.2, 0.3], coin_kind="marked")
for eps, fit in sweep.size_fits.items():
    print(f"eps={eps}: slope {fit['slope']:.3f}  R^2 {fit.r_squared:.4f}")
for r in sweep.records:
    if r.parameters["epsilon"] == 0.1:
        print(r.parameters["side"], r.outputs["M_eps"])
