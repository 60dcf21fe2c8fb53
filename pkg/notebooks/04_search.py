"""
Spatial search with a marked vertex
===================================

The coin at the marked vertex is replaced by -I and the walk starts from
the uniform superposition. Probability builds up at the target and peaks
after O(sqrt(N log N)) steps at height O(1/log N).
"""

import numpy as np

from toruswalk.evolution import MarkedCoinSpec, evolve
from toruswalk.lattice import LatticeGeometry, make_global_uniform, measure
from toruswalk.search import run_search, search_scaling, stationary_reference_marked

g = LatticeGeometry(41)
run = run_search(g, (0, 0), 600)
print("first maximum at t =", run.first_max_step, "with p =", round(run.first_max_probability, 5))
print("p_marked around the peak:", np.round(run.trace[70:91:5], 4))

# the snapshot at t* and the long-time average look alike
snap = measure(evolve(make_global_uniform(g), MarkedCoinSpec(g, (0, 0)), run.first_max_step))
ref = stationary_reference_marked(g, (0, 0), 10_000)
print("snapshot p(0,0) %.4f, time average p(0,0) %.4f, uniform %.6f" % (snap[0, 0], ref[0, 0], 1 / g.vertices))

sc = search_scaling(range(11, 102, 10))
for r in sc.runs:
    print(f"side {r.side:3d}  t* {r.first_max_step:4d}  p* {r.first_max_probability:.4f}  p* ln N {sc.success_scaled[r.side]:.3f}")
fit = sc.first_max_fit
print(f"t* = {fit['slope']:.3f} sqrt(N ln N) + {fit['intercept']:.1f}, R^2 {fit.r_squared:.4f}")
