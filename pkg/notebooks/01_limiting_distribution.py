"""
Limiting distribution of the Grover walk
========================================

The walk starts with the uniform coin state on one vertex. Because the
evolution is unitary the instantaneous distribution never settles, but
its running time average does. On odd lattices the limit can be written
down exactly from the Fourier decomposition.
"""

import numpy as np

from toruswalk.evolution import grover_coin
from toruswalk.lattice import LatticeGeometry, make_localized_uniform_coin, total_variation
from toruswalk.limiting import (
    average_distribution,
    limiting_closed_form_origin,
    limiting_distribution,
    peak_count,
    peak_locations,
)

# exact limit on the 41 x 41 torus, started at the centre
g = LatticeGeometry(41)
start = make_localized_uniform_coin(g, 20, 20)
pi = limiting_distribution(g, start)
p = pi.probabilities
print("argmax:", tuple(int(i) for i in np.unravel_index(np.argmax(p), p.shape)))
print("dominant peaks:", peak_locations(pi))

# the value at the start site has a closed form, (4N - 8 sqrt(N) + 5) / N^2
for side in (3, 5, 11, 41, 101):
    geom = LatticeGeometry(side)
    exact = limiting_closed_form_origin(geom, exact=True)
    numeric = limiting_distribution(geom, make_localized_uniform_coin(geom))[0, 0]
    print(f"side {side:3d}: closed form {exact} = {float(exact):.6e}, spectral {numeric:.6e}, N*pi = {geom.vertices * numeric:.4f}")

# a finite average approaches the limit roughly as 1/T
g5 = LatticeGeometry(5)
s5 = make_localized_uniform_coin(g5)
pi5 = limiting_distribution(g5, s5)
for T in (100, 1000, 10_000):
    avg = average_distribution(g5, grover_coin(), s5, T)
    print(f"T={T:6d}  ||P_avg - pi|| = {total_variation(avg, pi5):.3e}")

# even lattices: no closed form here, and the average shows a second peak
# at the antipode (side/2, side/2)
g40 = LatticeGeometry(40)
avg40 = average_distribution(g40, grover_coin(), make_localized_uniform_coin(g40), 10_000)
print("side 40 peaks:", peak_locations(avg40), "count", peak_count(avg40))
