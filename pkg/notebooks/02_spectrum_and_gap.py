"""
Spectrum of the reduced operators and the eigenvalue gap
========================================================

Each Fourier mode contributes a 4x4 block with eigenvalues 1, -1 and
exp(+-i theta). The gap that enters the averaging bound is the smallest
distance between distinct eigenvalues anywhere on the circle.
"""

import numpy as np

from toruswalk.fitting import fit_power_law
from toruswalk.lattice import LatticeGeometry
from toruswalk.spectral import EIGEN_TOL, asymptotic_gap, build_eigensystem

es = build_eigensystem(LatticeGeometry(41))
print("blocks diagonalized in closed form:", es.closed_form.all())
print("largest eigenpair residual:", max(es.block(kx, 0).residuals().max() for kx in range(41)))

# near lambda = 1 the spacing is set by the smallest momentum:
# theta(1, 0) ~ sqrt(2) pi / sqrt(N)
rows = []
for side in range(5, 102, 8):
    g = LatticeGeometry(side)
    es = build_eigensystem(g)
    lam = es.eigenvalues.ravel()
    near_one = np.abs(lam[np.abs(lam - 1) > EIGEN_TOL] - 1).min()
    rows.append((side, es.gap, near_one, asymptotic_gap(g, (1, 0), (0, 0))))
    print(f"side {side:3d}  global gap {es.gap:.3e}  spacing at 1 {near_one:.3e}  sqrt2*pi/side {rows[-1][3]:.3e}")

side, gap, near, _ = map(np.array, zip(*rows))
print("global gap   ~ N^%.2f" % fit_power_law(side ** 2, gap)["exponent"])
print("spacing at 1 ~ N^%.2f" % fit_power_law(side ** 2, near)["exponent"])

# the global minimum comes from two unrelated modes whose theta almost
# coincide, which the small-momentum formula does not describe
g = LatticeGeometry(101)
es = build_eigensystem(g)
a, b = es.gap_pair()
print("side 101 gap pair:", [int(i) for i in a], [int(i) for i in b], "gap %.3e" % es.gap,
      "formula %.3e" % asymptotic_gap(g, a[:2], b[:2]))
