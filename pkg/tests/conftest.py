import numpy as np
import pytest
import scipy.linalg

from toruswalk.lattice import LatticeGeometry


def dense_walk_operator(side, marked=None):
    """Explicit 4N×4N matrix of U = S (C ⊗ I), assembled entry by entry.

    Basis index: coin * N + x * side + y with coin = 2 d + s.
    """
    n = side * side
    g = np.full((4, 4), 0.5) - np.eye(4)
    coin = np.zeros((4 * n, 4 * n))
    for x in range(side):
        for y in range(side):
            v = x * side + y
            local = -np.eye(4) if marked == (x, y) else g
            for a in range(4):
                for b in range(4):
                    coin[a * n + v, b * n + v] = local[a, b]
    shift = np.zeros((4 * n, 4 * n))
    for d in (0, 1):
        for s in (0, 1):
            sign = 1 if s == 0 else -1
            for x in range(side):
                for y in range(side):
                    nx = (x + sign * (d == 0)) % side
                    ny = (y + sign * (d == 1)) % side
                    src = (2 * d + s) * n + x * side + y
                    dst = (2 * d + (1 - s)) * n + nx * side + ny
                    shift[dst, src] = 1.0
    return shift @ coin


def dense_limiting_distribution(side, psi0, tol=1e-9):
    """π from a Schur decomposition of the dense operator, grouping eigenvalues by distance."""
    u = dense_walk_operator(side)
    t, z = scipy.linalg.schur(u.astype(complex), output="complex")
    lam = np.diag(t)
    coeffs = z.conj().T @ psi0.reshape(-1)
    n = side * side
    unassigned = list(range(lam.size))
    pi = np.zeros(n)
    while unassigned:
        i = unassigned[0]
        group = [j for j in unassigned if abs(lam[j] - lam[i]) < tol]
        unassigned = [j for j in unassigned if j not in group]
        field = z[:, group] @ coeffs[group]
        pi += (np.abs(field.reshape(4, n)) ** 2).sum(axis=0)
    return pi.reshape(side, side)


def brute_force_gap(eigenvalues, tol=1e-9):
    lam = np.asarray(eigenvalues).ravel()
    d = np.abs(lam[:, None] - lam[None, :])
    return d[d > tol].min()


@pytest.fixture(params=[3, 5, 7])
def odd_geometry(request):
    return LatticeGeometry(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_state_amplitudes(rng, side):
    a = rng.normal(size=(4, side, side)) + 1j * rng.normal(size=(4, side, side))
    return a / np.linalg.norm(a)
