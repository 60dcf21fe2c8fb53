"""
Limiting distribution of the coherent walk and empirical time averages.

The time average P̄(x, y, T) = (1/T) sum_{t<T} P(x, y, t) converges to

    π(x, y) = sum_λ sum_coin | sum_{i: λ_i = λ} a_i ν_i(coin, x, y) |²,

where a_i are the coefficients of the initial state in the eigenbasis of U
and the outer sum runs over distinct eigenvalues. Projecting onto whole
eigenspaces makes the result independent of the basis chosen inside
degenerate eigenspaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from .evolution import CoinLike, iterate_probabilities
from .lattice import Distribution, LatticeGeometry, WalkState, NORM_TOL
from .spectral import EigenSystem, build_eigensystem, decompose, eigenvalue_classes

__all__ = [
    "SpectralDecomposition",
    "spectral_decomposition",
    "limiting_distribution",
    "average_distribution",
    "limiting_closed_form_origin",
    "peak_count",
    "peak_locations",
    "PEAK_REL_HEIGHT",
]

# classes larger than this are summed with one FFT each instead of pairwise
_PAIRWISE_MAX = 64
_COEFF_FLOOR = 1e-14


@dataclass
class SpectralDecomposition:
    """Initial state expanded in the eigenbasis of U.

    Entry i is the eigenvector ``vectors[i]`` ⊗ |modes[i]> with eigenvalue
    ``eigenvalues[i]`` and coefficient ``coefficients[i]``; entries sharing
    ``class_index`` have the same eigenvalue.
    """

    geometry: LatticeGeometry
    eigenvalues: NDArray[np.complex128]
    coefficients: NDArray[np.complex128]
    modes: NDArray[np.int64]
    vectors: NDArray[np.complex128]
    class_index: NDArray[np.int64]

    def weight(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


def spectral_decomposition(
    initial: WalkState, eigensystem: Optional[EigenSystem] = None
) -> SpectralDecomposition:
    geometry = initial.geometry
    if eigensystem is None:
        eigensystem = build_eigensystem(geometry)
    side = geometry.side
    coeffs = decompose(initial, eigensystem).reshape(-1)
    lam = eigensystem.eigenvalues.reshape(-1)
    classes, _ = eigenvalue_classes(lam)
    kx, ky, _ = np.meshgrid(np.arange(side), np.arange(side), np.arange(4), indexing="ij")
    modes = np.stack([kx.ravel(), ky.ravel()], axis=-1)
    vectors = np.moveaxis(eigensystem.eigenvectors, -1, -2).reshape(-1, 4)
    return SpectralDecomposition(geometry, lam, coeffs, modes, vectors, classes)


def _class_sum(dec: SpectralDecomposition) -> NDArray[np.float64]:
    side = dec.geometry.side
    keep = np.abs(dec.coefficients) > _COEFF_FLOOR
    b = dec.coefficients[keep, None] * dec.vectors[keep]
    modes = dec.modes[keep]
    cls = dec.class_index[keep]
    order = np.argsort(cls, kind="stable")
    b, modes, cls = b[order], modes[order], cls[order]
    starts = np.flatnonzero(np.concatenate([[True], cls[1:] != cls[:-1]]))
    sizes = np.diff(np.concatenate([starts, [cls.size]]))

    pi = np.zeros((side, side))
    small = np.zeros(cls.size, dtype=bool)
    for s, n in zip(starts, sizes):
        if n > _PAIRWISE_MAX:
            phat = np.zeros((side, side, 4), dtype=np.complex128)
            np.add.at(phat, (modes[s:s + n, 0], modes[s:s + n, 1]), b[s:s + n])
            field = np.fft.ifft2(np.moveaxis(phat, -1, 0), axes=(1, 2)) * side
            pi += np.sum(np.abs(field) ** 2, axis=0) / side ** 2
        else:
            small[s:s + n] = True

    # remaining classes: |sum_m b_m e_m|^2 = (1/N) sum_{m,m'} <b_m', b_m> ω^{(k_m - k_m')·x}
    idx = np.flatnonzero(small)
    if idx.size:
        group_of = np.repeat(np.arange(starts.size), sizes)[idx]
        n_i = sizes[group_of]
        left = np.repeat(idx, n_i)
        block_start = np.repeat(np.cumsum(n_i) - n_i, n_i)
        right = np.arange(left.size) - block_start + np.repeat(starts[group_of], n_i)
        overlap = np.einsum("pc,pc->p", b[right].conj(), b[left])
        q = (modes[left] - modes[right]) % side
        fourier = np.zeros((side, side), dtype=np.complex128)
        np.add.at(fourier, (q[:, 0], q[:, 1]), overlap)
        pi += np.fft.ifft2(fourier).real
    return pi


def limiting_distribution(
    geometry: LatticeGeometry,
    initial: WalkState,
    eigensystem: Optional[EigenSystem] = None,
) -> Distribution:
    """Exact limiting distribution of the Grover walk on an odd-sided torus.

    Raises ValueError for even sides (use :func:`average_distribution`) and
    for unnormalized initial states.
    """
    if not geometry.is_odd:
        raise ValueError(
            f"the analytic limiting distribution is only supported for odd sides (got {geometry.side})"
        )
    if initial.geometry != geometry:
        raise ValueError("initial state lives on a different lattice")
    initial.check_normalized()
    dec = spectral_decomposition(initial, eigensystem)
    if abs(dec.weight() - 1.0) > NORM_TOL:
        raise ValueError(f"eigen-decomposition is incomplete: weight {dec.weight()!r}")
    pi = _class_sum(dec)
    # roundoff can leave entries at -1e-18
    return Distribution(geometry, np.clip(pi, 0.0, None))


def average_distribution(
    geometry: LatticeGeometry, coin: CoinLike, initial: WalkState, T: int
) -> Distribution:
    """P̄(T) = (1/T) sum_{t=0}^{T-1} P_t, including the initial distribution."""
    if T < 1:
        raise ValueError(f"T must be >= 1 (got {T})")
    if initial.geometry != geometry:
        raise ValueError("initial state lives on a different lattice")
    total = np.zeros((geometry.side, geometry.side))
    for p in iterate_probabilities(initial, coin, T - 1):
        total += p
    return Distribution(geometry, total / T)


def limiting_closed_form_origin(
    geometry: LatticeGeometry, exact: bool = False
) -> Union[float, Fraction]:
    """π(0, 0) = (4N − 8√N + 5) / N² for the walk started at the origin.

    Only valid for odd sides; ``exact=True`` returns a Fraction.
    """
    if not geometry.is_odd:
        raise ValueError(f"closed form holds only for odd sides (got {geometry.side})")
    n, side = geometry.vertices, geometry.side
    value = Fraction(4 * n - 8 * side + 5, n * n)
    return value if exact else float(value)


PEAK_REL_HEIGHT = 0.5


def peak_locations(dist: Distribution, rel_height: float = PEAK_REL_HEIGHT) -> list[tuple[int, int]]:
    """Vertices strictly larger than all four torus neighbours and at least
    ``rel_height`` times the global maximum.

    The limiting distributions carry ridges along the lattice diagonals that
    produce many tiny strict local maxima; the half-maximum threshold keeps
    only the dominant peaks. ``rel_height=0`` counts every strict local
    maximum.
    """
    p = dist.probabilities
    strict = p >= rel_height * p.max()
    for shift, axis in ((1, 0), (-1, 0), (1, 1), (-1, 1)):
        strict &= p > np.roll(p, shift, axis=axis)
    return [(int(x), int(y)) for x, y in zip(*np.nonzero(strict))]


def peak_count(dist: Distribution, rel_height: float = PEAK_REL_HEIGHT) -> int:
    return len(peak_locations(dist, rel_height))
