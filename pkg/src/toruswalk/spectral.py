"""
Momentum-space solution of the Grover walk on the torus.

In the plane-wave basis |kx, ky> = N^{-1/2} sum_{x,y} ω^{x kx + y ky} |x, y>,
with ω = exp(2πi/√N), the evolution operator is block diagonal. Each block
is the 4×4 reduced operator

    G̃[(d,s), (d',s')] = ω^{(-1)^s (δ_d0 kx + δ_d1 ky)} G[(d, s⊕1), (d',s')]

whose eigenvalues are {+1, −1, e^{iθ}, e^{−iθ}} for (kx, ky) ≠ (0, 0), with

    cos θ = [cos(2π kx/√N) + cos(2π ky/√N)] / 2.

Closed-form eigenvectors are used wherever their normalizing denominators
are well away from zero. Blocks where a denominator vanishes (θ = π on even
lattices) are diagonalized numerically with a complex Schur decomposition,
which returns an orthonormal basis for degenerate eigenspaces of a normal
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .evolution import grover_coin
from .lattice import LatticeGeometry, WalkState, make_localized_uniform_coin

__all__ = [
    "EIGEN_TOL",
    "DENOMINATOR_TOL",
    "MomentumMode",
    "ReducedBlock",
    "EigenSystem",
    "theta_of_mode",
    "reduced_matrix",
    "reduced_block",
    "build_eigensystem",
    "eigenvalue_classes",
    "eigenvalue_gap",
    "asymptotic_gap",
    "to_fourier",
    "from_fourier",
    "decompose",
    "fourier_evolve",
]

EIGEN_TOL = 1e-9
DENOMINATOR_TOL = 1e-8

LABELS = ("+1", "-1", "+theta", "-theta")
ORIGIN_LABELS = ("+1", "+1", "+1", "-1")


@dataclass(frozen=True)
class MomentumMode:
    geometry: LatticeGeometry
    kx: int
    ky: int

    def __post_init__(self):
        side = self.geometry.side
        if not (0 <= self.kx < side and 0 <= self.ky < side):
            raise ValueError(f"mode ({self.kx}, {self.ky}) outside [0, {side - 1}]^2")

    @property
    def omega(self) -> complex:
        return np.exp(2j * np.pi / self.geometry.side)


@dataclass
class ReducedBlock:
    """Reduced operator for one momentum mode with its four eigenpairs.

    ``eigenvectors[:, j]`` is the eigenvector for ``eigenvalues[j]``.
    ``labels`` names each pair ("+1", "-1", "+theta", "-theta"); blocks
    diagonalized numerically carry ``closed_form=False``.
    """

    mode: MomentumMode
    matrix: NDArray[np.complex128]
    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128]
    labels: tuple[str, ...]
    theta: Optional[float]
    closed_form: bool = True

    def residuals(self) -> NDArray[np.float64]:
        r = self.matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)


def theta_of_mode(geometry: LatticeGeometry, kx: int, ky: int) -> float:
    """Eigenphase θ ∈ (0, π] of the mode (kx, ky) ≠ (0, 0)."""
    if kx % geometry.side == 0 and ky % geometry.side == 0:
        raise ValueError("theta is undefined for the (0, 0) mode")
    return float(_theta_grid(geometry, np.asarray(kx), np.asarray(ky)))


def _theta_grid(geometry: LatticeGeometry, kx, ky):
    side = geometry.side
    c = 0.5 * (np.cos(2 * np.pi * kx / side) + np.cos(2 * np.pi * ky / side))
    return np.arccos(np.clip(c, -1.0, 1.0))


def _mode_grids(geometry: LatticeGeometry):
    k = np.arange(geometry.side)
    return np.meshgrid(k, k, indexing="ij")


def _reduced_matrices(geometry: LatticeGeometry, kx, ky) -> NDArray[np.complex128]:
    omega = np.exp(2j * np.pi / geometry.side)
    g = grover_coin().matrix
    # row (d, s) picks up ω^{±k_d} and reads row (d, s⊕1) of G
    phases = np.stack(
        [omega ** kx, omega ** (-kx), omega ** ky, omega ** (-ky)], axis=-1
    )
    flipped = g[[1, 0, 3, 2], :]
    return phases[..., :, None] * flipped


def reduced_matrix(geometry: LatticeGeometry, kx: int, ky: int) -> NDArray[np.complex128]:
    """The 4×4 reduced operator G̃(kx, ky)."""
    MomentumMode(geometry, kx, ky)
    return _reduced_matrices(geometry, np.asarray(kx), np.asarray(ky))


def _closed_form_vectors(geometry: LatticeGeometry, kx, ky):
    """Closed-form eigenvectors for generic modes; returns (vectors, degenerate mask).

    ``vectors[..., :, j]`` follows LABELS order. Entries flagged degenerate
    are garbage and must be replaced.
    """
    side = geometry.side
    wx = np.exp(2j * np.pi * kx / side)
    wy = np.exp(2j * np.pi * ky / side)
    theta = _theta_grid(geometry, kx, ky)
    d_plus = 4 * np.sin(theta / 2)
    d_minus = 4 * np.cos(theta / 2)
    d_theta = 2 * np.sqrt(2) * np.sin(theta)
    degenerate = (
        (np.abs(d_plus) < DENOMINATOR_TOL)
        | (np.abs(d_minus) < DENOMINATOR_TOL)
        | (np.abs(d_theta) < DENOMINATOR_TOL)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        nu_p1 = np.stack([wx * (wy - 1), 1 - wy, wy * (1 - wx), wx - 1], axis=-1)
        nu_p1 = nu_p1 / d_plus[..., None]
        nu_m1 = np.stack([-wx * (1 + wy), -(1 + wy), wy * (1 + wx), 1 + wx], axis=-1)
        nu_m1 = nu_m1 / d_minus[..., None]
        em = np.exp(-1j * theta)[..., None]
        ep = np.exp(1j * theta)[..., None]
        phases = np.stack([wx, np.conj(wx), wy, np.conj(wy)], axis=-1)
        nu_pt = 1j * (em - phases) / d_theta[..., None]
        nu_mt = -1j * (ep - phases) / d_theta[..., None]
    vectors = np.stack([nu_p1, nu_m1, nu_pt, nu_mt], axis=-1)
    eigenvalues = np.stack(
        [np.ones_like(theta), -np.ones_like(theta), np.exp(1j * theta), np.exp(-1j * theta)],
        axis=-1,
    ).astype(np.complex128)
    return vectors, eigenvalues, theta, degenerate


def _origin_pairs():
    s2 = 1 / np.sqrt(2)
    vectors = np.array(
        [[s2, -s2, 0, 0], [0, 0, s2, -s2], [0.5, 0.5, 0.5, 0.5], [0.5, 0.5, -0.5, -0.5]],
        dtype=np.complex128,
    ).T
    return vectors, np.array([1, 1, 1, -1], dtype=np.complex128)


def _numeric_pairs(matrix):
    t, z = scipy.linalg.schur(matrix, output="complex")
    lam = np.diag(t).copy()
    order = np.argsort(np.mod(np.angle(lam) + 1e-12, 2 * np.pi))
    lam = lam / np.abs(lam)
    return z[:, order], lam[order]


def reduced_block(geometry: LatticeGeometry, kx: int, ky: int) -> ReducedBlock:
    """Reduced operator for (kx, ky) with its eigenpairs attached."""
    mode = MomentumMode(geometry, kx, ky)
    matrix = _reduced_matrices(geometry, np.asarray(kx), np.asarray(ky))
    if kx == 0 and ky == 0:
        vecs, lams = _origin_pairs()
        return ReducedBlock(mode, matrix, lams, vecs, ORIGIN_LABELS, None, True)
    vecs, lams, theta, degenerate = _closed_form_vectors(geometry, np.asarray(kx), np.asarray(ky))
    if degenerate:
        vecs, lams = _numeric_pairs(matrix)
        labels = tuple(_label_for(l) for l in lams)
        return ReducedBlock(mode, matrix, lams, vecs, labels, float(theta), False)
    return ReducedBlock(mode, matrix, lams, vecs, LABELS, float(theta), True)


def _label_for(lam: complex) -> str:
    if abs(lam - 1) < EIGEN_TOL:
        return "+1"
    if abs(lam + 1) < EIGEN_TOL:
        return "-1"
    return "+theta" if lam.imag > 0 else "-theta"


def eigenvalue_classes(eigenvalues, tol: float = EIGEN_TOL):
    """Group unit-circle eigenvalues whose chord distance is within ``tol``.

    Returns ``(labels, boundary_gaps)``: an integer class label per input
    entry (same shape as the input) and the chord distances between
    angularly adjacent distinct classes.
    """
    lam = np.asarray(eigenvalues).ravel()
    ang = np.mod(np.angle(lam), 2 * np.pi)
    order = np.argsort(ang, kind="stable")
    a = ang[order]
    chords = 2 * np.sin(np.diff(a) / 2)
    wrap = 2 * np.sin((a[0] + 2 * np.pi - a[-1]) / 2) if a.size > 1 else np.inf
    new_class = np.concatenate([[False], chords > tol])
    sorted_labels = np.cumsum(new_class)
    gaps = chords[chords > tol]
    if a.size > 1 and wrap <= tol:
        sorted_labels[sorted_labels == sorted_labels[-1]] = 0
    elif a.size > 1:
        gaps = np.concatenate([gaps, [wrap]])
    _, sorted_labels = np.unique(sorted_labels, return_inverse=True)
    labels = np.empty_like(sorted_labels)
    labels[order] = sorted_labels
    return labels.reshape(np.shape(eigenvalues)), gaps


def eigenvalue_gap(eigenvalues, tol: float = EIGEN_TOL) -> float:
    """Minimum distance |λ − λ'| between distinct eigenvalues."""
    _, gaps = eigenvalue_classes(eigenvalues, tol)
    if gaps.size == 0:
        raise ValueError("spectrum has a single distinct eigenvalue")
    return float(gaps.min())


@dataclass
class EigenSystem:
    """All N reduced blocks of the Grover walk, stored as stacked arrays.

    ``eigenvectors[kx, ky, :, j]`` is eigenvector j of block (kx, ky) and
    ``eigenvalues[kx, ky, j]`` its eigenvalue. ``theta`` is NaN at (0, 0).
    """

    geometry: LatticeGeometry
    matrices: NDArray[np.complex128]
    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128]
    theta: NDArray[np.float64]
    closed_form: NDArray[np.bool_]
    gap: float = field(init=False)

    def __post_init__(self):
        self.gap = eigenvalue_gap(self.eigenvalues)

    def block(self, kx: int, ky: int) -> ReducedBlock:
        mode = MomentumMode(self.geometry, kx, ky)
        if kx == 0 and ky == 0:
            labels, theta = ORIGIN_LABELS, None
        elif self.closed_form[kx, ky]:
            labels, theta = LABELS, float(self.theta[kx, ky])
        else:
            labels = tuple(_label_for(l) for l in self.eigenvalues[kx, ky])
            theta = float(self.theta[kx, ky])
        return ReducedBlock(
            mode,
            self.matrices[kx, ky],
            self.eigenvalues[kx, ky],
            self.eigenvectors[kx, ky],
            labels,
            theta,
            bool(self.closed_form[kx, ky]),
        )

    def gap_pair(self):
        """Two (kx, ky, j) entries whose eigenvalues realize the gap."""
        lam = self.eigenvalues.ravel()
        labels, _ = eigenvalue_classes(lam)
        ang = np.mod(np.angle(lam), 2 * np.pi)
        order = np.argsort(ang, kind="stable")
        a, lab = ang[order], labels[order]
        chord = 2 * np.sin(np.diff(np.concatenate([a, [a[0] + 2 * np.pi]])) / 2)
        distinct = lab != np.roll(lab, -1)
        i = np.flatnonzero(distinct)[np.argmin(chord[distinct])]
        first, second = order[i], order[(i + 1) % order.size]
        shape = self.eigenvalues.shape
        return np.unravel_index(first, shape), np.unravel_index(second, shape)


def build_eigensystem(geometry: LatticeGeometry) -> EigenSystem:
    kx, ky = _mode_grids(geometry)
    matrices = _reduced_matrices(geometry, kx, ky)
    vectors, eigenvalues, theta, degenerate = _closed_form_vectors(geometry, kx, ky)
    closed = ~degenerate
    origin_vecs, origin_lams = _origin_pairs()
    vectors[0, 0] = origin_vecs
    eigenvalues[0, 0] = origin_lams
    theta[0, 0] = np.nan
    closed[0, 0] = True
    for i, j in zip(*np.nonzero(degenerate & ((kx + ky) > 0))):
        vectors[i, j], eigenvalues[i, j] = _numeric_pairs(matrices[i, j])
    return EigenSystem(geometry, matrices, eigenvalues, vectors, theta, closed)


def _signed(k: int, side: int) -> int:
    k = k % side
    return k if 2 * k <= side else k - side


def asymptotic_gap(geometry: LatticeGeometry, mode, other) -> float:
    """Small-momentum estimate √2 π / √N · | |k| − |k'| | of the eigenphase splitting.

    Mode indices are mapped to signed representatives in (−√N/2, √N/2].
    """
    side = geometry.side
    r = np.hypot(_signed(mode[0], side), _signed(mode[1], side))
    r2 = np.hypot(_signed(other[0], side), _signed(other[1], side))
    return float(np.sqrt(2) * np.pi / side * abs(r - r2))


def to_fourier(amplitudes: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """<k|ψ> per coin, returned with shape (side, side, 4)."""
    side = amplitudes.shape[-1]
    return np.moveaxis(np.fft.fft2(amplitudes, axes=(1, 2)) / side, 0, -1)


def from_fourier(phat: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Inverse of :func:`to_fourier`; returns shape (4, side, side)."""
    side = phat.shape[0]
    return np.fft.ifft2(np.moveaxis(phat, -1, 0), axes=(1, 2)) * side


def decompose(state: WalkState, eigensystem: EigenSystem) -> NDArray[np.complex128]:
    """Coefficients a[kx, ky, j] = <ν_j(k), k | ψ> of ``state`` in the eigenbasis."""
    phat = to_fourier(state.amplitudes)
    return np.einsum("xyci,xyc->xyi", eigensystem.eigenvectors.conj(), phat)


def fourier_evolve(
    geometry: LatticeGeometry,
    t: int,
    initial: Optional[WalkState] = None,
    eigensystem: Optional[EigenSystem] = None,
) -> WalkState:
    """State after ``t`` steps computed from the eigen-decomposition.

    The default initial state is |u>|0, 0>. Each eigencomponent picks up the
    phase λ^t, applied as exp(i t arg λ) to avoid accumulated rounding.
    """
    if t < 0:
        raise ValueError(f"step count must be non-negative (got {t})")
    if initial is None:
        initial = make_localized_uniform_coin(geometry, 0, 0)
    if eigensystem is None:
        eigensystem = build_eigensystem(geometry)
    coeffs = decompose(initial, eigensystem)
    phase = np.exp(1j * t * np.angle(eigensystem.eigenvalues))
    phat = np.einsum("xyci,xyi->xyc", eigensystem.eigenvectors, coeffs * phase)
    return WalkState(geometry, from_fourier(phat))
