"""
Walker states and probability distributions on the √N × √N torus.

Amplitudes are stored as a complex array of shape ``(4, side, side)``. The
first axis is the coin index in the fixed order (d, s) = (0,0), (0,1),
(1,0), (1,1), where d selects the axis (0 → x, 1 → y) and s the sign of the
move, (-1)**s.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "COIN_ORDER",
    "NORM_TOL",
    "LatticeGeometry",
    "WalkState",
    "Distribution",
    "make_localized_uniform_coin",
    "make_global_uniform",
    "measure",
    "total_variation",
    "uniform_distribution",
    "point_mass",
    "write_distribution_csv",
    "read_distribution_csv",
]

COIN_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))
NORM_TOL = 1e-10
DIST_TOL = 1e-9


@dataclass(frozen=True)
class LatticeGeometry:
    """Square torus with ``side`` vertices per axis and coordination 4."""

    side: int
    degree: int = field(default=4, init=False)

    def __post_init__(self):
        if isinstance(self.side, bool) or not isinstance(self.side, (int, np.integer)):
            raise TypeError(f"side must be an integer, got {type(self.side).__name__}")
        if self.side < 2:
            raise ValueError(f"side must be >= 2 (got {self.side})")
        object.__setattr__(self, "side", int(self.side))

    @property
    def vertices(self) -> int:
        return self.side * self.side

    @property
    def is_odd(self) -> bool:
        return self.side % 2 == 1

    def check_vertex(self, x: int, y: int) -> tuple[int, int]:
        if not (0 <= x < self.side and 0 <= y < self.side):
            raise ValueError(
                f"vertex ({x}, {y}) outside the {self.side}x{self.side} lattice"
            )
        return int(x), int(y)


@dataclass
class WalkState:
    """Pure state of the walker: amplitudes ψ[coin, x, y]."""

    geometry: LatticeGeometry
    amplitudes: NDArray[np.complex128]

    def __post_init__(self):
        shape = (4, self.geometry.side, self.geometry.side)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != shape:
            raise ValueError(f"amplitudes must have shape {shape}, got {self.amplitudes.shape}")

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def check_normalized(self, tol: float = NORM_TOL) -> None:
        n2 = self.norm_squared()
        if abs(n2 - 1.0) > tol:
            raise ValueError(f"state is not normalized: |psi|^2 = {n2!r}")

    def copy(self) -> "WalkState":
        return WalkState(self.geometry, self.amplitudes.copy())


@dataclass
class Distribution:
    """Probability distribution over the lattice vertices, indexed [x, y]."""

    geometry: LatticeGeometry
    probabilities: NDArray[np.float64]

    def __post_init__(self):
        shape = (self.geometry.side, self.geometry.side)
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.shape != shape:
            raise ValueError(f"probabilities must have shape {shape}, got {p.shape}")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        total = p.sum()
        if abs(total - 1.0) > DIST_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        self.probabilities = p

    def __getitem__(self, xy):
        return self.probabilities[xy]


def make_localized_uniform_coin(geometry: LatticeGeometry, x0: int = 0, y0: int = 0) -> WalkState:
    """Walker at (x0, y0) in the uniform coin state |u> = (1,1,1,1)/2."""
    x0, y0 = geometry.check_vertex(x0, y0)
    psi = np.zeros((4, geometry.side, geometry.side), dtype=np.complex128)
    psi[:, x0, y0] = 0.5
    return WalkState(geometry, psi)


def make_global_uniform(geometry: LatticeGeometry) -> WalkState:
    """Uniform superposition over all coin and position states."""
    amp = 1.0 / (2.0 * geometry.side)
    psi = np.full((4, geometry.side, geometry.side), amp, dtype=np.complex128)
    return WalkState(geometry, psi)


def _probabilities(amplitudes: NDArray[np.complex128]) -> NDArray[np.float64]:
    return np.sum(amplitudes.real ** 2 + amplitudes.imag ** 2, axis=0)


def measure(state: WalkState) -> Distribution:
    """Position distribution P(x, y) = sum over coin of |ψ|²."""
    return Distribution(state.geometry, _probabilities(state.amplitudes))


def total_variation(a: Distribution, b: Distribution) -> float:
    """Unnormalized total variation distance, sum_x |a(x) - b(x)|, in [0, 2]."""
    if a.geometry != b.geometry:
        raise ValueError(
            f"geometry mismatch: side {a.geometry.side} vs side {b.geometry.side}"
        )
    return float(np.abs(a.probabilities - b.probabilities).sum())


def uniform_distribution(geometry: LatticeGeometry) -> Distribution:
    n = geometry.vertices
    return Distribution(geometry, np.full((geometry.side, geometry.side), 1.0 / n))


def point_mass(geometry: LatticeGeometry, x: int, y: int) -> Distribution:
    x, y = geometry.check_vertex(x, y)
    p = np.zeros((geometry.side, geometry.side))
    p[x, y] = 1.0
    return Distribution(geometry, p)


def write_distribution_csv(
    dist: Distribution,
    path: Union[str, Path],
    comment: Optional[str] = None,
) -> None:
    """Write ``x,y,p`` rows, x-major then y, with 17 significant digits.

    ``comment`` is emitted first as a ``# ...`` line when given.
    """
    side = dist.geometry.side
    with open(path, "w", newline="") as fh:
        if comment is not None:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "p"])
        for x in range(side):
            for y in range(side):
                writer.writerow([x, y, f"{dist.probabilities[x, y]:.17g}"])


def read_distribution_csv(path: Union[str, Path]) -> Distribution:
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    entries = [(int(r["x"]), int(r["y"]), float(r["p"])) for r in reader]
    side = int(round(np.sqrt(len(entries))))
    if side * side != len(entries):
        raise ValueError(f"{len(entries)} rows do not form a square lattice")
    p = np.zeros((side, side))
    for x, y, v in entries:
        p[x, y] = v
    return Distribution(LatticeGeometry(side), p)
