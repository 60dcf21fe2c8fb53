"""
Position-space evolution U = S · (C ⊗ I) with the flip-flop shift.

The coin acts on the 4-vector at every vertex; the shift is an index
permutation with periodic wraparound. Norms are never renormalized; the
squared norm is re-checked after every step and any drift beyond NORM_TOL
raises UnitarityError.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Optional, Union

import numpy as np
from numpy.typing import NDArray

from .lattice import NORM_TOL, Distribution, LatticeGeometry, WalkState, _probabilities

__all__ = [
    "CoinOperator",
    "MarkedCoinSpec",
    "grover_coin",
    "apply_shift",
    "step",
    "step_marked",
    "evolve",
    "iterate_probabilities",
    "UnitarityError",
]

UNITARY_TOL = 1e-12


class UnitarityError(RuntimeError):
    """The squared norm drifted during evolution."""


def _check_norm(n2: float, n0: float, t: int) -> None:
    if abs(n2 - n0) > NORM_TOL:
        raise UnitarityError(f"norm drift at step {t}: |psi|^2 = {n2!r}, started at {n0!r}")


@dataclass(frozen=True)
class CoinOperator:
    """4×4 unitary acting on the coin register, in the canonical coin order."""

    matrix: NDArray[np.complex128]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (4, 4):
            raise ValueError(f"coin must be 4x4, got {m.shape}")
        if np.max(np.abs(m.conj().T @ m - np.eye(4))) >= UNITARY_TOL:
            raise ValueError("coin matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class MarkedCoinSpec:
    """Grover coin everywhere except −I on the marked vertex."""

    geometry: LatticeGeometry
    marked: tuple[int, int]
    base: CoinOperator = None

    def __post_init__(self):
        object.__setattr__(self, "marked", self.geometry.check_vertex(*self.marked))
        if self.base is None:
            object.__setattr__(self, "base", grover_coin())


def grover_coin() -> CoinOperator:
    """G = 2|u><u| − I: −1/2 on the diagonal, +1/2 elsewhere."""
    return CoinOperator(np.full((4, 4), 0.5) - np.eye(4))


@lru_cache(maxsize=32)
def _shift_source(side: int) -> NDArray[np.intp]:
    """Flat gather index: shifted.ravel() == psi.ravel()[_shift_source(side)]."""
    idx = np.arange(4 * side * side).reshape(4, side, side)
    # (d, s) at (x, y) lands on (d, s ^ 1) at (x + (-1)**s δ_d0, y + (-1)**s δ_d1)
    src = np.empty_like(idx)
    src[1] = np.roll(idx[0], 1, axis=0)
    src[0] = np.roll(idx[1], -1, axis=0)
    src[3] = np.roll(idx[2], 1, axis=1)
    src[2] = np.roll(idx[3], -1, axis=1)
    src = src.ravel()
    src.setflags(write=False)
    return src


def _shift(psi: NDArray[np.complex128]) -> NDArray[np.complex128]:
    return psi.reshape(-1)[_shift_source(psi.shape[-1])].reshape(psi.shape)


def _coin(psi: NDArray[np.complex128], coin: CoinOperator) -> NDArray[np.complex128]:
    return (coin.matrix @ psi.reshape(4, -1)).reshape(psi.shape)


def _marked_coin(psi: NDArray[np.complex128], spec: MarkedCoinSpec) -> NDArray[np.complex128]:
    x0, y0 = spec.marked
    out = _coin(psi, spec.base)
    out[:, x0, y0] = -psi[:, x0, y0]
    return out


def apply_shift(state: WalkState) -> WalkState:
    """Flip-flop shift; an involution and an exact permutation of amplitudes."""
    return WalkState(state.geometry, _shift(state.amplitudes))


def step(state: WalkState, coin: CoinOperator) -> WalkState:
    """One step of the walk: coin at every vertex, then the shift."""
    return WalkState(state.geometry, _shift(_coin(state.amplitudes, coin)))


def step_marked(state: WalkState, spec: MarkedCoinSpec) -> WalkState:
    """One step of the search walk with coin −I at the marked vertex."""
    if spec.geometry != state.geometry:
        raise ValueError("marked coin spec and state use different lattices")
    return WalkState(state.geometry, _shift(_marked_coin(state.amplitudes, spec)))


CoinLike = Union[CoinOperator, MarkedCoinSpec]


def _stepper(coin: CoinLike) -> Callable[[NDArray], NDArray]:
    if isinstance(coin, MarkedCoinSpec):
        return lambda psi: _shift(_marked_coin(psi, coin))
    if isinstance(coin, CoinOperator):
        return lambda psi: _shift(_coin(psi, coin))
    raise TypeError(f"expected CoinOperator or MarkedCoinSpec, got {type(coin).__name__}")


def evolve(
    state: WalkState,
    coin: CoinLike,
    t: int,
    observer: Optional[Callable[[int, Distribution], None]] = None,
) -> WalkState:
    """Apply ``t`` steps, calling ``observer(t', P_t')`` after each step t' = 1..t."""
    if t < 0:
        raise ValueError(f"step count must be non-negative (got {t})")
    advance = _stepper(coin)
    psi = state.amplitudes
    n0 = state.norm_squared()
    for i in range(1, t + 1):
        psi = advance(psi)
        if observer is not None:
            p = _probabilities(psi)
            _check_norm(float(p.sum()), n0, i)
            observer(i, Distribution(state.geometry, p))
        else:
            _check_norm(float(np.vdot(psi, psi).real), n0, i)
    if t == 0:
        psi = psi.copy()
    return WalkState(state.geometry, psi)


def iterate_probabilities(
    state: WalkState, coin: CoinLike, steps: int
) -> Iterator[NDArray[np.float64]]:
    """Yield raw probability arrays P_0, P_1, ..., P_steps.

    Skips the per-step Distribution validation; used by the long-horizon
    statistics in the mixing and search modules.
    """
    advance = _stepper(coin)
    psi = state.amplitudes
    p = _probabilities(psi)
    n0 = float(p.sum())
    yield p
    for t in range(1, steps + 1):
        psi = advance(psi)
        p = _probabilities(psi)
        _check_norm(float(p.sum()), n0, t)
        yield p
