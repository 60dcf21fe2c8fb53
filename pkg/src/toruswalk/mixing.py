"""
Average and instantaneous mixing times, the spectral-gap bound, and the
classical random-walk baseline.

Distances are unnormalized total variation, sum_x |A(x) − B(x)| ∈ [0, 2].
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .evolution import CoinLike, MarkedCoinSpec, grover_coin, iterate_probabilities
from .fitting import FitError, FitResult, fit_joint_scaling, fit_power_law, fit_sqrt_nlogn
from .lattice import (
    Distribution,
    LatticeGeometry,
    WalkState,
    make_global_uniform,
    make_localized_uniform_coin,
)
from .records import ExperimentRecord, timed

__all__ = [
    "GUARD_FRACTION",
    "GUARD_MARGIN",
    "DistanceTrace",
    "MixingResult",
    "default_horizon",
    "distance_trace",
    "mixing_times_from_trace",
    "mixing_time",
    "aharonov_bound",
    "SweepResult",
    "scaling_sweep",
    "classical_step",
    "classical_mixing_time",
    "classical_mixing_baseline",
]

GUARD_FRACTION = 0.2
GUARD_MARGIN = 0.9


def default_horizon(geometry: LatticeGeometry) -> int:
    """max(10^4, 50 sqrt(N ln N)) steps."""
    n = geometry.vertices
    return max(10_000, math.ceil(50 * math.sqrt(n * math.log(n))))


@dataclass
class DistanceTrace:
    """Distances recorded at t = 1..horizon.

    ``average[i]`` is ‖P̄_t − π‖ with P̄_t the mean of P_0..P_{t−1};
    ``instantaneous[i]`` is ‖P_t − π‖; ``initial_distance`` is ‖P_0 − π‖.
    """

    t: NDArray[np.int64]
    average: NDArray[np.float64]
    instantaneous: NDArray[np.float64]
    average_to_uniform: NDArray[np.float64]
    initial_distance: float

    @property
    def horizon(self) -> int:
        return int(self.t[-1])


def distance_trace(
    geometry: LatticeGeometry,
    coin: CoinLike,
    initial: WalkState,
    reference: Distribution,
    horizon: int,
) -> DistanceTrace:
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1 (got {horizon})")
    if reference.geometry != geometry or initial.geometry != geometry:
        raise ValueError("state, reference and geometry must share one lattice")
    pi = reference.probabilities
    uniform = 1.0 / geometry.vertices
    running = np.zeros_like(pi)
    avg = np.empty(horizon)
    inst = np.empty(horizon)
    avg_u = np.empty(horizon)
    probs = iterate_probabilities(initial, coin, horizon)
    p = next(probs)
    initial_distance = float(np.abs(p - pi).sum())
    for i, p_next in enumerate(probs):
        t = i + 1
        running += p
        mean = running / t
        avg[i] = np.abs(mean - pi).sum()
        avg_u[i] = np.abs(mean - uniform).sum()
        inst[i] = np.abs(p_next - pi).sum()
        p = p_next
    return DistanceTrace(np.arange(1, horizon + 1), avg, inst, avg_u, initial_distance)


def mixing_times_from_trace(trace: DistanceTrace, epsilon: float):
    """(M_ε, I_ε) from a recorded trace; None means "not reached".

    M_ε is one past the last recorded violation ‖P̄_t − π‖ > ε (0 when the
    condition holds from the start). Because "for all t ≥ M_ε" cannot be
    certified at a finite horizon, M_ε is only reported when the last
    GUARD_FRACTION of the horizon stays below GUARD_MARGIN · ε.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive (got {epsilon})")
    violations = np.flatnonzero(trace.average > epsilon)
    average_time: Optional[int] = 0 if violations.size == 0 else int(trace.t[violations[-1]]) + 1
    guard = trace.t > (1.0 - GUARD_FRACTION) * trace.horizon
    if np.any(trace.average[guard] > GUARD_MARGIN * epsilon):
        average_time = None

    if trace.initial_distance <= epsilon:
        instant_time: Optional[int] = 0
    else:
        hits = np.flatnonzero(trace.instantaneous <= epsilon)
        instant_time = int(trace.t[hits[0]]) if hits.size else None
    return average_time, instant_time


@dataclass
class MixingResult:
    epsilon: float
    average_mixing_time: Optional[int]
    instantaneous_mixing_time: Optional[int]
    horizon: int
    trace: DistanceTrace

    @property
    def reached(self) -> bool:
        return self.average_mixing_time is not None


def mixing_time(
    geometry: LatticeGeometry,
    coin: CoinLike,
    initial: WalkState,
    reference: Distribution,
    epsilon: float,
    horizon: Optional[int] = None,
) -> MixingResult:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive (got {epsilon})")
    if epsilon >= 2:
        warnings.warn(
            f"epsilon={epsilon} >= 2: total variation never exceeds 2, condition is trivial",
            stacklevel=2,
        )
    if abs(reference.probabilities.sum() - 1.0) > 1e-9:
        raise ValueError("reference distribution must sum to 1")
    horizon = default_horizon(geometry) if horizon is None else horizon
    trace = distance_trace(geometry, coin, initial, reference, horizon)
    m, i = mixing_times_from_trace(trace, epsilon)
    return MixingResult(epsilon, m, i, horizon, trace)


def aharonov_bound(geometry: LatticeGeometry, gap: float, T) -> NDArray[np.float64]:
    """Upper bound (π / (T Δ)) ln(N d / 2 + 1) on ‖P̄_T − π‖."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    T = np.asarray(T, dtype=float)
    if np.any(T < 1):
        raise ValueError("T must be >= 1")
    n, d = geometry.vertices, geometry.degree
    return np.pi / (T * gap) * math.log(n * d / 2 + 1)


@dataclass
class SweepResult:
    records: list[ExperimentRecord]
    size_fits: dict = field(default_factory=dict)
    epsilon_fits: dict = field(default_factory=dict)
    flagged: list = field(default_factory=list)
    joint_fit: Optional[FitResult] = None


def _walk_setup(geometry: LatticeGeometry, coin_kind: str, marked, reference_steps: int):
    if coin_kind == "grover":
        from .limiting import limiting_distribution

        initial = make_localized_uniform_coin(geometry, 0, 0)
        return grover_coin(), initial, limiting_distribution(geometry, initial)
    if coin_kind == "marked":
        from .search import stationary_reference_marked

        spec = MarkedCoinSpec(geometry, marked)
        reference = stationary_reference_marked(geometry, marked, reference_steps)
        return spec, make_global_uniform(geometry), reference
    raise ValueError(f"unknown coin kind {coin_kind!r} (expected 'grover' or 'marked')")


def _side_trace(side, coin_kind, marked, reference_steps, horizon):
    geometry = LatticeGeometry(side)
    h = default_horizon(geometry) if horizon is None else horizon
    with timed() as clock:
        coin, initial, reference = _walk_setup(geometry, coin_kind, marked, reference_steps)
        trace = distance_trace(geometry, coin, initial, reference, h)
    return geometry, h, trace, clock.seconds


def scaling_sweep(
    sides: Sequence[int],
    epsilons: Sequence[float],
    coin_kind: str = "grover",
    horizon: Optional[int] = None,
    marked: tuple[int, int] = (0, 0),
    reference_steps: int = 10_000,
    workers: int = 1,
) -> SweepResult:
    """Measure M_ε over (side, ε) and fit the size and ε scaling.

    One trace per side serves every ε. Size fits regress M_ε on
    sqrt(N ln N) per ε; ε fits regress ln M_ε on ln(1/ε) per side, and the
    joint fit estimates c from all points together. Unreached points are
    excluded from the fits and listed in ``flagged``. Sides run in
    ``workers`` processes; results are merged in side order.
    """
    sides = list(sides)
    if sides != sorted(sides):
        raise ValueError("sides must be sorted")
    if any(s % 2 == 0 for s in sides):
        raise ValueError("scaling sweeps run on odd sides only")
    if coin_kind not in ("grover", "marked"):
        raise ValueError(f"unknown coin kind {coin_kind!r} (expected 'grover' or 'marked')")
    job = (coin_kind, tuple(marked), reference_steps, horizon)
    if workers > 1 and len(sides) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_side_trace, sides, *[[j] * len(sides) for j in job]))
    else:
        traces = [_side_trace(s, *job) for s in sides]

    result = SweepResult([])
    for geometry, h, trace, seconds in traces:
        for eps in epsilons:
            m, i = mixing_times_from_trace(trace, eps)
            params = {
                "side": geometry.side, "N": geometry.vertices, "epsilon": eps,
                "coin": coin_kind, "horizon": h,
            }
            if coin_kind == "marked":
                params["marked"] = tuple(marked)
            result.records.append(
                ExperimentRecord(
                    kind="mixing",
                    parameters=params,
                    outputs={"M_eps": m, "I_eps": i, "reached": m is not None},
                    seconds=seconds,
                )
            )
            if m is None:
                result.flagged.append((geometry.side, eps))

    reached = [r for r in result.records if r.outputs["reached"] and r.outputs["M_eps"] > 0]
    for eps in epsilons:
        rows = [r for r in reached if r.parameters["epsilon"] == eps]
        try:
            result.size_fits[eps] = fit_sqrt_nlogn(
                [r.parameters["N"] for r in rows], [r.outputs["M_eps"] for r in rows]
            )
        except FitError:
            pass
    for side in sides:
        rows = [r for r in reached if r.parameters["side"] == side]
        if len({r.parameters["epsilon"] for r in rows}) >= 2:
            result.epsilon_fits[side] = fit_power_law(
                [1.0 / r.parameters["epsilon"] for r in rows],
                [r.outputs["M_eps"] for r in rows],
                model="power law in 1/epsilon",
            )
    if len({r.parameters["epsilon"] for r in reached}) >= 2:
        result.joint_fit = fit_joint_scaling(
            [r.parameters["N"] for r in reached],
            [r.parameters["epsilon"] for r in reached],
            [r.outputs["M_eps"] for r in reached],
        )
    return result


def classical_step(p: NDArray[np.float64], lazy: bool = False) -> NDArray[np.float64]:
    """One step of the simple random walk (1/4 per neighbour), optionally lazy."""
    moved = 0.25 * (
        np.roll(p, 1, axis=0) + np.roll(p, -1, axis=0) + np.roll(p, 1, axis=1) + np.roll(p, -1, axis=1)
    )
    return 0.5 * (p + moved) if lazy else moved


def classical_mixing_time(geometry: LatticeGeometry, epsilon: float, max_steps: int = 10**7):
    """First t with ‖P_t − U‖ ≤ ε for the walk started at the origin.

    Even sides are bipartite, so the lazy walk is used there.
    Returns ``(t, distances)`` with distances[t] = ‖P_t − U‖.
    """
    lazy = not geometry.is_odd
    p = np.zeros((geometry.side, geometry.side))
    p[0, 0] = 1.0
    u = 1.0 / geometry.vertices
    distances = [np.abs(p - u).sum()]
    while distances[-1] > epsilon:
        if len(distances) > max_steps:
            raise RuntimeError(f"classical walk did not mix within {max_steps} steps")
        p = classical_step(p, lazy)
        distances.append(np.abs(p - u).sum())
    return len(distances) - 1, np.asarray(distances)


def classical_mixing_baseline(sides: Sequence[int], epsilon: float):
    """Classical mixing times over ``sides`` and the power-law fit in N."""
    records = []
    for side in sides:
        geometry = LatticeGeometry(side)
        t, _ = classical_mixing_time(geometry, epsilon)
        records.append(
            ExperimentRecord(
                kind="classical",
                parameters={"side": side, "N": geometry.vertices, "epsilon": epsilon},
                outputs={"t_mix": t},
            )
        )
    fit = fit_power_law(
        [r.parameters["N"] for r in records], [r.outputs["t_mix"] for r in records], model="power law in N"
    )
    return records, fit
