"""
Abstract search on the torus: the Grover walk with coin −I on one marked
vertex, started from the uniform superposition.

The marked-vertex probability p_m(t) rises to a first maximum after
O(sqrt(N log N)) steps. The walk's time-averaged distribution concentrates
on the marked vertex as well, which is what ties the mixing time of this
walk to the running time of the search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .evolution import MarkedCoinSpec, grover_coin, iterate_probabilities
from .fitting import FitError, FitResult, fit_sqrt_nlogn
from .lattice import (
    Distribution,
    LatticeGeometry,
    make_global_uniform,
    make_localized_uniform_coin,
)
from .limiting import average_distribution, limiting_distribution
from .mixing import DistanceTrace, default_horizon, distance_trace, mixing_times_from_trace

__all__ = [
    "FLOOR_FACTOR",
    "CONFIRM_FRACTION",
    "SearchRunResult",
    "first_maximum",
    "run_search",
    "stationary_reference_marked",
    "sub_band_minima",
    "SearchMixingReport",
    "search_mixing_comparison",
    "SearchScaling",
    "search_scaling",
]

FLOOR_FACTOR = 3.0
CONFIRM_FRACTION = 0.5
MINIMA_DEPTH = 0.05


@dataclass
class SearchRunResult:
    side: int
    marked: tuple[int, int]
    first_max_step: Optional[int]
    first_max_probability: Optional[float]
    trace: NDArray[np.float64]
    stationary: Distribution

    @property
    def found(self) -> bool:
        return self.first_max_step is not None


def first_maximum(p: NDArray[np.float64], floor: float) -> Optional[int]:
    """Index of the first confirmed maximum of ``p`` above ``floor``.

    A maximum is confirmed once ``p`` falls below CONFIRM_FRACTION of the
    running maximum; the returned index is where that running maximum was
    attained. Plateaus with small ripples before the fall do not end the
    search for the peak. Returns None if no confirmation happens.
    """
    p = np.asarray(p, dtype=float)
    running = np.maximum.accumulate(p)
    fallen = np.flatnonzero((running > floor) & (p < CONFIRM_FRACTION * running))
    if fallen.size == 0:
        return None
    return int(np.argmax(p[: fallen[0] + 1]))


def run_search(geometry: LatticeGeometry, marked: tuple[int, int], t_max: int) -> SearchRunResult:
    """Run the marked walk for ``t_max`` steps from the uniform state.

    ``stationary`` is the time average P̄(t_max) accumulated along the way.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1 (got {t_max})")
    spec = MarkedCoinSpec(geometry, marked)
    x0, y0 = spec.marked
    trace = np.empty(t_max + 1)
    total = np.zeros((geometry.side, geometry.side))
    for t, p in enumerate(iterate_probabilities(make_global_uniform(geometry), spec, t_max)):
        trace[t] = p[x0, y0]
        if t < t_max:
            total += p
    t_star = first_maximum(trace, FLOOR_FACTOR / geometry.vertices)
    return SearchRunResult(
        geometry.side,
        (x0, y0),
        t_star,
        None if t_star is None else float(trace[t_star]),
        trace,
        Distribution(geometry, total / t_max),
    )


def stationary_reference_marked(
    geometry: LatticeGeometry, marked: tuple[int, int], T: int = 10_000
) -> Distribution:
    """P̄(T) of the marked walk from the uniform state; its reference distribution."""
    spec = MarkedCoinSpec(geometry, marked)
    return average_distribution(geometry, spec, make_global_uniform(geometry), T)


def sub_band_minima(d, window: int, depth: float = MINIMA_DEPTH) -> NDArray[np.int64]:
    """Indices of strict local minima of ``d`` that dip below the band.

    A minimum at i counts when d[i] ≤ (1 − depth) · min(max(d[i−window:i]),
    max(d[i+1:i+1+window])), i.e. it lies at least ``depth`` below the
    highest point on each side. A smoothly decaying trace has none.
    """
    d = np.asarray(d, dtype=float)
    out = []
    for i in range(1, d.size - 1):
        if d[i] < d[i - 1] and d[i] < d[i + 1]:
            left = d[max(0, i - window):i].max()
            right = d[i + 1:i + 1 + window].max()
            if d[i] <= (1.0 - depth) * min(left, right):
                out.append(i)
    return np.asarray(out, dtype=np.int64)


@dataclass
class SearchMixingReport:
    side: int
    epsilon: float
    mixing_time: Optional[int]
    first_max_step: Optional[int]
    ratio: Optional[float]
    marked_minima: int
    grover_minima: int
    marked_trace: DistanceTrace
    grover_trace: DistanceTrace
    reference: Distribution


def search_mixing_comparison(
    geometry: LatticeGeometry,
    marked: tuple[int, int],
    epsilon: float,
    T_max: Optional[int] = None,
    reference_steps: int = 10_000,
) -> SearchMixingReport:
    """Mixing time of the marked walk against the search time on one lattice.

    Also counts sub-band minima (window = √N) of the average-distance traces
    of the marked walk and of the unmarked Grover walk (localized start,
    exact limiting distribution as reference; odd sides only).
    """
    horizon = default_horizon(geometry) if T_max is None else T_max
    spec = MarkedCoinSpec(geometry, marked)
    reference = stationary_reference_marked(geometry, marked, reference_steps)
    marked_trace = distance_trace(geometry, spec, make_global_uniform(geometry), reference, horizon)
    m_eps, _ = mixing_times_from_trace(marked_trace, epsilon)
    run = run_search(geometry, marked, min(horizon, 20 * geometry.side + 100))

    start = make_localized_uniform_coin(geometry, 0, 0)
    pi = limiting_distribution(geometry, start)
    grover_trace = distance_trace(geometry, grover_coin(), start, pi, horizon)
    window = geometry.side
    ratio = None
    if m_eps is not None and run.first_max_step:
        ratio = m_eps / run.first_max_step
    return SearchMixingReport(
        geometry.side,
        epsilon,
        m_eps,
        run.first_max_step,
        ratio,
        int(sub_band_minima(marked_trace.average, window).size),
        int(sub_band_minima(grover_trace.average, window).size),
        marked_trace,
        grover_trace,
        reference,
    )


@dataclass
class SearchScaling:
    runs: list[SearchRunResult]
    first_max_fit: Optional[FitResult] = None
    success_scaled: dict = field(default_factory=dict)


def search_scaling(sides: Sequence[int], marked: tuple[int, int] = (0, 0), t_max: Optional[int] = None):
    """First-maximum times and p*·ln N across lattice sizes."""
    runs = []
    for side in sides:
        geometry = LatticeGeometry(side)
        horizon = t_max if t_max is not None else 20 * side + 100
        runs.append(run_search(geometry, marked, horizon))
    found = [r for r in runs if r.found]
    result = SearchScaling(runs)
    try:
        result.first_max_fit = fit_sqrt_nlogn(
            [r.side ** 2 for r in found], [r.first_max_step for r in found]
        )
    except FitError:
        pass
    result.success_scaled = {
        r.side: r.first_max_probability * np.log(r.side ** 2) for r in found
    }
    return result
