"""Least-squares fits for the scaling laws (natural logarithms throughout)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["FitError", "FitResult", "fit_linear", "fit_sqrt_nlogn", "fit_power_law", "fit_joint_scaling", "sqrt_nlogn"]


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    """Ordinary least squares result.

    For linear models ``coefficients`` holds ``slope`` and ``intercept``; for
    power laws y = A x^p it holds ``exponent`` and ``prefactor``.
    ``r_squared`` and ``residual_max`` refer to the space the fit was done
    in (log-log for power laws).
    """

    model: str
    coefficients: dict = field(default_factory=dict)
    r_squared: float = float("nan")
    residual_max: float = float("nan")
    n_points: int = 0

    def __getitem__(self, key):
        return self.coefficients[key]


def sqrt_nlogn(n):
    n = np.asarray(n, dtype=float)
    return np.sqrt(n * np.log(n))


def fit_linear(x, y, model: str = "linear", min_points: int = 2) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("x and y must be 1-d arrays of equal length")
    if x.size < min_points:
        raise FitError(f"need at least {min_points} points, got {x.size}")
    if np.ptp(x) == 0:
        raise FitError("degenerate design: all x values are equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(
        model,
        {"slope": float(slope), "intercept": float(intercept)},
        float(min(max(r2, 0.0), 1.0)),
        float(np.max(np.abs(resid))),
        int(x.size),
    )


def fit_sqrt_nlogn(n_vertices, values, min_points: int = 4) -> FitResult:
    """Fit ``values ≈ slope · sqrt(N ln N) + intercept``; needs distinct N."""
    n = np.asarray(n_vertices, dtype=float)
    if np.unique(n).size < min_points:
        raise FitError(f"need at least {min_points} distinct N values")
    return fit_linear(sqrt_nlogn(n), values, model="linear in sqrt(N log N)", min_points=min_points)


def fit_power_law(x, y, model: str = "power law") -> FitResult:
    """Fit y = prefactor · x^exponent by OLS on (ln x, ln y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("power-law fit needs strictly positive data")
    lin = fit_linear(np.log(x), np.log(y), model=model)
    return FitResult(
        model,
        {"exponent": lin["slope"], "prefactor": float(np.exp(lin["intercept"]))},
        lin.r_squared,
        lin.residual_max,
        lin.n_points,
    )


def fit_joint_scaling(n_vertices, epsilons, values) -> FitResult:
    """Fit values = A · sqrt(N ln N) / ε^c over all (N, ε) points at once.

    Regresses ln(values / sqrt(N ln N)) on ln(1/ε); ``exponent`` is c and
    ``prefactor`` is A.
    """
    n = np.asarray(n_vertices, dtype=float)
    eps = np.asarray(epsilons, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0) or np.any(eps <= 0):
        raise FitError("joint fit needs positive values and epsilons")
    return fit_power_law(1.0 / eps, v / sqrt_nlogn(n), model="sqrt(N log N) / epsilon^c")
