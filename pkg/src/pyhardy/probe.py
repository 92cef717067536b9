"""Extrema of a function of r > 0 over a log-spaced probe grid.

One scheme serves every infimum/supremum in the package: Simonenko
indices, the b-infima, the L-supremum and the sup of φ″/φ′².

1. Evaluate on the grid (vectorised).
2. Refine around the best grid point with a bounded golden/Brent search in
   log r over the two bracketing cells.
3. Estimate the limits at both ends of the window by Richardson
   extrapolation over the last decade, assuming an O(1/r) approach at
   infinity and an O(r) approach at zero.

The result is the best of the three. Non-finite grid values are reported,
not silently dropped: ``ProbeResult.finite`` is false and ``offending``
holds the first bad r.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .expr import DomainError

logger = logging.getLogger(__name__)

ArrayFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProbeResult:
    """Extremum found by `extremum`.

    Attributes:
        value: The extremum (may be ±inf).
        at: Where it was attained; ``0.0`` / ``inf`` for an end limit.
        finite: True when every grid value was finite.
        offending: First grid point with a non-finite value, if any.
    """

    value: float
    at: float
    finite: bool = True
    offending: Optional[float] = None

    def __float__(self) -> float:
        return self.value


def _points_per_decade(grid: np.ndarray) -> int:
    decades = math.log10(grid[-1] / grid[0])
    if decades <= 0:
        return 1
    return max(1, int(round((len(grid) - 1) / decades)))


def _scalar(f: ArrayFunction, r: float) -> float:
    try:
        with np.errstate(all="ignore"):
            return float(np.asarray(f(np.array([r])), dtype=float)[0])
    except DomainError:
        return math.nan


def end_limits(grid: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Richardson estimates of ``f(0+)`` and ``f(+inf)`` from grid values."""
    j = min(_points_per_decade(grid), len(grid) - 1)
    with np.errstate(all="ignore"):
        left = (10.0 * values[0] - values[j]) / 9.0
        right = (10.0 * values[-1] - values[-1 - j]) / 9.0
    return float(left), float(right)


def extremum(
    f: ArrayFunction,
    grid: np.ndarray,
    *,
    mode: Literal["min", "max"],
    divergence_cap: Optional[float] = None,
    refine: bool = True,
) -> ProbeResult:
    """Infimum (``mode="min"``) or supremum (``mode="max"``) of ``f`` on ``grid``.

    With ``divergence_cap`` set, a supremum beyond the cap whose values
    still increase over the last decade toward either end is reported as
    ``+inf`` (and an infimum below ``-cap`` decreasing toward an end as
    ``-inf``).
    """
    grid = np.asarray(grid, dtype=float)
    with np.errstate(all="ignore"):
        values = np.asarray(f(grid), dtype=float)
    sign = 1.0 if mode == "min" else -1.0
    s = sign * values

    finite_mask = np.isfinite(values)
    offending = None if finite_mask.all() else float(grid[~finite_mask][0])
    if offending is not None:
        logger.debug("probe: non-finite value at r=%g", offending)

    # An infinite value in the extremal direction decides the answer.
    extreme = np.isinf(s) & (s < 0)
    if extreme.any():
        i = int(np.flatnonzero(extreme)[0])
        return ProbeResult(float(values[i]), float(grid[i]), False, offending)

    if not finite_mask.any():
        return ProbeResult(math.nan, math.nan, False, offending)

    masked = np.where(finite_mask, s, np.inf)
    i = int(np.argmin(masked))
    best, at = float(masked[i]), float(grid[i])

    if refine and 0 < i < len(grid) - 1:
        lo, hi = math.log(grid[i - 1]), math.log(grid[i + 1])
        def objective(t: float) -> float:
            v = _scalar(f, math.exp(t))
            return sign * v if math.isfinite(v) else math.inf

        res = minimize_scalar(
            objective,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if math.isfinite(res.fun) and res.fun < best:
            logger.debug("probe: refined %s from %g to %g", mode, sign * best, sign * res.fun)
            best, at = float(res.fun), math.exp(float(res.x))

    if finite_mask[0] and finite_mask[-1] and len(grid) > 2:
        left, right = end_limits(grid, values)
        for limit, where in ((left, 0.0), (right, math.inf)):
            if math.isfinite(limit) and sign * limit < best:
                best, at = sign * limit, where

    value = sign * best
    if divergence_cap is not None and abs(value) > divergence_cap:
        j = min(_points_per_decade(grid), len(grid) - 1)
        growing_right = s[-1] < s[-1 - j]
        growing_left = s[0] < s[j]
        near_right = at == math.inf or at >= grid[-1 - j]
        near_left = at == 0.0 or at <= grid[j]
        if (near_right and growing_right) or (near_left and growing_left):
            logger.warning("probe: %s exceeds %g with a diverging trend", mode, divergence_cap)
            value = -sign * math.inf
    return ProbeResult(value, at, offending is None, offending)
