"""Integral conditions characterising the inequality for Hardy transforms.

Two screens are offered:

* the specialised Bloom–Kerman condition, read on an (ε, y) grid with one
  global constant B searched along a doubling ladder;
* the L^p two-factor supremum

      B = sup_r (∫_r^∞ ω^p e^{−φ}) · (∫_0^r e^{φ/(p−1)})^{p−1}

  for M = λ^p.

Both are grid-level findings, never proofs; `BKVerdict.certified` is False.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULTS, Settings
from .integrate import ModularResult, QuadStatus, weighted_modular
from .weights import WeightTriple

logger = logging.getLogger(__name__)


class BKStatus(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED_G_INFINITE = "violated_G_infinite"
    VIOLATED_NO_B = "violated_no_B"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class BKVerdict:
    status: BKStatus
    witness: Optional[Tuple[float, float]] = None
    B_found: Optional[float] = None
    certified: bool = False
    eps_grid: Tuple[float, ...] = ()
    y_grid: Tuple[float, ...] = ()
    B_reading: str = "single global B"

    def __post_init__(self) -> None:
        if self.status is BKStatus.VIOLATED_G_INFINITE and self.witness is None:
            raise ValueError("violated_G_infinite needs a witness (eps, y)")


def G_of(
    t: WeightTriple, eps: float, y: float, settings: Optional[Settings] = None
) -> ModularResult:
    """G(ε, y) = ∫_y^∞ M(ε·ω(x))·e^{−φ(x)} dx."""
    if not (eps > 0 and y > 0):
        raise ValueError(f"G_of needs eps > 0 and y > 0, got ({eps!r}, {y!r})")
    omega = t.omega
    return weighted_modular(
        lambda x: eps * omega(x), t.M, t.phi, float(y), math.inf, settings=settings
    )


def _lhs(
    t: WeightTriple, Mstar, G: float, B: float, eps: float, y: float, settings: Settings
) -> ModularResult:
    scale = G / (B * eps)
    phi = t.phi

    def g(x: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return scale * np.exp(phi(x))

    return weighted_modular(g, Mstar, phi, 0.0, float(y), settings=settings)


def bk_check(
    t: WeightTriple,
    eps_grid: Optional[Sequence[float]] = None,
    y_grid: Optional[Sequence[float]] = None,
    B_range: Optional[Tuple[float, float]] = None,
    settings: Optional[Settings] = None,
) -> BKVerdict:
    """Screen the Bloom–Kerman condition on a grid.

    For each (ε, y) in lexicographic order G(ε, y) is computed; a divergent
    G is reported with that point as witness. Otherwise the smallest B on the
    ladder ``lo·2^k ≤ hi`` with ∫_0^y M*(G·e^{φ}/(Bε))e^{−φ} ≤ G is found per
    point and the largest of those is ``B_found``.

    Raises:
        ValueError: an empty grid.
    """
    settings = settings or DEFAULTS
    eps_grid = tuple(settings.bk_eps_grid if eps_grid is None else eps_grid)
    y_grid = tuple(settings.bk_y_grid if y_grid is None else y_grid)
    lo, hi = settings.bk_B_range if B_range is None else B_range
    if not eps_grid or not y_grid:
        raise ValueError("bk_check needs non-empty eps and y grids")

    def verdict(status: BKStatus, **kw) -> BKVerdict:
        return BKVerdict(status, eps_grid=eps_grid, y_grid=y_grid, **kw)

    points = [(e, y) for e in eps_grid for y in y_grid]
    G_values = []
    for eps, y in points:
        G = G_of(t, eps, y, settings)
        if G.diverges:
            logger.info("BK: G(%g, %g) diverges", eps, y)
            return verdict(BKStatus.VIOLATED_G_INFINITE, witness=(eps, y))
        G_values.append(G)
    if any(G.status is QuadStatus.TOLERANCE_NOT_MET for G in G_values):
        return verdict(BKStatus.UNDETERMINED)

    ladder = [lo * 2.0**k for k in range(int(math.floor(math.log2(hi / lo))) + 1)]
    Mstar = t.M.dual()
    B_found = 0.0
    for (eps, y), G in zip(points, G_values):
        if G.value == 0:
            continue

        def passes(B: float) -> Optional[bool]:
            res = _lhs(t, Mstar, G.value, B, eps, y, settings)
            if res.status is QuadStatus.TOLERANCE_NOT_MET:
                return None
            return res.converged and res.value <= G.value

        top = passes(ladder[-1])
        if top is None:
            return verdict(BKStatus.UNDETERMINED)
        if not top:
            logger.info("BK: no B up to %g at (eps, y) = (%g, %g)", hi, eps, y)
            return verdict(BKStatus.VIOLATED_NO_B, witness=(eps, y))
        left, right = 0, len(ladder) - 1
        while left < right:
            mid = (left + right) // 2
            ok = passes(ladder[mid])
            if ok is None:
                return verdict(BKStatus.UNDETERMINED)
            if ok:
                right = mid
            else:
                left = mid + 1
        B_found = max(B_found, ladder[left])
    logger.info("BK satisfied on the grid with B = %g", B_found)
    return verdict(BKStatus.SATISFIED, B_found=B_found)


# ----------------------------------------------------------------------------
# L^p two-factor supremum
# ----------------------------------------------------------------------------


def _log_integral(
    log_f, a: float, b: float, samples: np.ndarray, t: WeightTriple, settings: Settings
) -> float:
    """log ∫_a^b e^{log_f(x)} dx, shifted by the sampled peak of log_f(x) + ln x."""
    with np.errstate(all="ignore"):
        peaks = log_f(samples) + np.log(samples)
    finite = peaks[np.isfinite(peaks)]
    if np.any(np.isposinf(peaks)):
        return math.inf
    if finite.size == 0:
        return -math.inf
    shift = float(finite.max())

    def phi(x: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return shift - log_f(x)

    res = weighted_modular(1.0, t.M, phi, a, b, settings=settings)
    if res.diverges:
        return math.inf
    if not res.converged:
        return math.nan
    return shift + math.log(res.value) if res.value > 0 else -math.inf


def muckenhoupt_b(p: float, t: WeightTriple, settings: Optional[Settings] = None) -> float:
    """Supremum over the probe window of the L^p two-factor product.

    Raises:
        ValueError: M is not λ^p.
    """
    settings = settings or DEFAULTS
    if t.M.degree is None or abs(t.M.degree - p) > 1e-12 or not p > 1:
        raise ValueError(f"muckenhoupt_b needs M = λ^p with p = {p!r} > 1, got {t.M.name!r}")
    omega, phi = t.omega, t.phi

    def log_first(x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return p * np.log(omega(x)) - phi(x)

    def log_second(x: np.ndarray) -> np.ndarray:
        return phi(x) / (p - 1.0)

    decades = math.log10(t.r_max / t.r_min)
    grid = np.logspace(math.log10(t.r_min), math.log10(t.r_max), int(round(10 * decades)) + 1)
    spread = 10.0 ** (np.arange(65) / 8.0)
    logs = []
    for r in grid:
        first = _log_integral(log_first, r, math.inf, r * spread, t, settings)
        second = _log_integral(log_second, 0.0, r, r / spread, t, settings)
        if math.isnan(first) or math.isnan(second):
            logger.warning("muckenhoupt: quadrature failed at r=%g", r)
            return math.nan
        if math.isinf(first) and first > 0 or math.isinf(second) and second > 0:
            logger.info("muckenhoupt: factor diverges at r=%g", r)
            return math.inf
        logs.append(first + (p - 1.0) * second)
    values = np.exp(np.array(logs))
    best = float(values.max())
    if best > settings.probe_divergence_cap:
        j = 10
        if values[-1] > values[-1 - j] or values[0] > values[j]:
            logger.warning(
                "muckenhoupt: product exceeds %g and still grows", settings.probe_divergence_cap
            )
            return math.inf
    return best
