"""Weighted modulars ∫ M(|g(x)|)·e^{−φ(x)} dx over subintervals of (0, ∞).

The integral is computed in t = ln x, where power weights become
exponentials and Gaussian weights stay smooth:

    ∫_a^b M(|g(x)|) e^{−φ(x)} dx = ∫_{ln a}^{ln b} M(|g(e^t)|) e^{t − φ(e^t)} dt

A core window of width 2 around t = 0 (clipped to the interval) is
integrated with adaptive Gauss–Kronrod G7/K15 panels; infinite ends are
then covered by tail pieces of doubling width. A tail stops once two
consecutive pieces each fall below ``0.1 · rel_tol`` of the running total.
Divergence is declared when ``quad.divergence_steps`` successive tail pieces
each grow the total by more than ``quad.divergence_factor``, or when the
integrand overflows in a tail. Panels are kept sorted by position and
summed in that order, so results are reproducible bit for bit.

The Luxemburg norm is the K solving ∫M(|f|/K)e^{−φ} = 1. For homogeneous M
(pure powers) that is ``modular^{1/p}``; otherwise it is found by Brent
bisection on log K.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from uncertainties import UFloat, ufloat

from .config import DEFAULTS, Settings
from .nfunction import NFunction

logger = logging.getLogger(__name__)

RealFunction = Callable[[np.ndarray], np.ndarray]

# G7/K15 table: Kronrod nodes on [-1, 1]; Gauss weights are zero on the
# seven Kronrod-only nodes.
_XK = np.array(
    [
        -0.991455371120812639206854697526329,
        -0.949107912342758524526189684047851,
        -0.864864423359769072789712788640926,
        -0.741531185599394439863864773280788,
        -0.586087235467691130294144845693013,
        -0.405845151377397166906606412076961,
        -0.207784955007898467600689403773245,
        0.0,
        0.207784955007898467600689403773245,
        0.405845151377397166906606412076961,
        0.586087235467691130294144845693013,
        0.741531185599394439863864773280788,
        0.864864423359769072789712788640926,
        0.949107912342758524526189684047851,
        0.991455371120812639206854697526329,
    ]
)
_WK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
        0.204432940075298892414161999234649,
        0.190350578064785409913256402421014,
        0.169004726639267902826583426598550,
        0.140653259715525918745189590510238,
        0.104790010322250183839876322541518,
        0.063092092629978553290700663189204,
        0.022935322010529224963732008058970,
    ]
)
_WG = np.array(
    [
        0.0,
        0.129484966168869693270611432679082,
        0.0,
        0.279705391489276667901467771423780,
        0.0,
        0.381830050505118944950369775488975,
        0.0,
        0.417959183673469387755102040816327,
        0.0,
        0.381830050505118944950369775488975,
        0.0,
        0.279705391489276667901467771423780,
        0.0,
        0.129484966168869693270611432679082,
        0.0,
    ]
)
_EPS = np.finfo(float).eps

# |t| beyond this makes e^t leave double range.
_T_CAP = 700.0
# Tails of an integral that is still zero are followed at least this far.
_T_MIN_REACH = 40.0


class QuadStatus(str, Enum):
    CONVERGED = "converged"
    DIVERGES_AT_ZERO = "diverges_at_zero"
    DIVERGES_AT_INFINITY = "diverges_at_infinity"
    TOLERANCE_NOT_MET = "tolerance_not_met"


class QuadratureError(RuntimeError):
    """A quantity that needs a converged integral did not get one."""


@dataclass(frozen=True)
class ModularResult:
    """Outcome of `weighted_modular`.

    ``value`` is finite exactly when ``status`` is ``converged``; it is
    ``inf`` for a divergence and ``nan`` when the tolerance was not met.
    """

    value: float
    status: QuadStatus
    abs_error_estimate: float
    evaluations: int = 0

    def __post_init__(self) -> None:
        if math.isfinite(self.value) != (self.status is QuadStatus.CONVERGED):
            raise ValueError(
                f"ModularResult value {self.value!r} inconsistent with status {self.status.value}"
            )

    @property
    def converged(self) -> bool:
        return self.status is QuadStatus.CONVERGED

    @property
    def diverges(self) -> bool:
        return self.status in (QuadStatus.DIVERGES_AT_ZERO, QuadStatus.DIVERGES_AT_INFINITY)

    def as_ufloat(self) -> UFloat:
        """``value ± abs_error_estimate`` as an uncertainties ufloat."""
        return ufloat(self.value, self.abs_error_estimate)


# ----------------------------------------------------------------------------
# Panels
# ----------------------------------------------------------------------------


@dataclass
class _Run:
    value: float = 0.0
    error: float = 0.0
    evaluations: int = 0
    ok: bool = True
    bad_t: Optional[float] = None


def _kronrod(F: RealFunction, lo: np.ndarray, hi: np.ndarray):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    t = center[:, None] + half[:, None] * _XK[None, :]
    with np.errstate(all="ignore"):
        fx = np.asarray(F(t.ravel()), dtype=float).reshape(t.shape)
    finite = np.isfinite(fx)
    if not finite.all():
        row, col = np.argwhere(~finite)[0]
        return None, None, float(t[row, col])
    k = half * (fx @ _WK)
    g = half * (fx @ _WG)
    mean = (fx @ _WK) / 2.0
    resasc = half * (np.abs(fx - mean[:, None]) @ _WK)
    resabs = half * (np.abs(fx) @ _WK)
    diff = np.abs(k - g)
    with np.errstate(all="ignore"):
        scaled = np.where(
            (resasc > 0) & (diff > 0),
            resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5),
            diff,
        )
    err = np.maximum(scaled, 50.0 * _EPS * resabs)
    return k, err, None


def _adaptive(F: RealFunction, a: float, b: float, rel_tol: float, budget: int) -> _Run:
    """Adaptive G7/K15 on the finite t-interval [a, b]."""
    run = _Run()
    if b <= a:
        return run
    edges = np.linspace(a, b, 9)
    lo, hi = edges[:-1], edges[1:]
    k, err, bad = _kronrod(F, lo, hi)
    run.evaluations += 15 * len(lo)
    if bad is not None:
        run.ok, run.bad_t = False, bad
        return run
    while True:
        total = float(np.sum(k))
        error = float(np.sum(err))
        if error <= rel_tol * abs(total) or error == 0.0:
            run.value, run.error = total, error
            return run
        if run.evaluations >= budget:
            run.value, run.error, run.ok = total, error, False
            return run
        width_ok = (hi - lo) > 64.0 * _EPS * np.maximum(1.0, np.abs(lo))
        split = (err > rel_tol * abs(total) / len(k)) & width_ok
        if not split.any():
            worst = int(np.argmax(np.where(width_ok, err, -1.0)))
            if not width_ok[worst]:
                run.value, run.error, run.ok = total, error, False
                return run
            split[worst] = True
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        k_new, err_new, bad = _kronrod(F, new_lo, new_hi)
        run.evaluations += 15 * len(new_lo)
        if bad is not None:
            run.ok, run.bad_t = False, bad
            return run
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        k = np.concatenate([k[keep], k_new])
        err = np.concatenate([err[keep], err_new])
        order = np.argsort(lo, kind="stable")
        lo, hi, k, err = lo[order], hi[order], k[order], err[order]


# ----------------------------------------------------------------------------
# Modular
# ----------------------------------------------------------------------------


def _as_function(fn: Union[RealFunction, float, None]) -> RealFunction:
    if fn is None:
        return lambda x: np.zeros_like(x)
    if isinstance(fn, (int, float)):
        value = float(fn)
        return lambda x: np.full_like(x, value)
    return fn


def _integrand(g: RealFunction, M: NFunction, phi: RealFunction) -> RealFunction:
    def F(t: np.ndarray) -> np.ndarray:
        x = np.exp(t)
        gx = np.abs(np.asarray(g(x), dtype=float))
        Mg = np.asarray(M.value(gx), dtype=float)
        ph = np.asarray(phi(x), dtype=float)
        with np.errstate(all="ignore"):
            w = np.exp(t - ph)
            return np.where(Mg == 0, 0.0, Mg * w)

    return F


def weighted_modular(
    g: Union[RealFunction, float],
    M: NFunction,
    phi: Union[RealFunction, float, None],
    a: float = 0.0,
    b: float = math.inf,
    rel_tol: Optional[float] = None,
    *,
    settings: Optional[Settings] = None,
) -> ModularResult:
    """∫_a^b M(|g(x)|)·e^{−φ(x)} dx with divergence detection.

    Args:
        g: Function of x (an `Expression` or any vectorised callable), or a
            constant.
        M: The N-function.
        phi: Log-weight; ``None`` for Lebesgue measure.
        a, b: Interval, ``0 <= a < b <= inf``.
        rel_tol: Relative tolerance in (1e-12, 1e-2); default ``quad.rel_tol``.

    Raises:
        DomainError: ``g`` or ``phi`` left their domain at a quadrature node.
        ValueError: invalid interval or tolerance.
    """
    settings = settings or DEFAULTS
    rel_tol = settings.quad_rel_tol if rel_tol is None else float(rel_tol)
    if not 1e-12 < rel_tol < 1e-2:
        raise ValueError(f"rel_tol must lie in (1e-12, 1e-2), got {rel_tol!r}")
    if not (0.0 <= a <= b):
        raise ValueError(f"interval must satisfy 0 <= a <= b, got ({a!r}, {b!r})")
    if a == b:
        return ModularResult(0.0, QuadStatus.CONVERGED, 0.0)

    F = _integrand(_as_function(g), M, _as_function(phi))
    ta = -math.inf if a == 0 else math.log(a)
    tb = math.inf if math.isinf(b) else math.log(b)
    budget = settings.quad_panel_budget

    center = min(max(0.0, ta), tb)
    core_lo, core_hi = max(ta, center - 1.0), min(tb, center + 1.0)
    core = _adaptive(F, core_lo, core_hi, rel_tol, budget)
    evaluations = core.evaluations
    if not core.ok:
        if core.bad_t is not None:
            status = (
                QuadStatus.DIVERGES_AT_INFINITY
                if core.bad_t >= 0.5 * (core_lo + core_hi)
                else QuadStatus.DIVERGES_AT_ZERO
            )
            logger.warning("modular: integrand overflow at x=%g", math.exp(core.bad_t))
            return ModularResult(math.inf, status, math.inf, evaluations)
        return _not_met(evaluations, "core window")

    total, error = core.value, core.error
    growth_streak = 0
    for direction in (+1, -1):
        start = core_hi if direction > 0 else core_lo
        end = tb if direction > 0 else ta
        diverged = (
            QuadStatus.DIVERGES_AT_INFINITY if direction > 0 else QuadStatus.DIVERGES_AT_ZERO
        )
        width = 1.0
        small_streak = 0
        while (end - start) * direction > 0:
            stop = start + direction * width
            stop = min(stop, end) if direction > 0 else max(stop, end)
            stop = max(-_T_CAP, min(_T_CAP, stop))
            lo, hi = (start, stop) if direction > 0 else (stop, start)
            piece = _adaptive(F, lo, hi, rel_tol, budget - evaluations)
            evaluations += piece.evaluations
            if piece.bad_t is not None:
                logger.warning(
                    "modular: integrand overflow at x=%g; declaring %s",
                    math.exp(piece.bad_t),
                    diverged.value,
                )
                return ModularResult(math.inf, diverged, math.inf, evaluations)
            if not piece.ok:
                return _not_met(evaluations, "tail piece")
            previous = total
            total += piece.value
            error += piece.error
            if previous > 0 and total > settings.quad_divergence_factor * previous:
                growth_streak += 1
            else:
                growth_streak = 0
            if growth_streak >= settings.quad_divergence_steps:
                logger.warning(
                    "modular: %d successive tail pieces grew the total by > %g; %s",
                    growth_streak,
                    settings.quad_divergence_factor,
                    diverged.value,
                )
                return ModularResult(math.inf, diverged, math.inf, evaluations)
            if piece.value <= 0.1 * rel_tol * abs(total):
                small_streak += 1
            else:
                small_streak = 0
            reached = abs(stop) >= _T_MIN_REACH or total > 0
            start = stop
            width *= 2.0
            if small_streak >= 2 and reached:
                error += piece.value
                break
            if abs(stop) >= _T_CAP and (end - start) * direction > 0:
                if piece.value > 0.1 * rel_tol * abs(total):
                    return _not_met(evaluations, "tail beyond the representable range")
                break
        growth_streak = 0

    logger.debug("modular = %.17g (+/- %.3g, %d evaluations)", total, error, evaluations)
    return ModularResult(total, QuadStatus.CONVERGED, error, evaluations)


def _not_met(evaluations: int, where: str) -> ModularResult:
    logger.warning("modular: tolerance not met in %s after %d evaluations", where, evaluations)
    return ModularResult(math.nan, QuadStatus.TOLERANCE_NOT_MET, math.inf, evaluations)


# ----------------------------------------------------------------------------
# Norms
# ----------------------------------------------------------------------------


def luxemburg_norm(
    f: Union[RealFunction, float],
    M: NFunction,
    phi: Union[RealFunction, float, None],
    a: float = 0.0,
    b: float = math.inf,
    *,
    method: str = "auto",
    settings: Optional[Settings] = None,
) -> float:
    """Luxemburg norm inf{K > 0 : ∫M(|f|/K)e^{−φ} ≤ 1} on (a, b).

    Args:
        method: ``"auto"`` uses ``modular^{1/p}`` for homogeneous M and
            bisection otherwise; ``"bisection"`` always bisects.

    Returns:
        The norm; ``0.0`` for f ≡ 0 and ``inf`` when the modular of f/K
        diverges for every probed K.

    Raises:
        QuadratureError: a modular did not converge, or bisection did not
            bracket the root.
    """
    if method not in ("auto", "bisection"):
        raise ValueError(f"method must be 'auto' or 'bisection', got {method!r}")
    settings = settings or DEFAULTS
    fn = _as_function(f)

    def modular(K: float) -> ModularResult:
        return weighted_modular(
            lambda x: np.asarray(fn(x), dtype=float) / K, M, phi, a, b, settings=settings
        )

    base = modular(1.0)
    if base.status is QuadStatus.TOLERANCE_NOT_MET:
        raise QuadratureError("Luxemburg norm: modular of f did not converge")
    if base.converged and base.value == 0.0:
        return 0.0
    if method == "auto" and M.degree is not None:
        return math.inf if base.diverges else base.value ** (1.0 / M.degree)
    if base.diverges and math.isfinite(M.D_M):
        # Under Δ₂ the modular of f/K is finite for one K iff for all K.
        return math.inf

    # Bracket the root of log(modular(e^s)) in s = log K.
    s = 0.0
    current = base
    for _ in range(200):
        if current.converged:
            break
        s += 1.0
        current = modular(math.exp(s))
        if current.status is QuadStatus.TOLERANCE_NOT_MET:
            raise QuadratureError("Luxemburg norm: modular did not converge while bracketing")
    else:
        logger.warning("Luxemburg norm: modular infinite for every probed K; norm is +inf")
        return math.inf

    def h(log_k: float) -> float:
        res = modular(math.exp(log_k))
        if not res.converged:
            if res.diverges:
                return math.inf
            raise QuadratureError("Luxemburg norm: modular did not converge during bisection")
        if res.value == 0.0:
            return -math.inf
        return math.log(res.value)

    lo = hi = s
    value = h(s)
    step = math.log(2.0)
    for _ in range(2000):
        if value > 0:
            lo, hi = hi, hi + step
            value = h(hi)
            if value <= 0:
                break
        else:
            lo, hi = lo - step, lo
            value = h(lo)
            if value > 0:
                break
    else:
        raise QuadratureError("Luxemburg norm: bisection did not bracket the norm")
    if not (h(lo) > 0 >= h(hi)):
        raise QuadratureError("Luxemburg norm: bisection did not bracket the norm")
    root = brentq(h, lo, hi, xtol=settings.norm_rel_tol, rtol=4 * _EPS, maxiter=200)
    return math.exp(root)


def dual_norm_bounds(
    f: Union[RealFunction, float],
    Mstar: NFunction,
    a: float = 0.0,
    b: float = math.inf,
    *,
    settings: Optional[Settings] = None,
) -> Tuple[float, float]:
    """Bracket of the dual (Orlicz) norm of f w.r.t. Lebesgue measure on (a, b).

    ``Mstar`` is the N-function whose Luxemburg norm is taken. With
    ``Lux = luxemburg_norm(f, Mstar)`` the bracket is ``[Lux/2, Lux]``, from
    the two-sided equivalence ``‖f‖_(M) ≤ ‖f‖_M ≤ 2‖f‖_(M)``.
    """
    lux = luxemburg_norm(f, Mstar, None, a, b, settings=settings)
    return 0.5 * lux, lux
