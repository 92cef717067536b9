"""Membership of test functions in the classes R⁺ and R⁻.

u belongs to R⁺ (R⁻) when some s_n → 0, R_n → ∞ give

    lim (h^u(R_n)e^{−φ(R_n)} − h^u(s_n)e^{−φ(s_n)}) ≥ 0   (≤ 0)

with h^u = M(ω|u|)/φ′. The direct test walks s_n = 1e−2·2^{−n},
R_n = 1e2·2^n and reads the trend of the last few terms. The sufficient
criteria (decaying φ′ with bounded u; Hardy transforms with bounded K or L
near the relevant end) are offered alongside.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erf

from .config import DEFAULTS, Settings
from .expr import Const, DomainError, Expression, mul, parse
from .integrate import QuadratureError, dual_norm_bounds
from .weights import WeightTriple, sup_L

logger = logging.getLogger(__name__)

RealFunction = Callable[[np.ndarray], np.ndarray]


class Kind(str, Enum):
    HARDY_TRANSFORM = "hardy_transform"
    CONJUGATE_HARDY_TRANSFORM = "conjugate_hardy_transform"
    GENERIC = "generic"


class Answer(str, Enum):
    YES = "yes"
    NO = "no"
    UNDETERMINED = "undetermined"


class Method(str, Enum):
    DIRECT_LIMIT = "direct_limit"
    DECAYING_PHI_PRIME = "decaying_phi_prime"
    HARDY_K_BOUND = "hardy_k_bound"
    CONJUGATE_L_BOUND = "conjugate_l_bound"
    COMPACT_SUPPORT = "compact_support"


class BoundStatus(str, Enum):
    BOUNDED_NEAR_ZERO = "bounded_near_zero"
    BOUNDED_NEAR_INFINITY = "bounded_near_infinity"
    UNBOUNDED = "unbounded"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class TestFunction:
    """A test function u with its derivative.

    ``u`` and ``uprime`` are expressions or vectorised callables; ``kind``
    records whether u vanishes at 0 (Hardy transform) or at ∞ (conjugate
    Hardy transform).
    """

    __test__ = False  # not a pytest class

    u: Union[Expression, RealFunction]
    uprime: Union[Expression, RealFunction]
    kind: Kind = Kind.GENERIC
    name: str = ""

    @classmethod
    def from_text(
        cls,
        u: str,
        uprime: Optional[str] = None,
        kind: Union[Kind, str] = Kind.GENERIC,
        name: str = "",
    ) -> "TestFunction":
        """Parse u (and u′, derived symbolically when omitted)."""
        expr = parse(u)
        derivative = expr.derivative() if uprime is None else parse(uprime)
        return cls(expr, derivative, Kind(kind), name or expr.text)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return self.u.text if isinstance(self.u, Expression) else repr(self.u)

    def dilate(self, lam: float) -> "TestFunction":
        """u(λ·), whose derivative is λ·u′(λ·)."""
        lam = float(lam)
        if not lam > 0:
            raise ValueError(f"dilation factor must be positive, got {lam!r}")
        name = f"{self.label}@{lam:g}"
        if isinstance(self.u, Expression) and isinstance(self.uprime, Expression):
            scaled = self.uprime.dilate(lam)
            uprime = Expression(mul(Const(lam), scaled.root), scaled.variable)
            return TestFunction(self.u.dilate(lam), uprime, self.kind, name)
        u, up = self.u, self.uprime
        return TestFunction(
            lambda x: u(lam * np.asarray(x, dtype=float)),
            lambda x: lam * np.asarray(up(lam * np.asarray(x, dtype=float)), dtype=float),
            self.kind,
            name,
        )

    def check_derivative(
        self, grid: Optional[np.ndarray] = None, rtol: float = 1e-5
    ) -> bool:
        """Compare u′ with central differences of u where both are defined."""
        r = np.logspace(-3, 3, 61) if grid is None else np.asarray(grid, dtype=float)
        ok = True
        for x in r:
            h = 1e-6 * x
            try:
                with np.errstate(all="ignore"):
                    ends = np.asarray(self.u(np.array([x - h, x + h])), dtype=float)
                    exact = float(np.asarray(self.uprime(np.array([x])), dtype=float)[0])
            except DomainError:
                continue
            fd = (ends[1] - ends[0]) / (2 * h)
            if not (math.isfinite(fd) and math.isfinite(exact)):
                continue
            if abs(fd - exact) > rtol * max(1.0, abs(exact), abs(fd)):
                logger.debug(
                    "derivative mismatch for %s at r=%g: %g vs %g", self.label, x, fd, exact
                )
                ok = False
        return ok


def laplace_function() -> TestFunction:
    """u(r) = ∫₀^r e^{−τ²}dτ = (√π/2)·erf(r), a Hardy transform."""
    return TestFunction(
        lambda x: 0.5 * math.sqrt(math.pi) * erf(np.asarray(x, dtype=float)),
        parse("exp(-r^2)"),
        Kind.HARDY_TRANSFORM,
        "laplace",
    )


@dataclass(frozen=True)
class MembershipVerdict:
    in_Rplus: Answer
    in_Rminus: Answer
    method: Method
    theta_trace: Tuple[Tuple[float, float, float], ...] = field(default=(), repr=False)

    def answer(self, active_class: Optional[str]) -> Answer:
        if active_class == "R+":
            return self.in_Rplus
        if active_class == "R-":
            return self.in_Rminus
        return Answer.UNDETERMINED


# ----------------------------------------------------------------------------
# Boundary term
# ----------------------------------------------------------------------------


def _values(fn, x: np.ndarray) -> np.ndarray:
    try:
        with np.errstate(all="ignore"):
            return np.asarray(fn(x), dtype=float)
    except DomainError:
        return np.full_like(x, np.nan)


def _log_M(t: WeightTriple, log_arg: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        if t.M.degree is not None:
            return t.M.degree * log_arg
        return np.log(np.asarray(t.M.value(np.exp(log_arg)), dtype=float))


def h_value(t: WeightTriple, u: TestFunction, r: float) -> float:
    """h^u(r) = M(ω(r)|u(r)|)/φ′(r)."""
    x = np.array([float(r)])
    arg = t.omega.evaluate_array(x) * np.abs(np.asarray(u.u(x), dtype=float))
    return float(np.asarray(t.M.value(arg), dtype=float)[0] / t.phi1.evaluate_array(x)[0])


def boundary_term(t: WeightTriple, u: TestFunction, r) -> np.ndarray:
    """h^u(r)·e^{−φ(r)}, evaluated in log space; NaN where u or the weights are undefined."""
    x = np.atleast_1d(np.asarray(r, dtype=float))
    uv = np.abs(_values(u.u, x))
    w = _values(lambda v: t.omega.evaluate_array(v), x)
    p1 = _values(lambda v: t.phi1.evaluate_array(v), x)
    ph = _values(lambda v: t.phi.evaluate_array(v), x)
    with np.errstate(all="ignore"):
        log_arg = np.log(w) + np.log(uv)
        log_bt = _log_M(t, log_arg) - np.log(np.abs(p1)) - ph
        out = np.where((uv == 0) | (w == 0), 0.0, np.sign(p1) * np.exp(log_bt))
    bad = np.isnan(uv) | np.isnan(w) | np.isnan(p1) | np.isnan(ph)
    return np.where(bad, np.nan, out)


def theta_sequence(
    t: WeightTriple, u: TestFunction, settings: Optional[Settings] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(s_n, R_n, θ_n) for n = 0..classify.terms."""
    settings = settings or DEFAULTS
    n = np.arange(settings.classify_terms + 1, dtype=float)
    s = 1e-2 * 2.0**-n
    R = 1e2 * 2.0**n
    with np.errstate(all="ignore"):
        theta = boundary_term(t, u, R) - boundary_term(t, u, s)
    return s, R, theta


def _tends_to_zero(mags: np.ndarray, abs_tol: float) -> bool:
    if mags[-1] == 0:
        return True
    if mags[-1] > abs_tol or len(mags) < 3:
        return False
    steps = np.diff(mags)
    if not np.all(steps < 0):
        return False
    # geometric tail: each step a fixed fraction q < 1 of the previous one
    q = steps[1:] / steps[:-1]
    if not np.all((q > 0) & (q < 1)):
        return False
    limit = mags[-1] + steps[-1] * q[-1] / (1 - q[-1])
    return abs(limit) <= abs_tol


def _trend(window: np.ndarray, abs_tol: float) -> Tuple[Answer, Answer]:
    if np.isnan(window).any():
        return Answer.UNDETERMINED, Answer.UNDETERMINED
    mags = np.abs(window)
    nonneg, nonpos = bool(np.all(window >= 0)), bool(np.all(window <= 0))
    if (nonneg or nonpos) and _tends_to_zero(mags, abs_tol):
        return Answer.YES, Answer.YES
    if np.all(np.diff(mags) <= 0) and mags[-1] <= 1e-8 * mags[0]:
        return Answer.YES, Answer.YES
    if not (nonneg or nonpos):
        return Answer.UNDETERMINED, Answer.UNDETERMINED
    with np.errstate(invalid="ignore"):
        steps = np.diff(mags)
    growing = bool(np.all((steps >= 0) | np.isinf(mags[1:])))
    shrinking = bool(np.all(steps <= 0))
    if not (growing or shrinking):
        return Answer.UNDETERMINED, Answer.UNDETERMINED
    strict = bool(np.all(mags > 0)) and growing
    opposite = Answer.NO if strict else Answer.UNDETERMINED
    if nonneg:
        return Answer.YES, opposite
    return opposite, Answer.YES


def classify_membership(
    t: WeightTriple, u: TestFunction, settings: Optional[Settings] = None
) -> MembershipVerdict:
    """Direct test along the geometric sequences; compact support short-circuits to both."""
    settings = settings or DEFAULTS
    s, R, theta = theta_sequence(t, u, settings)
    trace = tuple((float(a), float(b), float(c)) for a, b, c in zip(s, R, theta))
    ends = np.concatenate([_values(u.u, s), _values(u.u, R)])
    if np.all(ends == 0):
        return MembershipVerdict(Answer.YES, Answer.YES, Method.COMPACT_SUPPORT, trace)
    plus, minus = _trend(theta[-settings.classify_window :], settings.classify_theta_abs_tol)
    logger.debug("membership of %s: R+=%s R-=%s", u.label, plus.value, minus.value)
    return MembershipVerdict(plus, minus, Method.DIRECT_LIMIT, trace)


# ----------------------------------------------------------------------------
# Sufficient criteria
# ----------------------------------------------------------------------------


def _decays(values: np.ndarray) -> bool:
    mags = np.abs(values)
    return bool(
        np.all(np.isfinite(mags))
        and mags[-1] < 1e-6
        and np.all(np.diff(mags) <= 1e-12 * mags[:-1])
    )


def _bounded(values: np.ndarray, cap: float) -> bool:
    return bool(
        np.all(np.isfinite(values))
        and values.max() <= cap
        and values[-1] <= values[0] + 1e-9 * abs(values[0]) + 1e-12
    )


def _end_bounded(t: WeightTriple, u: TestFunction, x: np.ndarray) -> bool:
    uv = np.abs(_values(u.u, x))
    ph = _values(lambda v: t.phi.evaluate_array(v), x)
    with np.errstate(divide="ignore"):
        log_weighted = np.where(uv == 0, -np.inf, np.log(uv) - ph)
    log_weighted = np.where(np.isneginf(log_weighted), -745.0, log_weighted)
    return _bounded(uv, 1e6) and _bounded(log_weighted, math.log(1e6))


def quick_membership(
    t: WeightTriple, u: TestFunction, settings: Optional[Settings] = None
) -> Optional[MembershipVerdict]:
    """Decaying-φ′ criterion; ``None`` when its hypotheses do not verify."""
    settings = settings or DEFAULTS
    if not math.isfinite(sup_L(t, settings)):
        return None
    k = np.arange(20, settings.classify_terms + 1, dtype=float)
    for x, at_infinity in ((2.0**k, True), (2.0**-k, False)):
        p1 = _values(lambda v: t.phi1.evaluate_array(v), x)
        if not (_decays(p1) and _end_bounded(t, u, x)):
            continue
        plus = (t.sign < 0) if at_infinity else (t.sign > 0)
        end = "∞" if at_infinity else "0"
        logger.debug("decaying-φ′ criterion applies at the %s end", end)
        if plus:
            return MembershipVerdict(Answer.YES, Answer.UNDETERMINED, Method.DECAYING_PHI_PRIME)
        return MembershipVerdict(Answer.UNDETERMINED, Answer.YES, Method.DECAYING_PHI_PRIME)
    return None


def _inverse_f_phi(t: WeightTriple) -> RealFunction:
    d, D = t.M.d_M, t.M.D_M

    def inv(x: np.ndarray) -> np.ndarray:
        ph = t.phi.evaluate_array(x)
        with np.errstate(over="ignore"):
            return np.exp(np.where(ph >= 0, ph / d, ph / D))

    return inv


def _phi_norm(t: WeightTriple, a: float, b: float, settings: Settings) -> Tuple[float, float]:
    try:
        return dual_norm_bounds(_inverse_f_phi(t), t.M.dual(), a, b, settings=settings)
    except QuadratureError as exc:
        logger.warning("A/B norm on (%g, %g) failed: %s", a, b, exc)
        return math.nan, math.nan


def A_phi(t: WeightTriple, r: float, settings: Optional[Settings] = None) -> Tuple[float, float]:
    """Bounds on the M*-norm of 1/f_φ over (0, r), f_φ = c⁻¹(e^{−φ})."""
    if not r > 0:
        raise ValueError(f"A_phi requires r > 0, got {r!r}")
    return _phi_norm(t, 0.0, float(r), settings or DEFAULTS)


def B_phi(t: WeightTriple, r: float, settings: Optional[Settings] = None) -> Tuple[float, float]:
    """Bounds on the M*-norm of 1/f_φ over (r, ∞)."""
    if not r > 0:
        raise ValueError(f"B_phi requires r > 0, got {r!r}")
    return _phi_norm(t, float(r), math.inf, settings or DEFAULTS)


def _kl_values(
    t: WeightTriple, points: Sequence[float], norm, settings: Settings
) -> np.ndarray:
    out = []
    for r in points:
        upper = norm(t, r, settings)[1]
        if not math.isfinite(upper):
            out.append(upper)
            continue
        x = np.array([r])
        w = float(t.omega.evaluate_array(x)[0])
        p1 = abs(float(t.phi1.evaluate_array(x)[0]))
        ph = float(t.phi.evaluate_array(x)[0])
        arg = w * upper
        if arg == 0:
            out.append(0.0)
            continue
        log_m = float(_log_M(t, np.array([math.log(arg)]))[0])
        with np.errstate(over="ignore"):
            out.append(float(np.exp(log_m - math.log(p1) - ph)))
    return np.array(out)


def k_values(t: WeightTriple, settings: Optional[Settings] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(r_k, K(r_k)) with r_k = 2^{−k} and K = M(ω·A_φ)/|φ′|·e^{−φ} (upper A_φ)."""
    settings = settings or DEFAULTS
    r = 2.0 ** -np.arange(1, settings.bounds_terms + 1, dtype=float)
    return r, _kl_values(t, r, A_phi, settings)


def l_values(t: WeightTriple, settings: Optional[Settings] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(R_k, L(R_k)) with R_k = 2^k and L = M(ω·B_φ)/|φ′|·e^{−φ} (upper B_φ)."""
    settings = settings or DEFAULTS
    r = 2.0 ** np.arange(1, settings.bounds_terms + 1, dtype=float)
    return r, _kl_values(t, r, B_phi, settings)


def _bound_status(values: np.ndarray, bounded: BoundStatus, cap: float) -> BoundStatus:
    if np.isnan(values).any():
        return BoundStatus.UNDETERMINED
    if np.isinf(values).any():
        return BoundStatus.UNBOUNDED
    tail = values[-10:]
    non_increasing = bool(np.all(tail[1:] <= tail[:-1] * (1 + 1e-6) + 1e-300))
    if values.max() < cap and non_increasing:
        return bounded
    if tail[-1] >= cap and not non_increasing:
        return BoundStatus.UNBOUNDED
    return BoundStatus.UNDETERMINED


def K_bound_check(t: WeightTriple, settings: Optional[Settings] = None) -> BoundStatus:
    settings = settings or DEFAULTS
    _, values = k_values(t, settings)
    status = _bound_status(values, BoundStatus.BOUNDED_NEAR_ZERO, settings.bounds_cap)
    logger.info("K bound check: %s", status.value)
    return status


def L_bound_check(t: WeightTriple, settings: Optional[Settings] = None) -> BoundStatus:
    settings = settings or DEFAULTS
    _, values = l_values(t, settings)
    status = _bound_status(values, BoundStatus.BOUNDED_NEAR_INFINITY, settings.bounds_cap)
    logger.info("L bound check: %s", status.value)
    return status


def hardy_subset_conclusion(
    t: WeightTriple,
    u: TestFunction,
    H_finite: bool,
    settings: Optional[Settings] = None,
) -> Optional[MembershipVerdict]:
    """Membership of a finite-energy Hardy transform from the K/L bounds.

    u ∈ H with K bounded near 0: φ′ > 0 gives R⁺, φ′ < 0 gives R⁻.
    u ∈ H* with L bounded near ∞: φ′ > 0 gives R⁻, φ′ < 0 gives R⁺.
    """
    if not H_finite or u.kind is Kind.GENERIC:
        return None
    settings = settings or DEFAULTS
    if u.kind is Kind.HARDY_TRANSFORM:
        if K_bound_check(t, settings) is not BoundStatus.BOUNDED_NEAR_ZERO:
            return None
        plus, method = t.sign > 0, Method.HARDY_K_BOUND
    else:
        if L_bound_check(t, settings) is not BoundStatus.BOUNDED_NEAR_INFINITY:
            return None
        plus, method = t.sign < 0, Method.CONJUGATE_L_BOUND
    if plus:
        return MembershipVerdict(Answer.YES, Answer.UNDETERMINED, method)
    return MembershipVerdict(Answer.UNDETERMINED, Answer.YES, method)
