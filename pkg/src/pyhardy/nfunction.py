"""N-functions, Simonenko indices, the comparison function and conjugates.

An `NFunction` carries M and M′ as expressions in λ, the Simonenko indices
(d_M, D_M), i.e. the best constants in

    d_M·M(λ)/λ ≤ M′(λ) ≤ D_M·M(λ)/λ,

and, when known, the Young conjugate M*(y) = sup_x (x·y − M(x)) in closed
form. Catalog constructors (`make_power`, `make_power_sum`) have analytic
indices and are marked certified; anything built from a user expression
gets grid estimates and ``indices_certified=False``, and every certificate
built on it inherits that flag.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .config import DEFAULTS, Settings
from .expr import DomainError, Expression, parse
from .probe import extremum

logger = logging.getLogger(__name__)

LAMBDA_VARIABLES = ("x", "λ", "lam", "r")

_POWER_RE = re.compile(r"^\s*power\s*:\s*p\s*=\s*([^,\s]+)\s*$")
_POWER_SUM_RE = re.compile(r"^\s*power_sum\s*:\s*p\s*=\s*([^,\s]+)\s*,\s*q\s*=\s*([^,\s]+)\s*$")


class NotAnNFunctionError(ValueError):
    """The function violates assumption (M): not an N-function with finite indices."""


@dataclass(frozen=True)
class Diagnostic:
    """One line of `check_assumption_M` output."""

    name: str
    passed: bool
    detail: str = ""


def _fmt(value: float) -> str:
    return f"{value:g}"


@dataclass(frozen=True, eq=False)
class NFunction:
    """An N-function with its index data.

    Attributes:
        name: Catalog string (``"power:p=2"``) or the expression text.
        M: M as an expression in λ; ``None`` for a numeric conjugate.
        Mprime: M′, derived symbolically.
        d_M: Lower Simonenko index (≥ 1).
        D_M: Upper Simonenko index (≥ d_M; may be inf for a conjugate).
        indices_certified: True only for analytic indices.
        conjugate: Closed-form M* when known.
        degree: p when M(cλ) = c^p·M(λ) for all c > 0 (pure powers).
        primal: For a numeric conjugate, the N-function it conjugates.
    """

    name: str
    M: Optional[Expression]
    Mprime: Optional[Expression]
    d_M: float
    D_M: float
    indices_certified: bool = False
    conjugate: Optional[Expression] = None
    degree: Optional[float] = None
    primal: Optional["NFunction"] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not 1.0 <= self.d_M <= self.D_M:
            raise NotAnNFunctionError(
                f"{self.name}: indices must satisfy 1 <= d_M <= D_M, "
                f"got ({self.d_M}, {self.D_M})"
            )
        if self.M is None and self.primal is None:
            raise ValueError(f"{self.name}: needs either M or a primal N-function")

    def __repr__(self) -> str:
        return f"NFunction({self.name!r}, d_M={self.d_M:g}, D_M={self.D_M:g})"

    # -- evaluation ----------------------------------------------------------

    def value(self, lam: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """M(λ), vectorised."""
        if self.M is not None:
            return self.M(lam)
        assert self.primal is not None
        out = self.primal.conjugate_array(np.asarray(lam, dtype=float))
        return float(out) if np.ndim(lam) == 0 else out

    def derivative(self, lam: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """M′(λ), vectorised."""
        if self.Mprime is not None:
            return self.Mprime(lam)
        assert self.primal is not None
        out = self.primal.maximizer(np.asarray(lam, dtype=float))
        return float(out) if np.ndim(lam) == 0 else out

    def maximizer(self, y: np.ndarray) -> np.ndarray:
        """The x attaining sup_x (x·y − M(x)), i.e. the solution of M′(x) = y.

        Vectorised bisection; M′ is nondecreasing so the bracket is exact.

        Raises:
            NotAnNFunctionError: no bracket below 1e300 (M not superlinear).
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.zeros_like(y)
        pos = y > 0
        if not pos.any():
            return out
        target = y[pos]
        lo = np.zeros_like(target)
        hi = np.ones_like(target)
        while True:
            short = np.asarray(self.derivative(hi)) < target
            if not short.any():
                break
            if np.any(hi[short] > 1e300):
                raise NotAnNFunctionError(
                    f"{self.name}: conjugate maximisation failed to bracket "
                    f"for y={target[short][0]!r}"
                )
            hi = np.where(short, hi * 2.0, hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.derivative(mid)) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-16 * hi):
                break
        out[pos] = 0.5 * (lo + hi)
        return out

    def conjugate_array(self, y: np.ndarray) -> np.ndarray:
        """M*(y), vectorised; closed form when available."""
        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise ValueError(f"conjugate requires y >= 0, got {y[y < 0].flat[0]!r}")
        if self.conjugate is not None:
            return np.asarray(self.conjugate(y), dtype=float)
        flat = y.reshape(-1)
        x = self.maximizer(flat)
        with np.errstate(all="ignore"):
            vals = np.where(x > 0, x * flat - np.asarray(self.value(x)), 0.0)
        return np.maximum(vals, 0.0).reshape(y.shape)

    def dual(self) -> "NFunction":
        """M* as an `NFunction`; indices d* = D/(D−1), D* = d/(d−1)."""
        d_star = self.D_M / (self.D_M - 1.0) if math.isfinite(self.D_M) else 1.0
        D_star = self.d_M / (self.d_M - 1.0) if self.d_M > 1.0 else math.inf
        name = f"conj({self.name})"
        if self.conjugate is not None:
            return NFunction(
                name=name,
                M=self.conjugate,
                Mprime=self.conjugate.derivative(),
                d_M=d_star,
                D_M=D_star,
                indices_certified=self.indices_certified,
                conjugate=self.M,
                degree=self.degree / (self.degree - 1.0) if self.degree else None,
            )
        return NFunction(
            name=name,
            M=None,
            Mprime=None,
            d_M=d_star,
            D_M=D_star,
            indices_certified=self.indices_certified,
            primal=self,
        )


# ----------------------------------------------------------------------------
# Constructors
# ----------------------------------------------------------------------------


def make_power(p: float) -> NFunction:
    """M(λ) = λ^p with exact conjugate (p−1)(y/p)^{p/(p−1)} and d_M = D_M = p."""
    p = float(p)
    if not p > 1:
        raise NotAnNFunctionError(f"power:p={_fmt(p)} is not an N-function pair: need p > 1")
    q = p / (p - 1.0)
    M = parse(f"x^{p!r}", LAMBDA_VARIABLES)
    conj = parse(f"{p - 1.0!r}*(x/{p!r})^{q!r}", LAMBDA_VARIABLES)
    return NFunction(
        name=f"power:p={_fmt(p)}",
        M=M,
        Mprime=M.derivative(),
        d_M=p,
        D_M=p,
        indices_certified=True,
        conjugate=conj,
        degree=p,
    )


def make_power_sum(p: float, q: float) -> NFunction:
    """M(λ) = λ^p + λ^q; λM′/M moves monotonically between p and q."""
    p, q = float(p), float(q)
    if not (p > 1 and q > 1):
        raise NotAnNFunctionError(
            f"power_sum:p={_fmt(p)},q={_fmt(q)} is not an N-function: need p, q > 1"
        )
    M = parse(f"x^{p!r} + x^{q!r}", LAMBDA_VARIABLES)
    return NFunction(
        name=f"power_sum:p={_fmt(p)},q={_fmt(q)}",
        M=M,
        Mprime=M.derivative(),
        d_M=min(p, q),
        D_M=max(p, q),
        indices_certified=True,
    )


def _index_grid(settings: Settings) -> np.ndarray:
    return np.logspace(
        math.log10(settings.index_lam_min),
        math.log10(settings.index_lam_max),
        settings.index_points,
    )


def simonenko_indices(
    M: Expression, grid: Optional[np.ndarray] = None, settings: Optional[Settings] = None
) -> Tuple[float, float, bool]:
    """Grid estimate of (d_M, D_M) as inf/sup of λM′(λ)/M(λ).

    Returns ``(d_M, D_M, certified)``; ``certified`` is always False here,
    analytic indices come from the catalog constructors.

    Raises:
        NotAnNFunctionError: the ratio is undefined, drops below 1, or its
            supremum exceeds ``index.cap`` (Δ₂ fails).
    """
    settings = settings or DEFAULTS
    lam = _index_grid(settings) if grid is None else np.asarray(grid, dtype=float)
    Mprime = M.derivative()

    def ratio(x: np.ndarray) -> np.ndarray:
        return x * Mprime(x) / M(x)

    try:
        values = ratio(lam)
    except DomainError as exc:
        raise NotAnNFunctionError(f"M = {M.text!r}: {exc}") from exc
    bad = ~np.isfinite(values)
    if bad.any():
        raise NotAnNFunctionError(
            f"M = {M.text!r}: index ratio undefined at λ={float(lam[bad][0]):g}"
        )
    low = extremum(ratio, lam, mode="min")
    high = extremum(ratio, lam, mode="max")
    if low.value < 1.0 - 1e-9:
        raise NotAnNFunctionError(
            f"M = {M.text!r}: λM′/M = {low.value:.6g} < 1 at λ={low.at:g}; not an N-function"
        )
    if high.value > settings.index_cap:
        raise NotAnNFunctionError(
            f"M = {M.text!r}: upper index estimate {high.value:.6g} exceeds cap "
            f"{settings.index_cap:g}; Δ₂ fails"
        )
    d_M = max(1.0, low.value)
    D_M = max(d_M, high.value)
    logger.info("indices of %r estimated as (%.10g, %.10g), not certified", M.text, d_M, D_M)
    return d_M, D_M, False


def from_expression(text: str, settings: Optional[Settings] = None) -> NFunction:
    """N-function from a grammar expression in λ, with estimated indices."""
    M = parse(text, LAMBDA_VARIABLES)
    d_M, D_M, certified = simonenko_indices(M, settings=settings)
    logger.warning(
        "N-function %r uses grid-estimated indices; certificates are not certified", text
    )
    return NFunction(
        name=M.text, M=M, Mprime=M.derivative(), d_M=d_M, D_M=D_M, indices_certified=certified
    )


def parse_nfunction(text: str, settings: Optional[Settings] = None) -> NFunction:
    """Build from ``power:p=<real>``, ``power_sum:p=<real>,q=<real>`` or an expression."""
    m = _POWER_RE.match(text)
    if m:
        return make_power(_number(m.group(1), text))
    m = _POWER_SUM_RE.match(text)
    if m:
        return make_power_sum(_number(m.group(1), text), _number(m.group(2), text))
    if text.strip().startswith(("power:", "power_sum:")):
        raise ValueError(
            f"Malformed N-function catalog string {text!r}; expected "
            f"'power:p=<real>' or 'power_sum:p=<real>,q=<real>'"
        )
    return from_expression(text, settings)


def _number(raw: str, text: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"Malformed number {raw!r} in N-function {text!r}") from None


# ----------------------------------------------------------------------------
# Comparison function and conjugate
# ----------------------------------------------------------------------------


def c_of(M: NFunction, lam: float) -> float:
    """c(λ) = max(λ^{d_M}, λ^{D_M}); overflow is reported as inf."""
    if not lam > 0:
        if lam == 0:
            return 0.0
        raise ValueError(f"c_of requires λ >= 0, got {lam!r}")
    try:
        return max(lam**M.d_M, lam**M.D_M)
    except OverflowError:
        return math.inf


def c_inverse(M: NFunction, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Inverse of `c_of`: t^{1/d_M} for t ≤ 1, t^{1/D_M} above."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0):
        raise ValueError(f"c_inverse requires t > 0, got {t!r}")
    with np.errstate(all="ignore"):
        out = np.where(arr <= 1.0, arr ** (1.0 / M.d_M), arr ** (1.0 / M.D_M))
    return float(out) if np.ndim(t) == 0 else out


def conjugate_value(M: NFunction, y: float) -> float:
    """M*(y) = sup_x (x·y − M(x)); closed form when available."""
    if y < 0:
        raise ValueError(f"conjugate_value requires y >= 0, got {y!r}")
    return float(M.conjugate_array(np.array([float(y)]))[0])


def delta2_constant(M: NFunction, settings: Optional[Settings] = None) -> float:
    """Smallest K with M(2λ) ≤ K·M(λ) on the index grid."""
    lam = _index_grid(settings or DEFAULTS)
    with np.errstate(all="ignore"):
        ratio = np.asarray(M.value(2.0 * lam)) / np.asarray(M.value(lam))
    finite = ratio[np.isfinite(ratio)]
    if finite.size < ratio.size:
        return math.inf
    return float(finite.max())


def domination_constant(K1: float, K2: float) -> float:
    """Norm constant K₂(K₁+1) obtained when M₂(λ) ≤ K₁·M₁(K₂λ) for all λ."""
    if K1 < 0 or K2 <= 0:
        raise ValueError(f"domination constants need K1 >= 0, K2 > 0, got ({K1}, {K2})")
    return K2 * (K1 + 1.0)


# ----------------------------------------------------------------------------
# Assumption (M) diagnostics
# ----------------------------------------------------------------------------


def _loose_values(fn, lam: np.ndarray) -> np.ndarray:
    if isinstance(fn, Expression):
        return fn.evaluate_array(lam, strict=False)
    try:
        with np.errstate(all="ignore"):
            return np.asarray(fn(lam), dtype=float)
    except (DomainError, NotAnNFunctionError):
        return np.full_like(lam, np.nan)


def check_assumption_M(
    M: Union[NFunction, Expression, str], settings: Optional[Settings] = None
) -> List[Diagnostic]:
    """Report pass/fail for every part of assumption (M). Never raises on bad M.

    Checks: ``M(0)=0`` (as a limit), ``convex`` (M′ nondecreasing),
    ``superlinear`` (M(λ)/λ increasing along λ = 10^k), ``index_bracket`` (index
    bracket with the stored or estimated indices), ``delta2`` and
    ``conjugate_delta2`` (d_M > 1).
    """
    settings = settings or DEFAULTS
    lam = _index_grid(settings)
    if isinstance(M, str):
        M = parse(M, LAMBDA_VARIABLES)
    if isinstance(M, Expression):
        value_fn, deriv_fn = M, M.derivative()
        stored: Optional[Tuple[float, float]] = None
    else:
        value_fn = M.M if M.M is not None else M.value
        deriv_fn = M.Mprime if M.Mprime is not None else M.derivative
        stored = (M.d_M, M.D_M)

    Mv = _loose_values(value_fn, lam)
    Mp = _loose_values(deriv_fn, lam)
    with np.errstate(all="ignore"):
        ratio = lam * Mp / Mv
    ok = np.isfinite(ratio)
    out: List[Diagnostic] = []

    m_one = _loose_values(value_fn, np.array([1.0]))[0]
    m_small = Mv[0]
    zero_ok = bool(np.isfinite(m_small) and 0 <= m_small <= 1e-6 * max(1.0, abs(m_one)))
    out.append(Diagnostic("M(0)=0", zero_ok, f"M({lam[0]:g}) = {m_small:.3g}"))

    fin = np.isfinite(Mp)
    steps = np.diff(Mp[fin])
    convex_ok = bool(fin.sum() > 1 and np.all(steps >= -1e-9 * np.abs(Mp[fin][1:])))
    out.append(Diagnostic("convex", convex_ok, "M′ nondecreasing on the grid"))

    powers = 10.0 ** np.arange(0, 9)
    growth = _loose_values(value_fn, powers) / powers
    sup_ok = bool(
        np.all(np.isfinite(growth)) and np.all(np.diff(growth) > 0) and growth[-1] > growth[0]
    )
    out.append(Diagnostic("superlinear", sup_ok, "M(λ)/λ increasing along λ = 10^k"))

    if ok.any():
        est = (float(ratio[ok].min()), float(ratio[ok].max()))
    else:
        est = (math.nan, math.nan)
    d_M, D_M = stored if stored is not None else est
    with np.errstate(all="ignore"):
        lower = d_M * Mv / lam
        upper = D_M * Mv / lam
        slack = 1e-9 * np.abs(Mp)
        bracket = ok & (lower <= Mp + slack) & (Mp <= upper + slack)
    eq_ok = bool(ok.all() and bracket.all())
    source = "stored" if stored is not None else "estimated"
    out.append(Diagnostic("index_bracket", eq_ok, f"{source} indices ({d_M:.6g}, {D_M:.6g})"))

    # Δ₂: bounded index ratio. Overflow of M while the ratio is still growing
    # counts as unbounded.
    j = max(1, int(round((len(lam) - 1) / math.log10(lam[-1] / lam[0]))))
    D_est = est[1]
    truncated = not ok[-1]
    growing = False
    if truncated and ok.sum() > j:
        last = np.flatnonzero(ok)[-1]
        if last - j >= 0 and ok[last - j]:
            growing = bool(ratio[last] > 2.0 * ratio[last - j])
    with np.errstate(all="ignore"):
        doubled = _loose_values(value_fn, 2.0 * lam)
        d2_fin = np.isfinite(doubled) & np.isfinite(Mv) & ok
        d2_bound = bool(
            math.isfinite(D_M)
            and np.all(doubled[d2_fin] <= 2.0**D_M * Mv[d2_fin] * (1 + 1e-9))
        )
    delta2_ok = bool(
        math.isfinite(D_est) and D_est <= settings.index_cap and not growing and d2_bound
    )
    out.append(
        Diagnostic(
            "delta2", delta2_ok, f"sup λM′/M ≈ {D_est:.6g} (cap {settings.index_cap:g})"
        )
    )

    out.append(Diagnostic("conjugate_delta2", bool(d_M > 1.0 + 1e-12), f"d_M = {d_M:.6g}"))
    for diag in out:
        if not diag.passed:
            logger.info("assumption (M) check %s failed: %s", diag.name, diag.detail)
    return out
