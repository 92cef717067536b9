"""Weight triples (M, φ, ω) and their certificates.

For a triple the pointwise quantities

    b1(r) = 1 + φ″/φ′² − ω′/(ωφ′)·[d_M·1_G + D_M·1_F]
    b2(r) = −1 − φ″/φ′² + ω′/(ωφ′)·[d_M·1_F + D_M·1_G]

use the sign sets F = {ω ≠ 0, ω′φ′ > 0} and G = {ω ≠ 0, ω′φ′ < 0}. Condition
B1 asks inf b1 > 0 and L = sup ω/|φ′| < ∞ (B2 likewise with b2); either one
gives the modular constant C = c(L·D_M²/(b·d_M)) and the norm constant C + 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from .config import DEFAULTS, Settings
from .expr import DomainError, Expression, parse
from .nfunction import NFunction, NotAnNFunctionError, c_of, parse_nfunction
from .probe import ProbeResult, extremum

logger = logging.getLogger(__name__)

ExpressionLike = Union[Expression, str]


class AssumptionError(ValueError):
    """A triple violates one of its standing assumptions.

    Attributes:
        assumption: ``"M"``, ``"mu"`` (φ′ nonzero with constant sign) or
            ``"omega"`` (ω ≥ 0).
        at: Offending r, when there is one.
    """

    def __init__(self, assumption: str, message: str, at: Optional[float] = None):
        super().__init__(message)
        self.assumption = assumption
        self.at = at


class Verdict(str, Enum):
    B1 = "B1"
    B2 = "B2"
    BOTH = "both"
    NEITHER = "neither"


def _as_expression(value: ExpressionLike) -> Expression:
    return value if isinstance(value, Expression) else parse(value)


@dataclass(frozen=True)
class WeightTriple:
    """The data (M, φ, ω) of the inequality ∫M(ω|u|)e^{−φ} ≤ C∫M(|u′|)e^{−φ}.

    Use `WeightTriple.build` to construct from text; the derivative fields
    are then filled in symbolically. Validation runs on the probe grid.
    """

    M: NFunction
    phi: Expression
    phi1: Expression
    phi2: Expression
    omega: Expression
    omega1: Expression
    r_min: float = DEFAULTS.probe_r_min
    r_max: float = DEFAULTS.probe_r_max
    probe_points: int = DEFAULTS.probe_points
    name: str = ""
    sign: float = field(init=False, default=0.0)

    def __post_init__(self) -> None:
        if not 0 < self.r_min < self.r_max:
            raise ValueError(
                f"probe window must satisfy 0 < r_min < r_max, got [{self.r_min}, {self.r_max}]"
            )
        grid = self.grid()
        p1 = self.phi1.evaluate_array(grid)
        zero = p1 == 0
        if zero.any():
            at = float(grid[zero][0])
            raise AssumptionError(
                "mu", f"φ′ = {self.phi1.text} vanishes at r={at:g}; φ′ must never vanish", at
            )
        flips = np.flatnonzero(np.sign(p1[1:]) != np.sign(p1[0]))
        if flips.size:
            at = float(grid[flips[0] + 1])
            raise AssumptionError(
                "mu", f"φ′ = {self.phi1.text} changes sign near r={at:g}", at
            )
        w = self.omega.evaluate_array(grid)
        negative = w < 0
        if negative.any():
            at = float(grid[negative][0])
            raise AssumptionError("omega", f"ω = {self.omega.text} is negative at r={at:g}", at)
        object.__setattr__(self, "sign", float(np.sign(p1[0])))

    @classmethod
    def build(
        cls,
        M: Union[NFunction, str],
        phi: ExpressionLike,
        omega: ExpressionLike,
        *,
        settings: Optional[Settings] = None,
        r_min: Optional[float] = None,
        r_max: Optional[float] = None,
        name: str = "",
    ) -> "WeightTriple":
        """Parse, differentiate and validate.

        Raises:
            ExpressionSyntaxError: ``phi`` or ``omega`` does not parse.
            AssumptionError: M is not an N-function, φ′ vanishes or changes
                sign, or ω is negative somewhere on the probe grid.
            DomainError: φ, ω or a derivative is undefined at a probe point.
        """
        settings = settings or DEFAULTS
        if isinstance(M, str):
            try:
                M = parse_nfunction(M, settings)
            except NotAnNFunctionError as exc:
                raise AssumptionError("M", str(exc)) from exc
        phi_e = _as_expression(phi)
        omega_e = _as_expression(omega)
        phi1 = phi_e.derivative()
        return cls(
            M=M,
            phi=phi_e,
            phi1=phi1,
            phi2=phi1.derivative(),
            omega=omega_e,
            omega1=omega_e.derivative(),
            r_min=settings.probe_r_min if r_min is None else float(r_min),
            r_max=settings.probe_r_max if r_max is None else float(r_max),
            probe_points=settings.probe_points,
            name=name,
        )

    def grid(self) -> np.ndarray:
        return np.logspace(math.log10(self.r_min), math.log10(self.r_max), self.probe_points)

    def describe(self) -> dict:
        return {
            "M": self.M.name,
            "phi": self.phi.text,
            "omega": self.omega.text,
            "probe": [self.r_min, self.r_max, self.probe_points],
        }


@dataclass(frozen=True)
class Certificate:
    """Infima, supremum, verdict and constants for one triple.

    ``C`` is present iff the verdict is not ``neither``; ``active_class`` is
    ``"R+"`` for the B1 branch and ``"R-"`` for B2.
    """

    b1: float
    b2: float
    L: float
    verdict: Verdict
    C: Optional[float]
    C_tilde: Optional[float]
    certified: bool
    active_class: Optional[str] = None
    d_M: float = 1.0
    D_M: float = 1.0
    b1_at: float = math.nan
    b2_at: float = math.nan
    L_at: float = math.nan
    notes: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if (self.C is None) != (self.verdict is Verdict.NEITHER):
            raise ValueError(f"C must be present iff verdict != neither (verdict={self.verdict})")


# ----------------------------------------------------------------------------
# Pointwise quantities
# ----------------------------------------------------------------------------


def _terms(t: WeightTriple, r):
    x = np.asarray(r, dtype=float)
    p1 = t.phi1.evaluate_array(x)
    if np.any(p1 == 0):
        at = float(np.atleast_1d(x)[np.atleast_1d(p1) == 0][0])
        raise AssumptionError("mu", f"φ′ vanishes at r={at:g}", at)
    p2 = t.phi2.evaluate_array(x)
    w = t.omega.evaluate_array(x)
    w1 = t.omega1.evaluate_array(x)
    with np.errstate(all="ignore"):
        base = 1.0 + p2 / (p1 * p1)
        nonzero = w != 0
        product = w1 * p1
        cross = np.where(nonzero, w1 / (w * p1), 0.0)
    in_F = nonzero & (product > 0)
    in_G = nonzero & (product < 0)
    return x, base, cross, in_F, in_G


def _shape(x: np.ndarray, out: np.ndarray):
    return float(out) if x.ndim == 0 else out


def b1_at(t: WeightTriple, r):
    """b1(r); accepts a float or an array."""
    x, base, cross, in_F, in_G = _terms(t, r)
    out = base - cross * (t.M.d_M * in_G + t.M.D_M * in_F)
    return _shape(x, out)


def b2_at(t: WeightTriple, r):
    """b2(r); accepts a float or an array."""
    x, base, cross, in_F, in_G = _terms(t, r)
    out = -base + cross * (t.M.d_M * in_F + t.M.D_M * in_G)
    return _shape(x, out)


def _safe(fn):
    def wrapped(r: np.ndarray) -> np.ndarray:
        try:
            return fn(r)
        except DomainError:
            return np.full_like(np.asarray(r, dtype=float), np.nan)

    return wrapped


def _infimum(t: WeightTriple, which: str, settings: Settings) -> ProbeResult:
    fn = {"b1": b1_at, "b2": b2_at}.get(which)
    if fn is None:
        raise ValueError(f"which must be 'b1' or 'b2', got {which!r}")
    return extremum(_safe(lambda r: fn(t, r)), t.grid(), mode="min")


def infimum_b(t: WeightTriple, which: str = "b1", settings: Optional[Settings] = None) -> float:
    """inf_r b1(r) or inf_r b2(r) over the probe grid with refinement and end limits."""
    return _infimum(t, which, settings or DEFAULTS).value


def _ratio_L(t: WeightTriple):
    def ratio(r: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return t.omega.evaluate_array(r) / np.abs(t.phi1.evaluate_array(r))

    return _safe(ratio)


def _supremum_L(t: WeightTriple, settings: Settings) -> ProbeResult:
    return extremum(
        _ratio_L(t), t.grid(), mode="max", divergence_cap=settings.probe_divergence_cap
    )


def sup_L(t: WeightTriple, settings: Optional[Settings] = None) -> float:
    """L = sup ω/|φ′|; ``+inf`` when the values run past the divergence cap."""
    return _supremum_L(t, settings or DEFAULTS).value


@dataclass(frozen=True)
class PhiRatio:
    """Extrema of φ″/φ′² next to the ω = |φ′| thresholds.

    With ω = |φ′|, B1 holds iff ``sup < b1_threshold`` and B2 holds iff
    ``inf > b2_threshold``.
    """

    sup: float
    inf: float
    b1_threshold: float
    b2_threshold: float


def phi_ratio_extrema(t: WeightTriple, settings: Optional[Settings] = None) -> PhiRatio:
    def ratio(r: np.ndarray) -> np.ndarray:
        p1 = t.phi1.evaluate_array(r)
        return t.phi2.evaluate_array(r) / (p1 * p1)

    grid = t.grid()
    high = extremum(_safe(ratio), grid, mode="max")
    low = extremum(_safe(ratio), grid, mode="min")
    D, d = t.M.D_M, t.M.d_M
    return PhiRatio(
        sup=high.value,
        inf=low.value,
        b1_threshold=1.0 / (D - 1.0) if D > 1 else math.inf,
        b2_threshold=1.0 / (d - 1.0) if d > 1 else math.inf,
    )


def _constant(t: WeightTriple, L: float, b: float) -> float:
    return c_of(t.M, L * t.M.D_M**2 / (b * t.M.d_M))


def certify(t: WeightTriple, settings: Optional[Settings] = None) -> Certificate:
    """Decide B1/B2 and compute C, C̃ for ``t``."""
    settings = settings or DEFAULTS
    low1 = _infimum(t, "b1", settings)
    low2 = _infimum(t, "b2", settings)
    high = _supremum_L(t, settings)
    b1, b2, L = low1.value, low2.value, high.value
    tol = settings.certify_tol_pos
    bounded = math.isfinite(L)
    has_b1 = bounded and b1 > tol
    has_b2 = bounded and b2 > tol

    notes = ["φ′ sign constancy is checked on the probe grid only"]
    for label, probe in (("b1", low1), ("b2", low2), ("L", high)):
        if not probe.finite:
            notes.append(f"{label} is non-finite at r={probe.offending:g}")
            logger.warning("certify: %s non-finite at r=%g", label, probe.offending)

    C: Optional[float] = None
    active: Optional[str] = None
    if has_b1 and has_b2:
        verdict = Verdict.BOTH
        C1, C2 = _constant(t, L, b1), _constant(t, L, b2)
        C, active = (C1, "R+") if C1 <= C2 else (C2, "R-")
    elif has_b1:
        verdict, C, active = Verdict.B1, _constant(t, L, b1), "R+"
    elif has_b2:
        verdict, C, active = Verdict.B2, _constant(t, L, b2), "R-"
    else:
        verdict = Verdict.NEITHER

    certified = (
        t.M.indices_certified
        and low1.finite
        and low2.finite
        and high.finite
        and verdict is not Verdict.NEITHER
    )
    if not t.M.indices_certified:
        notes.append("indices are grid estimates")
    logger.info(
        "certify %s: b1=%.12g b2=%.12g L=%.12g verdict=%s C=%s",
        t.name or t.phi.text,
        b1,
        b2,
        L,
        verdict.value,
        C,
    )
    return Certificate(
        b1=b1,
        b2=b2,
        L=L,
        verdict=verdict,
        C=C,
        C_tilde=None if C is None else C + 1.0,
        certified=certified,
        active_class=active,
        d_M=t.M.d_M,
        D_M=t.M.D_M,
        b1_at=low1.at,
        b2_at=low2.at,
        L_at=high.at,
        notes=tuple(notes),
    )
