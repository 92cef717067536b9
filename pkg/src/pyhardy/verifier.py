"""Both sides of the weighted inequality, compared against a certificate.

`verify` works with modulars (J = ∫M(ω|u|)e^{−φ} against H = ∫M(|u′|)e^{−φ}),
`norm_verify` with Luxemburg norms, and `sharpness_search` pushes a
parametrised family toward the certified constant.

A certificate only promises J ≤ C·H for u in the certified class, so a ratio
above C is a violation (``no``) only when membership in that class is
established; otherwise it is reported as ``out_of_class``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from uncertainties import UFloat

from .classify import (
    Answer,
    Kind,
    MembershipVerdict,
    TestFunction,
    classify_membership,
    hardy_subset_conclusion,
    quick_membership,
)
from .config import DEFAULTS, Settings
from .expr import DomainError
from .integrate import ModularResult, QuadratureError, QuadStatus, luxemburg_norm, weighted_modular
from .weights import Certificate, WeightTriple

logger = logging.getLogger(__name__)


class Holds(str, Enum):
    YES = "yes"
    NO = "no"
    VACUOUS = "vacuous"
    VIOLATED_DIVERGENCE = "violated_divergence"
    UNDETERMINED = "undetermined"
    OUT_OF_CLASS = "out_of_class"


class CounterexampleError(RuntimeError):
    """A family member inside the certified class beat the certified constant."""

    def __init__(self, message: str, params: Mapping[str, float], ratio: float):
        super().__init__(message)
        self.params = dict(params)
        self.ratio = ratio


@dataclass(frozen=True)
class VerificationReport:
    function: str
    J: ModularResult
    H: ModularResult
    ratio: Optional[float]
    C_certified: Optional[float]
    holds: Holds
    membership: Optional[MembershipVerdict]
    diagnostics: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.holds is Holds.VIOLATED_DIVERGENCE and not (
            self.J.diverges and self.H.converged
        ):
            raise ValueError("violated_divergence requires J infinite and H finite")

    @property
    def ratio_with_error(self) -> Optional[UFloat]:
        """J/H with both quadrature error estimates propagated; ``None`` unless both converged."""
        if self.ratio is None or not (self.J.converged and self.H.converged) or self.H.value == 0:
            return None
        return self.J.as_ufloat() / self.H.as_ufloat()


@dataclass(frozen=True)
class NormReport:
    function: str
    lhs: float
    rhs: float
    ratio: Optional[float]
    C_tilde: Optional[float]
    holds: Holds
    diagnostics: Tuple[str, ...] = ()


_FAILED = ModularResult(math.nan, QuadStatus.TOLERANCE_NOT_MET, math.inf)


def _membership(
    t: WeightTriple,
    cert: Certificate,
    u: TestFunction,
    H_finite: bool,
    settings: Settings,
) -> MembershipVerdict:
    direct = classify_membership(t, u, settings)
    if direct.answer(cert.active_class) is Answer.YES or cert.active_class is None:
        return direct
    for criterion in (
        lambda: quick_membership(t, u, settings),
        lambda: hardy_subset_conclusion(t, u, H_finite, settings),
    ):
        verdict = criterion()
        if verdict is not None and verdict.answer(cert.active_class) is Answer.YES:
            return MembershipVerdict(
                verdict.in_Rplus, verdict.in_Rminus, verdict.method, direct.theta_trace
            )
    return direct


def _decide(
    ratio: Optional[float],
    bound: Optional[float],
    membership: Optional[MembershipVerdict],
    active_class: Optional[str],
    rel_tol: float,
) -> Holds:
    if ratio is None:
        return Holds.YES
    if bound is None:
        return Holds.UNDETERMINED
    if ratio <= bound * (1.0 + rel_tol):
        return Holds.YES
    if membership is not None and membership.answer(active_class) is Answer.YES:
        return Holds.NO
    return Holds.OUT_OF_CLASS


def verify(
    t: WeightTriple,
    cert: Certificate,
    u: TestFunction,
    settings: Optional[Settings] = None,
) -> VerificationReport:
    """Compare J against C·H for one test function."""
    settings = settings or DEFAULTS
    omega, u_fn = t.omega, u.u
    try:
        J = weighted_modular(
            lambda x: omega(x) * np.asarray(u_fn(x), dtype=float), t.M, t.phi, settings=settings
        )
        H = weighted_modular(u.uprime, t.M, t.phi, settings=settings)
    except DomainError as exc:
        logger.warning("verify %s: %s", u.label, exc)
        return VerificationReport(
            u.label, _FAILED, _FAILED, None, cert.C, Holds.UNDETERMINED, None, (str(exc),)
        )

    membership = _membership(t, cert, u, H.converged, settings)
    notes = []
    if not (J.converged or J.diverges) or not (H.converged or H.diverges):
        notes.append("quadrature tolerance not met")
        holds, ratio = Holds.UNDETERMINED, None
    elif H.diverges:
        holds, ratio = Holds.VACUOUS, None
    elif J.diverges:
        holds, ratio = Holds.VIOLATED_DIVERGENCE, math.inf
    elif H.value == 0:
        ratio = None if J.value == 0 else math.inf
        holds = _decide(ratio, cert.C, membership, cert.active_class, settings.verify_rel_tol)
    else:
        ratio = J.value / H.value
        holds = _decide(ratio, cert.C, membership, cert.active_class, settings.verify_rel_tol)
    logger.info("verify %s: ratio=%s holds=%s", u.label, ratio, holds.value)
    return VerificationReport(u.label, J, H, ratio, cert.C, holds, membership, tuple(notes))


def norm_verify(
    t: WeightTriple,
    cert: Certificate,
    u: TestFunction,
    settings: Optional[Settings] = None,
    membership: Optional[MembershipVerdict] = None,
) -> NormReport:
    """Compare ‖ωu‖ against C̃·‖u′‖ in the Luxemburg norm of (M, e^{−φ}dr)."""
    settings = settings or DEFAULTS
    omega, u_fn = t.omega, u.u
    try:
        lhs = luxemburg_norm(
            lambda x: omega(x) * np.asarray(u_fn(x), dtype=float), t.M, t.phi, settings=settings
        )
        rhs = luxemburg_norm(u.uprime, t.M, t.phi, settings=settings)
    except (QuadratureError, DomainError) as exc:
        logger.warning("norm_verify %s: %s", u.label, exc)
        return NormReport(
            u.label, math.nan, math.nan, None, cert.C_tilde, Holds.UNDETERMINED, (str(exc),)
        )

    if math.isinf(rhs):
        return NormReport(u.label, lhs, rhs, None, cert.C_tilde, Holds.VACUOUS)
    if math.isinf(lhs):
        return NormReport(u.label, lhs, rhs, math.inf, cert.C_tilde, Holds.VIOLATED_DIVERGENCE)
    if rhs == 0:
        ratio = None if lhs == 0 else math.inf
    else:
        ratio = lhs / rhs
    above = ratio is not None and cert.C_tilde is not None and ratio > cert.C_tilde
    if above and membership is None:
        membership = _membership(t, cert, u, True, settings)
    holds = _decide(ratio, cert.C_tilde, membership, cert.active_class, settings.verify_rel_tol)
    return NormReport(u.label, lhs, rhs, ratio, cert.C_tilde, holds)


# ----------------------------------------------------------------------------
# Sharpness
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Family:
    """A parametrised test-function family.

    ``template`` is an expression in r with ``{name}`` placeholders, one per
    entry of ``params`` (name -> (lo, hi)).
    """

    name: str
    template: str
    params: Mapping[str, Tuple[float, float]]
    kind: Kind = Kind.GENERIC

    def __post_init__(self) -> None:
        if not self.params:
            raise ValueError(f"family {self.name!r} has no parameters")
        for key, (lo, hi) in self.params.items():
            if not lo <= hi:
                raise ValueError(f"family {self.name!r}: range of {key!r} is empty ({lo}, {hi})")

    def member(self, params: Mapping[str, float]) -> TestFunction:
        missing = set(self.params) - set(params)
        if missing:
            raise KeyError(f"family {self.name!r} needs values for {sorted(missing)}")
        text = self.template.format(**{k: f"({float(v)!r})" for k, v in params.items()})
        label = ",".join(f"{k}={float(params[k]):g}" for k in self.params)
        return TestFunction.from_text(text, kind=self.kind, name=f"{self.name}[{label}]")


@dataclass(frozen=True)
class SharpnessResult:
    best_ratio: float
    best_params: Dict[str, float]
    evaluations: int
    exhausted: bool
    skipped: int = 0


class _BudgetExhausted(Exception):
    pass


@dataclass
class _Search:
    t: WeightTriple
    cert: Certificate
    family: Family
    budget: int
    settings: Settings
    evaluations: int = 0
    skipped: int = 0
    best_ratio: float = -math.inf
    best_params: Dict[str, float] = field(default_factory=dict)
    cache: Dict[Tuple[float, ...], float] = field(default_factory=dict)

    def ratio(self, params: Dict[str, float]) -> float:
        key = tuple(params[k] for k in self.family.params)
        if key in self.cache:
            return self.cache[key]
        if self.evaluations >= self.budget:
            raise _BudgetExhausted
        self.evaluations += 1
        value = self._evaluate(params)
        self.cache[key] = value
        return value

    def _evaluate(self, params: Dict[str, float]) -> float:
        u = self.family.member(params)
        report = verify(self.t, self.cert, u, self.settings)
        in_class = (
            report.membership is not None
            and report.membership.answer(self.cert.active_class) is Answer.YES
        )
        if not in_class:
            self.skipped += 1
            logger.debug("sharpness: %s skipped (membership not established)", u.label)
            return -math.inf
        if report.ratio is None or not math.isfinite(report.ratio):
            return -math.inf
        assert self.cert.C is not None
        if report.ratio > self.cert.C * (1.0 + self.settings.verify_rel_tol):
            raise CounterexampleError(
                f"{u.label}: ratio {report.ratio:.12g} exceeds C = {self.cert.C:.12g}",
                params,
                report.ratio,
            )
        if report.ratio > self.best_ratio:
            self.best_ratio, self.best_params = report.ratio, dict(params)
        return report.ratio


def sharpness_search(
    t: WeightTriple,
    cert: Certificate,
    family: Family,
    budget: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> SharpnessResult:
    """Coordinate search over the family maximising J/H.

    Each coordinate is searched with a bounded Brent/golden step after both
    ends of its range are evaluated.

    Raises:
        ValueError: the certificate has no constant.
        CounterexampleError: an in-class member exceeds C·(1 + verify.rel_tol).
    """
    settings = settings or DEFAULTS
    if cert.C is None:
        raise ValueError(
            "sharpness_search needs a certificate with a constant (verdict != neither)"
        )
    budget = settings.sharpness_budget if budget is None else int(budget)
    search = _Search(t, cert, family, budget, settings)
    current = {k: 0.5 * (lo + hi) for k, (lo, hi) in family.params.items()}
    exhausted = False
    try:
        for _ in range(3):
            before = search.best_ratio
            for key, (lo, hi) in family.params.items():
                if lo == hi:
                    current[key] = lo
                    search.ratio(dict(current))
                    continue

                def objective(value: float, key: str = key) -> float:
                    trial = dict(current, **{key: float(value)})
                    r = search.ratio(trial)
                    return -r if math.isfinite(r) else math.inf

                for end in (lo, hi):
                    objective(end)
                res = minimize_scalar(
                    objective, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6}
                )
                candidates = [(objective(v), v) for v in (lo, hi, float(res.x))]
                current[key] = min(candidates)[1]
            if search.best_ratio <= before * (1 + 1e-9) and math.isfinite(before):
                break
    except _BudgetExhausted:
        exhausted = True
        logger.warning("sharpness: budget of %d evaluations exhausted", budget)
    best = search.best_ratio if math.isfinite(search.best_ratio) else math.nan
    logger.info(
        "sharpness %s: best ratio %.12g after %d evaluations",
        family.name,
        best,
        search.evaluations,
    )
    return SharpnessResult(best, search.best_params, search.evaluations, exhausted, search.skipped)
