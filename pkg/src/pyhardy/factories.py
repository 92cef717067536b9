"""Expected values for the catalog families.

Each builder takes the family parameters and returns the facts that hold
for that member, as plain values keyed like the ``_facts`` tables in
``data/catalog.toml``. Facts that do not apply to a member (a constant
when the verdict is ``neither``) are simply absent.

Example:
    >>> classical_facts(2.0, 4.0)["C"]
    0.4444444444444444
"""

from __future__ import annotations

import math
from typing import Any, Dict, Optional

from .config import DEFAULTS, Settings
from .expr import parse
from .probe import extremum


def _verdict(b1: float, b2: float) -> str:
    if b1 > 0 and b2 > 0:
        return "both"
    if b1 > 0:
        return "B1"
    if b2 > 0:
        return "B2"
    return "neither"


def classical_facts(p: float, alpha: float) -> Dict[str, Any]:
    """M = λ^p, φ = −α ln r, ω = 1/r."""
    if alpha == 0:
        raise ValueError("classical: alpha = 0 makes φ′ vanish")
    b1 = (alpha - (p - 1.0)) / alpha
    below = alpha < p - 1.0
    facts: Dict[str, Any] = {
        "b1": b1,
        "b2": -b1,
        "L": 1.0 / abs(alpha),
        "verdict": _verdict(b1, -b1),
        "A_finite": below,
        "K_bounded": "bounded_near_zero" if below else "unbounded",
        "L_bounded": "bounded_near_infinity" if alpha > p - 1.0 else "unbounded",
        "bk_status": "satisfied" if below else "violated_G_infinite",
        "muckenhoupt_B": (
            (p - 1.0) ** (p - 1.0) / (p - 1.0 - alpha) ** p if below else math.inf
        ),
    }
    if alpha != p - 1.0:
        facts["C"] = (p / abs(alpha - p + 1.0)) ** p
    return facts


def omega_phi_prime_facts(p: float, alpha: float) -> Dict[str, Any]:
    """M = λ^p, φ = −α ln r, ω = |φ′| = |α|/r."""
    if alpha == 0:
        raise ValueError("omega_phi_prime: alpha = 0 makes φ′ vanish")
    b1 = 1.0 + (1.0 - p) / alpha
    facts: Dict[str, Any] = {
        "phi_ratio": 1.0 / alpha,
        "b1": b1,
        "b2": -b1,
        "L": 1.0,
        "verdict": _verdict(b1, -b1),
    }
    if b1 != 0:
        facts["C"] = (p / abs(b1)) ** p
    return facts


def log_phi_text(alpha: float, beta: float) -> str:
    return f"-({float(alpha)!r})*ln(r) - ({float(beta)!r})*ln(ln(1+r))"


def s_alpha_beta(alpha: float, beta: float, settings: Optional[Settings] = None) -> float:
    """sup_r φ″/φ′² for φ = −α ln r − β ln ln(1+r), on the probe grid."""
    if not alpha > 0 or not beta >= 0:
        raise ValueError(f"s_alpha_beta needs alpha > 0 and beta >= 0, got ({alpha!r}, {beta!r})")
    settings = settings or DEFAULTS
    phi1 = parse(log_phi_text(alpha, beta)).derivative()
    phi2 = phi1.derivative()

    def ratio(r):
        d1 = phi1.evaluate_array(r)
        return phi2.evaluate_array(r) / (d1 * d1)

    return extremum(ratio, settings.probe_grid(), mode="max").value


def log_weights_facts(
    alpha: float, beta: float, p: float, settings: Optional[Settings] = None
) -> Dict[str, Any]:
    """M = λ^p, φ = −α ln r − β ln ln(1+r), ω = |φ′|."""
    s = s_alpha_beta(alpha, beta, settings)
    threshold = 1.0 + 1.0 / s if s > 0 else math.inf
    facts: Dict[str, Any] = {"s": s, "threshold": threshold, "L": 1.0}
    if p < threshold:
        b1 = 1.0 - (p - 1.0) * s
        facts.update(b1=b1, verdict="B1", C=(p / b1) ** p)
    return facts


def gaussian_facts(p: float) -> Dict[str, Any]:
    """M = λ^p, φ = −r²/2, ω = r."""
    return {
        "b1": 1.0,
        "L": 1.0,
        "verdict": "B1",
        "C": p**p,
        "bk_status": "violated_G_infinite",
        "laplace": "violated_divergence",
    }
