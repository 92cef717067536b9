"""JSON report assembly.

Every result type converts to plain types (str, float, list, dict) here,
so the CLI and the tests see one wire format. Non-finite floats become
the strings ``"inf"``, ``"-inf"`` and ``"nan"``: strict JSON has no
spelling for them, and a report must load in any JSON reader.

`dumps` sorts keys and fixes indentation, which together with the fixed
grids upstream keeps repeated runs byte-identical.
"""

from __future__ import annotations

import json
import math
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from .bloomkerman import BKVerdict
from .classify import MembershipVerdict
from .config import Settings
from .integrate import ModularResult
from .verifier import NormReport, SharpnessResult, VerificationReport
from .weights import Certificate, WeightTriple

SCHEMA_VERSION = 1
TOOL_NAME = "py-hardy"


def _nominal(x: Any) -> Any:
    """Coerce a possibly-ufloat value to a plain float."""
    if x is None:
        return None
    nominal = getattr(x, "nominal_value", None)
    return float(nominal) if nominal is not None else x


def plain(x: Any) -> Any:
    """Recursively turn ``x`` into JSON-safe plain types."""
    if isinstance(x, Enum):
        return x.value
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, np.ndarray):
        return plain(x.tolist())
    if getattr(getattr(x, "dtype", None), "kind", None) == "b":
        return bool(x)
    if isinstance(x, float) or hasattr(x, "nominal_value") or hasattr(x, "dtype"):
        v = float(_nominal(x))
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, Mapping):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    raise TypeError(f"cannot serialise {type(x).__name__} into a report")


def modular_dict(m: ModularResult) -> Dict[str, Any]:
    out = {
        "value": m.value,
        "status": m.status,
        "abs_error_estimate": m.abs_error_estimate,
        "evaluations": m.evaluations,
    }
    if m.converged:
        out["display"] = str(m.as_ufloat())
    return out


def triple_dict(t: WeightTriple) -> Dict[str, Any]:
    return t.describe()


def certificate_dict(c: Certificate) -> Dict[str, Any]:
    return {
        "b1": c.b1,
        "b2": c.b2,
        "L": c.L,
        "verdict": c.verdict,
        "C": c.C,
        "C_tilde": c.C_tilde,
        "certified": c.certified,
        "active_class": c.active_class,
        "d_M": c.d_M,
        "D_M": c.D_M,
        "attained_at": {"b1": c.b1_at, "b2": c.b2_at, "L": c.L_at},
        "notes": list(c.notes),
    }


def membership_dict(m: Optional[MembershipVerdict], with_trace: bool = False) -> Any:
    if m is None:
        return None
    out: Dict[str, Any] = {
        "in_Rplus": m.in_Rplus,
        "in_Rminus": m.in_Rminus,
        "method": m.method,
    }
    if with_trace:
        out["theta_trace"] = [{"s": s, "R": R, "theta": th} for s, R, th in m.theta_trace]
    return out


def verification_dict(v: VerificationReport) -> Dict[str, Any]:
    # plain() unwraps the ufloat to its nominal J/H
    with_error = v.ratio_with_error
    return {
        "function": v.function,
        "J": modular_dict(v.J),
        "H": modular_dict(v.H),
        "ratio": v.ratio if with_error is None else with_error,
        "ratio_error_estimate": None if with_error is None else with_error.std_dev,
        "C_certified": v.C_certified,
        "holds": v.holds,
        "membership": membership_dict(v.membership),
        "diagnostics": list(v.diagnostics),
    }


def norm_dict(n: NormReport) -> Dict[str, Any]:
    return {
        "function": n.function,
        "lhs": n.lhs,
        "rhs": n.rhs,
        "ratio": n.ratio,
        "C_tilde": n.C_tilde,
        "holds": n.holds,
        "diagnostics": list(n.diagnostics),
    }


def bk_dict(v: BKVerdict) -> Dict[str, Any]:
    return {
        "status": v.status,
        "witness": None if v.witness is None else {"eps": v.witness[0], "y": v.witness[1]},
        "B_found": v.B_found,
        "certified": v.certified,
        "eps_grid": list(v.eps_grid),
        "y_grid": list(v.y_grid),
        "B_reading": v.B_reading,
    }


def sharpness_dict(s: SharpnessResult, C: Optional[float]) -> Dict[str, Any]:
    out = {
        "best_ratio": s.best_ratio,
        "best_params": dict(s.best_params),
        "evaluations": s.evaluations,
        "exhausted": s.exhausted,
        "skipped": s.skipped,
        "C": C,
    }
    if C and math.isfinite(s.best_ratio):
        out["fraction_of_C"] = s.best_ratio / C
    return out


def run_report(
    command: str,
    settings: Settings,
    input_echo: Mapping[str, Any],
    sections: Mapping[str, Any],
    diagnostics: Sequence[str] = (),
    exit_code: int = 0,
    timing: Optional[Mapping[str, float]] = None,
) -> Dict[str, Any]:
    """The top-level report document.

    ``sections`` holds the command's payload (certificate, verifications,
    BK verdict, ...) already converted with the ``*_dict`` helpers.
    """
    from . import __version__

    report: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": command,
        "input": dict(input_echo),
        "exit_code": exit_code,
        "diagnostics": list(diagnostics),
        "ledger": settings.ledger(),
    }
    report.update(sections)
    if timing is not None:
        report["timing"] = dict(timing)
    return plain(report)


def dumps(report: Mapping[str, Any]) -> str:
    return json.dumps(plain(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def error_report(
    command: str, settings: Settings, input_echo: Mapping[str, Any], exc: BaseException, code: int
) -> Dict[str, Any]:
    diagnostics: List[str] = [f"{type(exc).__name__}: {error_message(exc)}"]
    return run_report(command, settings, input_echo, {}, diagnostics, code)


def error_message(exc: BaseException) -> str:
    # KeyError wraps its message in quotes
    if isinstance(exc, KeyError) and exc.args:
        return str(exc.args[0])
    return str(exc)
