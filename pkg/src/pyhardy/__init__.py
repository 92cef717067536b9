"""
pyhardy - Weighted Hardy inequalities in Orlicz spaces.

Features:
- Certificates: b1, b2, L and the constant C for a triple (M, φ, ω)
- Weighted modulars and Luxemburg norms on (0, ∞) with divergence detection
- Membership of test functions in R⁺ / R⁻ and the K/L sufficient criteria
- Bloom–Kerman grid screen and the L^p two-factor supremum
- A catalog of triples with known answers

Usage:
    import pyhardy
    from pyhardy import classical, gaussian_counterexample

    cert = pyhardy.certify(classical.triple)          # C = 4/9
    entry = pyhardy["classical:p=3,alpha=-1"]          # any member of a family

    t = pyhardy.WeightTriple.build("power:p=2", "-r^2/2", "r")
    report = pyhardy.verify(t, pyhardy.certify(t), pyhardy.laplace_function())
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .catalog import CatalogEntry

from . import catalog, registry
from .bloomkerman import BKStatus, BKVerdict, bk_check, muckenhoupt_b
from .catalog import load, stock_functions
from .classify import (
    Answer,
    Kind,
    MembershipVerdict,
    TestFunction,
    classify_membership,
    laplace_function,
)
from .config import DEFAULTS, Settings, load_settings
from .expr import DomainError, ExpressionSyntaxError, parse
from .integrate import ModularResult, QuadStatus, luxemburg_norm, weighted_modular
from .nfunction import NFunction, NotAnNFunctionError, make_power, parse_nfunction
from .verifier import Family, Holds, sharpness_search, verify
from .weights import AssumptionError, Certificate, Verdict, WeightTriple, certify

__version__ = "0.1.0"
__all__ = [
    "AssumptionError",
    "Answer",
    "BKStatus",
    "BKVerdict",
    "Certificate",
    "DEFAULTS",
    "DomainError",
    "ExpressionSyntaxError",
    "Family",
    "Holds",
    "Kind",
    "MembershipVerdict",
    "ModularResult",
    "NFunction",
    "NotAnNFunctionError",
    "QuadStatus",
    "Settings",
    "TestFunction",
    "Verdict",
    "WeightTriple",
    "bk_check",
    "catalog",
    "certify",
    "classify_membership",
    "laplace_function",
    "load",
    "load_settings",
    "luxemburg_norm",
    "make_power",
    "muckenhoupt_b",
    "parse",
    "parse_nfunction",
    "registry",
    "sharpness_search",
    "stock_functions",
    "verify",
    "weighted_modular",
]


def __getattr__(name: str) -> CatalogEntry:
    """
    Lazy-load catalog families by name, with default parameters.

    Usage:
        from pyhardy import classical   # classical:p=2,alpha=4
    """
    if name.startswith("_"):
        raise AttributeError(f"module 'pyhardy' has no attribute '{name}'")
    if name in catalog.family_names():
        return catalog.load(name)
    raise AttributeError(f"module 'pyhardy' has no attribute '{name}'")


# Module-level __getitem__ so ``pyhardy["classical:p=3,alpha=-1"]`` works;
# misses raise KeyError with close matches.
import sys as _sys  # noqa: E402
import types as _types  # noqa: E402


class _PyhardyModule(_types.ModuleType):
    def __getitem__(self, key: str) -> CatalogEntry:  # type: ignore[override]
        return catalog.load(key)

    def __contains__(self, key: str) -> bool:  # type: ignore[override]
        try:
            catalog.parse_name(key)
        except (KeyError, ValueError, TypeError):
            return False
        return True


_sys.modules[__name__].__class__ = _PyhardyModule


def __dir__() -> list[str]:
    return list(__all__) + catalog.family_names()
