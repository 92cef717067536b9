"""Named weight triples with known answers.

Entries are addressed as ``family`` (defaults) or
``family:key=value,...``::

    load("classical:p=2,alpha=4").expected["C"].value   # 4/9
    load("gaussian_counterexample").expected["bk_status"].value

Templates and provenance live in ``data/catalog.toml``; expected values
come from `pyhardy.factories`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from . import registry
from .classify import TestFunction
from .config import DEFAULTS, Settings
from .facts import Fact, attach_values, parse_facts_table
from .factories import (
    classical_facts,
    gaussian_facts,
    log_phi_text,
    log_weights_facts,
    omega_phi_prime_facts,
    s_alpha_beta,
)
from .loader import load_functions, read_toml
from .search import unknown_name
from .verifier import Family
from .weights import WeightTriple

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"

__all__ = [
    "CatalogEntry",
    "family_names",
    "list_names",
    "load",
    "parse_name",
    "s_alpha_beta",
    "stock_functions",
]


@lru_cache(maxsize=1)
def _families() -> Dict[str, Dict[str, Any]]:
    data = read_toml(DATA_DIR / "catalog.toml")
    return {k: v for k, v in data.items() if isinstance(v, dict) and not k.startswith("_")}


@dataclass(frozen=True)
class CatalogEntry:
    """A catalog triple with its expected facts.

    Attributes:
        name: Canonical name (``"classical:p=2,alpha=4"``).
        family_name: Family key (``"classical"``).
        title: One-line description.
        params: Parameter values used.
        triple: The built `WeightTriple`.
        expected: Analytic facts with provenance.
        excluded: Stock functions documented to fail the inequality here.
    """

    name: str
    family_name: str
    title: str
    params: Dict[str, float]
    triple: WeightTriple
    expected: Dict[str, Fact]
    excluded: Tuple[str, ...] = ()
    extremal: Optional[Family] = field(default=None, repr=False)

    def family(self) -> Optional[Family]:
        """The extremal family for sharpness probes, when one is known."""
        return self.extremal

    def facts(self) -> List[str]:
        return [self.expected[k].describe() for k in sorted(self.expected)]


def _number(raw: str, name: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"Malformed value {raw!r} in catalog name {name!r}") from None


def parse_name(name: str) -> Tuple[str, Dict[str, float]]:
    """Split ``family:key=value,...`` into the family and a full parameter map.

    Raises:
        KeyError: unknown family or parameter (with close matches).
        ValueError: malformed ``key=value`` pairs.
    """
    if not isinstance(name, str):
        raise TypeError(f"catalog name must be a string, got {type(name).__name__}")
    family, _, rest = name.strip().partition(":")
    families = _families()
    if family not in families:
        raise unknown_name("catalog entry", name, families)
    defaults = {k: float(v) for k, v in families[family]["defaults"].items()}
    params = dict(defaults)
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep:
            raise ValueError(f"Malformed parameter {item!r} in catalog name {name!r}")
        if key not in defaults:
            miss = unknown_name(f"parameter of {family}", key, defaults).args[0]
            raise KeyError(f"{miss} (in catalog name {name!r})")
        params[key] = _number(raw.strip(), name)
    return family, params


def canonical_name(family: str, params: Mapping[str, float]) -> str:
    order = _families()[family]["defaults"]
    return family + ":" + ",".join(f"{k}={params[k]:g}" for k in order)


def _fill(template: str, values: Mapping[str, Any], wrap: bool = True) -> str:
    subs = {
        k: (f"({float(v)!r})" if wrap else f"{float(v)!r}") if isinstance(v, (int, float)) else v
        for k, v in values.items()
    }
    return template.format(**subs)


def _substitutions(family: str, params: Dict[str, float]) -> Dict[str, Any]:
    values: Dict[str, Any] = dict(params)
    if family in ("classical", "omega_phi_prime"):
        p, alpha = params["p"], params["alpha"]
        values["a"] = (p - 1.0 - alpha) / p
        values["abs_alpha"] = abs(alpha)
    if family == "log_weights":
        from .expr import parse

        values["phi_prime"] = (
            parse(log_phi_text(params["alpha"], params["beta"])).derivative().text
        )
    return values


def _expected_values(family: str, params: Dict[str, float], settings: Settings) -> Dict[str, Any]:
    if family == "classical":
        return classical_facts(params["p"], params["alpha"])
    if family == "omega_phi_prime":
        return omega_phi_prime_facts(params["p"], params["alpha"])
    if family == "log_weights":
        return log_weights_facts(params["alpha"], params["beta"], params["p"], settings)
    return gaussian_facts(params["p"])


def _extremal(
    family: str, spec: Dict[str, Any], params: Dict[str, float], values: Dict[str, Any]
) -> Optional[Family]:
    table = spec.get("extremal")
    if not table:
        return None
    if family == "gaussian_counterexample":
        key = "bumps"
    else:
        p, alpha = params["p"], params["alpha"]
        if alpha == p - 1.0:
            return None
        key = "above" if alpha > p - 1.0 else "below"
    raw = dict(table[key])
    template = raw.pop("template")
    # Member parameters stay as placeholders; everything else is fixed now.
    for k, v in values.items():
        if k not in raw and isinstance(v, (int, float)):
            template = template.replace("{" + k + "}", f"({float(v)!r})")
    return Family(
        name=f"{family}.{key}",
        template=template,
        params={k: (float(lo), float(hi)) for k, (lo, hi) in raw.items()},
    )


def load(name: str, settings: Optional[Settings] = None) -> CatalogEntry:
    """Load a catalog entry by name (cached for default settings)."""
    family, params = parse_name(name)
    key = canonical_name(family, params)
    use_cache = settings is None or settings == DEFAULTS
    if use_cache:
        cached = registry.lookup(family, params)
        if cached is not None:
            return cached
    settings = settings or DEFAULTS
    spec = _families()[family]
    values = _substitutions(family, params)
    triple = WeightTriple.build(
        _fill(spec["M"], values, wrap=False),
        _fill(spec["phi"], values),
        _fill(spec["omega"], values),
        settings=settings,
        name=key,
    )
    facts = parse_facts_table(spec.get("_facts", {}))
    expected = attach_values(facts, _expected_values(family, params, settings))
    entry = CatalogEntry(
        name=key,
        family_name=family,
        title=spec.get("title", family),
        params=params,
        triple=triple,
        expected=expected,
        excluded=tuple(spec.get("excluded", ())),
        extremal=_extremal(family, spec, params, values),
    )
    logger.info("catalog entry %s loaded", key)
    return registry.register(entry) if use_cache else entry


def family_names() -> List[str]:
    return list(_families())


def list_names() -> List[str]:
    """Canonical default name of every family."""
    return [
        canonical_name(f, {k: float(v) for k, v in spec["defaults"].items()})
        for f, spec in _families().items()
    ]


def stock_functions() -> List[TestFunction]:
    """The 12 stock test functions, in file order."""
    return load_functions(DATA_DIR / "stock_functions.toml")
