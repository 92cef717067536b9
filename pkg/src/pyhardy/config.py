"""Tolerance ledger.

Every numeric knob the pipeline uses lives in one frozen `Settings`
instance. The defaults below are the documented contract; reports embed
`Settings.ledger()` so a reader can see exactly which values produced a
number.

Overrides come from a TOML document whose tables mirror the dotted prefix
(``[quad] rel_tol = 1e-9``) or from a flat ``key = value`` file. Unknown
keys are rejected with close-match suggestions rather than ignored.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .search import unknown_name

logger = logging.getLogger(__name__)


def _log_grid(lo: float, hi: float, n: int) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.logspace(np.log10(lo), np.log10(hi), n))


@dataclass(frozen=True)
class Settings:
    """Numeric policy for probes, quadrature, classification and checks.

    Attribute names are the dotted ledger keys with ``.`` replaced by ``_``
    (``quad.rel_tol`` -> ``quad_rel_tol``).
    """

    probe_r_min: float = 1e-8
    probe_r_max: float = 1e8
    probe_points: int = 4001
    probe_divergence_cap: float = 1e12

    index_lam_min: float = 1e-8
    index_lam_max: float = 1e8
    index_points: int = 2001
    index_cap: float = 1e3

    certify_tol_pos: float = 1e-10

    quad_rel_tol: float = 1e-10
    quad_panel_budget: int = 1_000_000
    quad_divergence_factor: float = 1.5
    quad_divergence_steps: int = 8

    norm_rel_tol: float = 1e-10

    classify_terms: int = 40
    classify_window: int = 8
    classify_theta_abs_tol: float = 1e-6

    bounds_terms: int = 40
    bounds_cap: float = 1e6

    verify_rel_tol: float = 1e-6

    bk_eps_grid: Tuple[float, ...] = field(default_factory=lambda: _log_grid(1e-2, 1e2, 7))
    bk_y_grid: Tuple[float, ...] = field(default_factory=lambda: _log_grid(1e-2, 1e2, 7))
    bk_B_range: Tuple[float, float] = (1e-6, 1e6)

    sharpness_budget: int = 10_000

    def __post_init__(self) -> None:
        if not 0 < self.probe_r_min < self.probe_r_max:
            raise ValueError(
                f"probe window must satisfy 0 < r_min < r_max, got "
                f"[{self.probe_r_min}, {self.probe_r_max}]"
            )
        if self.probe_points < 3 or self.index_points < 3:
            raise ValueError("probe grids need at least 3 points")
        if not 1e-12 < self.quad_rel_tol < 1e-2:
            raise ValueError(f"quad.rel_tol must lie in (1e-12, 1e-2), got {self.quad_rel_tol}")
        if self.quad_divergence_factor <= 1:
            raise ValueError("quad.divergence_factor must exceed 1")
        if self.classify_theta_abs_tol < 0:
            raise ValueError(
                f"classify.theta_abs_tol must be non-negative, got {self.classify_theta_abs_tol}"
            )
        lo, hi = self.bk_B_range
        if not 0 < lo < hi:
            raise ValueError(f"bk.B_range must satisfy 0 < lo < hi, got {self.bk_B_range}")

    def ledger(self) -> Dict[str, Any]:
        """Flat ``{dotted.key: value}`` mapping, sorted by key."""
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[_dotted(f.name)] = value
        return dict(sorted(out.items()))

    def probe_grid(self, n: Optional[int] = None) -> np.ndarray:
        """Log-spaced probe grid over the configured window."""
        return np.logspace(
            np.log10(self.probe_r_min), np.log10(self.probe_r_max), n or self.probe_points
        )


DEFAULTS = Settings()


def _dotted(attr: str) -> str:
    # every field is "<section>_<name>" with a one-word section
    section, _, rest = attr.partition("_")
    return f"{section}.{rest}"


_KEYS: Dict[str, str] = {_dotted(f.name): f.name for f in fields(Settings)}


def _coerce(key: str, raw: Any, current: Any) -> Any:
    if isinstance(current, tuple):
        if isinstance(raw, str):
            raw = [v for v in raw.replace("[", "").replace("]", "").split(",") if v.strip()]
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ValueError(f"config key {key!r} expects a non-empty list, got {raw!r}")
        return tuple(float(v) for v in raw)
    if isinstance(current, int):
        try:
            as_float = float(raw)
        except (TypeError, ValueError):
            raise ValueError(f"config key {key!r} expects an integer, got {raw!r}") from None
        if as_float != int(as_float):
            raise ValueError(f"config key {key!r} expects an integer, got {raw!r}")
        return int(as_float)
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ValueError(f"config key {key!r} expects a number, got {raw!r}") from None


def _unknown_key(key: str) -> KeyError:
    return unknown_name("config key", key, _KEYS)


def settings_from_mapping(values: Dict[str, Any], base: Settings = DEFAULTS) -> Settings:
    """Apply dotted-key overrides on top of ``base``."""
    updates: Dict[str, Any] = {}
    for key, raw in values.items():
        attr = _KEYS.get(key)
        if attr is None:
            raise _unknown_key(key)
        updates[attr] = _coerce(key, raw, getattr(base, attr))
    if updates:
        logger.debug("config overrides: %s", sorted(updates))
    return replace(base, **updates)


def _flatten(table: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, value in table.items():
        dotted = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict):
            out.update(_flatten(value, dotted))
        else:
            out[dotted] = value
    return out


def load_settings(path: str | Path) -> Settings:
    """Load a config file.

    TOML documents are tried first; a file that does not parse as TOML is
    read as ``key=value`` lines (``#`` starts a comment).

    Raises:
        FileNotFoundError: if ``path`` does not exist.
        KeyError: on unknown keys.
        ValueError: on malformed values.
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"Config file not found: {p}")
    text = p.read_text(encoding="utf-8")
    try:
        values = _flatten(tomllib.loads(text))
    except tomllib.TOMLDecodeError:
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{p}:{lineno}: expected 'key=value', got {line!r}") from None
            key, _, raw = line.partition("=")
            values[key.strip()] = raw.strip()
    logger.info("loaded config %s (%d keys)", p, len(values))
    return settings_from_mapping(values)
