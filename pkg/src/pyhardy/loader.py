"""TOML loader for triple specs, test-function files and family specs.

Triple spec::

    M = "power:p=2"          # catalog string or an expression in λ
    phi = "-4*ln(r)"
    omega = "1/r"

    [probe]                  # optional window override
    r_min = 1e-6
    r_max = 1e6

A spec may instead name a catalog preset: ``preset = "classical:p=2,alpha=4"``.

Function file::

    [[function]]
    name = "tent"
    u = "max(0, 1-abs(r-2))"
    uprime = "..."           # optional, derived when omitted
    kind = "generic"         # or hardy_transform / conjugate_hardy_transform

    [[function]]
    name = "laplace"
    builtin = "laplace"

Family spec::

    [family]
    name = "extremal"
    template = "r^({eps}-1.5)*exp(-r)"
    params = { eps = [0.05, 1.0] }
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .classify import Kind, TestFunction, laplace_function
from .config import DEFAULTS, Settings
from .search import unknown_name
from .verifier import Family
from .weights import WeightTriple

logger = logging.getLogger(__name__)

BUILTINS = {"laplace": laplace_function}


def read_toml(file_path: Path | str) -> Dict[str, Any]:
    """Read a TOML document, echoing the path on failure.

    Raises:
        FileNotFoundError: the file does not exist.
        ValueError: the file is not valid TOML.
    """
    file_path = Path(file_path)
    if not file_path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")
    with open(file_path, "rb") as f:
        try:
            return tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"{file_path}: invalid TOML: {exc}") from exc


def triple_from_mapping(
    data: Dict[str, Any], settings: Optional[Settings] = None, source: str = "<triple>"
) -> WeightTriple:
    """Build a triple from a parsed spec (see module docstring)."""
    settings = settings or DEFAULTS
    probe = data.get("probe", {})
    if not isinstance(probe, dict):
        raise ValueError(f"{source}: [probe] must be a table, got {type(probe).__name__}")
    unknown_probe = set(probe) - {"r_min", "r_max"}
    if unknown_probe:
        raise unknown_name("probe key", sorted(unknown_probe)[0], ("r_min", "r_max"))
    if "preset" in data:
        from .catalog import load

        entry = load(data["preset"], settings=settings)
        if not probe:
            return entry.triple
        return WeightTriple.build(
            entry.triple.M,
            entry.triple.phi,
            entry.triple.omega,
            settings=settings,
            r_min=probe.get("r_min"),
            r_max=probe.get("r_max"),
            name=entry.name,
        )
    missing = [k for k in ("M", "phi", "omega") if k not in data]
    if missing:
        raise ValueError(f"{source}: triple spec missing required keys: {missing}")
    return WeightTriple.build(
        str(data["M"]),
        str(data["phi"]),
        str(data["omega"]),
        settings=settings,
        r_min=probe.get("r_min"),
        r_max=probe.get("r_max"),
        name=str(data.get("name", "")),
    )


def load_triple(file_path: Path | str, settings: Optional[Settings] = None) -> WeightTriple:
    """Load a triple spec file."""
    data = read_toml(file_path)
    triple = triple_from_mapping(data, settings, str(file_path))
    logger.info("loaded triple from %s", file_path)
    return triple


def function_from_mapping(data: Dict[str, Any], source: str = "<function>") -> TestFunction:
    name = str(data.get("name", ""))
    builtin = data.get("builtin")
    if builtin is not None:
        factory = BUILTINS.get(builtin)
        if factory is None:
            raise unknown_name("builtin function", builtin, BUILTINS)
        return factory()
    if "u" not in data:
        raise ValueError(f"{source}: function {name or '?'!r} needs 'u' or 'builtin'")
    kind = data.get("kind", Kind.GENERIC.value)
    try:
        kind = Kind(kind)
    except ValueError:
        raise unknown_name("function kind", str(kind), [k.value for k in Kind]) from None
    return TestFunction.from_text(str(data["u"]), data.get("uprime"), kind, name)


def load_functions(file_path: Path | str) -> List[TestFunction]:
    """Load ``[[function]]`` entries in file order.

    Raises:
        ValueError: the file holds no functions.
    """
    data = read_toml(file_path)
    raw = data.get("function", [])
    if not isinstance(raw, list) or not raw:
        raise ValueError(f"{file_path}: no [[function]] entries")
    functions = [function_from_mapping(item, str(file_path)) for item in raw]
    logger.info("loaded %d test functions from %s", len(functions), file_path)
    return functions


def family_from_mapping(data: Dict[str, Any], source: str = "<family>") -> Family:
    missing = [k for k in ("template", "params") if k not in data]
    if missing:
        raise ValueError(f"{source}: family spec missing required keys: {missing}")
    params = {}
    for key, bounds in data["params"].items():
        if not (isinstance(bounds, (list, tuple)) and len(bounds) == 2):
            raise ValueError(f"{source}: parameter {key!r} needs [lo, hi], got {bounds!r}")
        params[key] = (float(bounds[0]), float(bounds[1]))
    return Family(
        name=str(data.get("name", "family")),
        template=str(data["template"]),
        params=params,
        kind=Kind(data.get("kind", Kind.GENERIC.value)),
    )


def load_family(file_path: Path | str) -> Family:
    """Load the ``[family]`` table of a family spec file."""
    data = read_toml(file_path)
    if "family" not in data:
        raise ValueError(f"{file_path}: missing [family] table")
    return family_from_mapping(data["family"], str(file_path))
