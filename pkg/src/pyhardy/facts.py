"""Provenance for the analytic facts attached to catalog entries.

A `Fact` pairs an expected value (computed by the family builder) with
where it comes from, keyed by fact name on `CatalogEntry.expected`
(``"C"``, ``"verdict"``, ``"bk_status"``...). Provenance is metadata about a
value, not part of it: ``entry.expected["C"].value`` stays a float.

Kinds:
    closed_form: an exact expression in the family parameters.
    derived: computed once by the package's own oracle (a supremum on the
        probe grid, say) and compared with a looser tolerance.
    qualitative: a status or verdict rather than a number.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

KINDS = ("closed_form", "derived", "qualitative")


@dataclass(frozen=True)
class Fact:
    """One expected value of a catalog entry.

    Attributes:
        name: Fact key (``"b1"``, ``"C"``, ``"bk_status"``).
        kind: One of `KINDS`.
        ref: Human-readable statement of where the value comes from.
        tolerance: Relative tolerance for numeric comparison.
        value: The expected value; filled by the family builder.
        note: Optional remark (conditions under which the fact holds).
    """

    name: str
    kind: str
    ref: str
    tolerance: float = 1e-9
    value: Any = None
    note: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"Fact {self.name!r}: kind must be one of {KINDS}, got {self.kind!r}")
        if not self.tolerance >= 0:
            raise ValueError(f"Fact {self.name!r}: tolerance must be >= 0, got {self.tolerance!r}")

    @classmethod
    def from_toml(cls, name: str, data: Dict[str, Any]) -> "Fact":
        """Build from a TOML inline table.

        Raises:
            ValueError: if ``kind`` or ``ref`` is missing.
        """
        missing = [k for k in ("kind", "ref") if k not in data]
        if missing:
            raise ValueError(f"Fact {name!r} missing required keys: {missing}")
        return cls(
            name=name,
            kind=data["kind"],
            ref=data["ref"],
            tolerance=float(data.get("tolerance", 1e-9)),
            note=data.get("note"),
        )

    def with_value(self, value: Any) -> "Fact":
        return replace(self, value=value)

    def describe(self) -> str:
        """One line for ``catalog show``. Deterministic."""
        text = f"{self.name} = {self.value!r} [{self.kind}] {self.ref}"
        if self.note:
            text += f" ({self.note})"
        return text


def parse_facts_table(raw: Dict[str, Any]) -> Dict[str, Fact]:
    """Parse a ``[<family>._facts]`` table into ``{name: Fact}``."""
    out: Dict[str, Fact] = {}
    for key, val in raw.items():
        if not isinstance(val, dict):
            kind = type(val).__name__
            raise ValueError(f"_facts entry {key!r} must be an inline table, got {kind}")
        out[key] = Fact.from_toml(key, val)
    return out


def attach_values(facts: Dict[str, Fact], values: Dict[str, Any]) -> Dict[str, Fact]:
    """Pair builder-computed values with their provenance.

    Facts without a computed value are dropped (they do not apply to the
    chosen parameters); values without provenance are an error.
    """
    unknown = sorted(set(values) - set(facts))
    if unknown:
        raise ValueError(f"values without provenance: {unknown}")
    return {name: fact.with_value(values[name]) for name, fact in facts.items() if name in values}
