"""Plot-ready traces written as two-column CSV.

A `Trace` holds sorted ``(r, value)`` knots for one curve: b₁(r), b₂(r),
the θ_n sequence of a test function (against R_n), K(r) or L(R).
Validation happens at construction; unsorted or mismatched arrays raise
`ValueError` immediately rather than when the file is written.

Non-finite values are written as ``inf``, ``-inf`` and ``nan`` so the
files load with any CSV reader that understands floats.
"""

from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .classify import TestFunction, k_values, l_values, theta_sequence
from .config import DEFAULTS, Settings
from .weights import WeightTriple, b1_at, b2_at

logger = logging.getLogger(__name__)

HEADER = ("r", "value")


@dataclass(frozen=True)
class Trace:
    """One curve.

    Attributes:
        name: File stem (``"b1"``, ``"theta_tent"``).
        r: Strictly increasing abscissae.
        values: Curve values, same length as ``r``.
    """

    name: str
    r: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.r:
            raise ValueError(f"trace {self.name!r} requires at least one knot")
        if len(self.r) != len(self.values):
            raise ValueError(
                f"trace {self.name!r}: r and values must be same length: "
                f"{len(self.r)} vs {len(self.values)}"
            )
        for a, b in zip(self.r, self.r[1:]):
            if not a < b:
                raise ValueError(f"trace {self.name!r}: r must be strictly increasing")

    @classmethod
    def from_pairs(cls, name: str, r: Iterable[float], values: Iterable[float]) -> "Trace":
        """Build from unsorted arrays; knots are sorted by r."""
        pairs = sorted(zip((float(x) for x in r), (float(v) for v in values)))
        return cls(name, tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def rows(self) -> List[Tuple[str, str]]:
        return [(_fmt(a), _fmt(b)) for a, b in zip(self.r, self.values)]

    def to_csv(self, directory: Path | str) -> Path:
        """Write ``<directory>/<name>.csv`` and return its path."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(HEADER)
            writer.writerows(self.rows())
        logger.debug("trace %s: %d rows -> %s", self.name, len(self.r), path)
        return path


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def file_stem(label: str) -> str:
    """A filesystem-safe stem for a function label."""
    stem = re.sub(r"[^A-Za-z0-9_.-]+", "_", label).strip("_")
    return stem or "function"


def _pointwise(fn, t: WeightTriple, r: np.ndarray) -> np.ndarray:
    # DomainError and AssumptionError are both ValueErrors
    with np.errstate(all="ignore"):
        try:
            return np.asarray(fn(t, r), dtype=float)
        except ValueError:
            pass
        out = []
        for x in r:
            try:
                out.append(fn(t, float(x)))
            except ValueError:
                out.append(math.nan)
    return np.array(out)


def b_traces(t: WeightTriple, points: int = 401) -> List[Trace]:
    """b₁(r) and b₂(r) on a log grid spanning the probe window."""
    r = np.logspace(math.log10(t.r_min), math.log10(t.r_max), points)
    b1, b2 = _pointwise(b1_at, t, r), _pointwise(b2_at, t, r)
    return [Trace.from_pairs("b1", r, b1), Trace.from_pairs("b2", r, b2)]


def theta_trace(
    t: WeightTriple, u: TestFunction, settings: Optional[Settings] = None
) -> Trace:
    """θ_n against R_n for one test function."""
    _, R, theta = theta_sequence(t, u, settings or DEFAULTS)
    return Trace.from_pairs(f"theta_{file_stem(u.label)}", R, theta)


def kl_traces(t: WeightTriple, settings: Optional[Settings] = None) -> List[Trace]:
    settings = settings or DEFAULTS
    r_k, K = k_values(t, settings)
    R_k, L = l_values(t, settings)
    return [Trace.from_pairs("K", r_k, K), Trace.from_pairs("L", R_k, L)]


def write_all(traces: Iterable[Trace], directory: Path | str) -> Dict[str, Path]:
    """Write every trace; returns ``{name: path}`` in input order."""
    written = {trace.name: trace.to_csv(directory) for trace in traces}
    logger.info("wrote %d traces to %s", len(written), directory)
    return written
