"""Close-match suggestions for names the user got slightly wrong.

Catalog families, family parameters, config keys and expression
identifiers all report misses the same way: the input echoed verbatim
plus the closest known names. Similarity is ``rapidfuzz.fuzz.WRatio`` on
normalised strings.
"""

from __future__ import annotations

import unicodedata
from typing import Iterable, List

from rapidfuzz import fuzz, process

# 0-100 scale; 60 keeps one- and two-edit typos of short names.
_SIMILARITY_THRESHOLD = 60


def _normalize(s: str) -> str:
    """NFKC + lowercase + collapse whitespace."""
    return " ".join(unicodedata.normalize("NFKC", s).lower().split())


def suggest(query: str, choices: Iterable[str], limit: int = 3) -> List[str]:
    """Up to ``limit`` known names closest to ``query``, best first."""
    options = list(choices)
    if not options or not _normalize(query):
        return []
    hits = process.extract(
        _normalize(query),
        [_normalize(c) for c in options],
        scorer=fuzz.WRatio,
        limit=limit,
        score_cutoff=_SIMILARITY_THRESHOLD,
    )
    return [options[index] for _, _, index in hits]


def unknown_name(what: str, name: str, choices: Iterable[str]) -> KeyError:
    """KeyError echoing ``name`` with close matches and the full list."""
    options = sorted(choices)
    close = suggest(name, options)
    hint = f" Close matches: {', '.join(close)}." if close else ""
    return KeyError(f"Unknown {what} {name!r}.{hint} Available: {', '.join(options)}")
