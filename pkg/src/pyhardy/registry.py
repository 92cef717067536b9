"""Cache of built catalog entries.

Building an entry parses three expressions and runs the probe grid, so
each (family, parameters) member is built once per process. Parameters are
keyed in the family's declared order, which makes ``classical`` and
``classical:alpha=4,p=2`` the same member.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Tuple

if TYPE_CHECKING:
    from .catalog import CatalogEntry

logger = logging.getLogger(__name__)

MemberKey = Tuple[str, Tuple[Tuple[str, float], ...]]

_ENTRIES: Dict[MemberKey, CatalogEntry] = {}


def member_key(family: str, params: Mapping[str, float]) -> MemberKey:
    """Hashable key of one family member; ``params`` must be complete and ordered."""
    return family, tuple((k, float(v)) for k, v in params.items())


def lookup(family: str, params: Mapping[str, float]) -> Optional[CatalogEntry]:
    entry = _ENTRIES.get(member_key(family, params))
    if entry is not None:
        logger.debug("catalog cache hit: %s", entry.name)
    return entry


def register(entry: CatalogEntry) -> CatalogEntry:
    """Cache ``entry`` under its family and parameters; the first build wins."""
    return _ENTRIES.setdefault(member_key(entry.family_name, entry.params), entry)


def get(name: str) -> Optional[CatalogEntry]:
    """Cached entry by canonical name (``classical:p=2,alpha=4``)."""
    return next((e for e in _ENTRIES.values() if e.name == name), None)


def members(family: str) -> List[CatalogEntry]:
    """Cached members of one family, in build order."""
    return [e for (f, _), e in _ENTRIES.items() if f == family]


def cached_names() -> List[str]:
    return [e.name for e in _ENTRIES.values()]


def clear() -> None:
    """Drop every cached entry (tests)."""
    _ENTRIES.clear()
