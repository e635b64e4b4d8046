"""Resolution of the unknowns a cost graph depends on.

Every external quantity (traffic, payload sizes, memory, unit prices)
arrives through one of three doors: an override supplied through the
API or CLI, an annotation in the source, or a documented default.
Overrides win. External rates and prices have no defaults on purpose;
guessing them would defeat the point of asking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import UnresolvedAssumption
from .graph import CostGraph

__all__ = ["Assumption", "AssumptionSet", "assemble"]

Scalar = int | Fraction | str | bool


@dataclass(frozen=True)
class Assumption:
    key: str
    value: Scalar
    provenance: str  # "override" | "annotation" | "source" | "default"


class AssumptionSet:
    def __init__(self, entries: Mapping[str, Assumption]) -> None:
        self._entries = dict(entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __iter__(self):
        return iter(self._entries.values())

    def get(self, key: str, default: Scalar | None = None) -> Scalar | None:
        entry = self._entries.get(key)
        return entry.value if entry is not None else default

    def provenance(self, key: str) -> str | None:
        entry = self._entries.get(key)
        return entry.provenance if entry is not None else None

    def fraction(self, key: str) -> Fraction | None:
        value = self.get(key)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise UnresolvedAssumption(
                f"assumption {key!r} must be numeric, got {value!r}", keys=[key]
            )
        return Fraction(value)

    def require(self, keys: Iterable[str]) -> dict[str, Fraction]:
        """All keys as numbers, or one error naming every missing key."""
        out: dict[str, Fraction] = {}
        missing: list[str] = []
        for key in keys:
            value = self.fraction(key) if key in self else None
            if value is None:
                missing.append(key)
            else:
                out[key] = value
        if missing:
            raise UnresolvedAssumption(
                "unresolved assumptions: " + ", ".join(sorted(missing)),
                keys=sorted(missing),
            )
        return out

    def overlay(self, overrides: Mapping[str, Scalar]) -> "AssumptionSet":
        merged = dict(self._entries)
        for key, value in overrides.items():
            merged[key] = Assumption(key, value, "override")
        return AssumptionSet(merged)


def assemble(graph: CostGraph, overrides: Mapping[str, Scalar] | None = None) -> AssumptionSet:
    """Graph-captured values overlaid with caller overrides."""
    entries: dict[str, Assumption] = {}
    for sv in graph.source_values:
        entries[sv.key] = Assumption(sv.key, sv.value, sv.provenance)
    base = AssumptionSet(entries)
    return base.overlay(overrides) if overrides else base
