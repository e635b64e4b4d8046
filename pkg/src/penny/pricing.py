"""Vendor price catalogs and the rules for applying them.

A catalog is a JSON document of pricing rules keyed by node class and
unit. Rates are integer pairs (micro-USD per so-many units), so a
price like $0.0000167 per GB-second is stored as 16_700 micro-USD per
1_000_000 units with no binary float anywhere near it. Tiered schemes
are marginal: each tier prices only the volume falling inside it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    CatalogParseError,
    DuplicateRule,
    NegativeQuantity,
    NonIncreasingTiers,
    UnpricedFactor,
)
from .graph import CostFactor, CostGraph, CostNode, FactorKind, NodeClass, Origin
from .money import round_half_even

__all__ = [
    "Rate",
    "Tier",
    "PriceRule",
    "Catalog",
    "load_catalog",
    "parse_catalog",
    "evaluate_rule",
    "marginal_rate",
    "bind",
    "BoundFactor",
    "BoundModel",
]


@dataclass(frozen=True)
class Rate:
    """micro_usd per per_units of the billed unit."""

    micro_usd: int
    per_units: int

    def price(self, quantity: Fraction) -> Fraction:
        return Fraction(self.micro_usd, self.per_units) * quantity

    def per_unit(self) -> Fraction:
        return Fraction(self.micro_usd, self.per_units)


@dataclass(frozen=True)
class Tier:
    upper_bound: int | None  # None means unbounded, only legal on the last tier
    rate: Rate


@dataclass(frozen=True)
class PriceRule:
    node_class: str  # "BucketOp" or method-qualified "BucketOp:put"
    unit: str
    kind: str  # per_unit | tiered | fixed_monthly
    rate: Rate | None = None
    tiers: tuple[Tier, ...] = ()
    free_allowance: int = 0


@dataclass(frozen=True)
class Catalog:
    vendor_id: str
    version: str
    rules: tuple[PriceRule, ...]
    by_key: Mapping[tuple[str, str], PriceRule] = field(default_factory=dict, repr=False)

    @property
    def id(self) -> str:
        return f"{self.vendor_id}-{self.version}"

    def lookup(self, node: CostNode, unit: str) -> PriceRule | None:
        for pattern in node.rule_classes():
            rule = self.by_key.get((pattern, unit))
            if rule is not None:
                return rule
        return None


def _require(doc: Mapping, key: str, context: str):
    if key not in doc:
        raise CatalogParseError(f"{context} is missing {key!r}")
    return doc[key]


def _int_field(doc: Mapping, key: str, context: str) -> int:
    value = _require(doc, key, context)
    if isinstance(value, bool) or not isinstance(value, int):
        raise CatalogParseError(f"{context}.{key} must be an integer, got {value!r}")
    return value


def _parse_rate(doc, context: str) -> Rate:
    if not isinstance(doc, Mapping):
        raise CatalogParseError(f"{context} must be an object with micro_usd and per_units")
    micro = _int_field(doc, "micro_usd", context)
    per = _int_field(doc, "per_units", context)
    if micro < 0:
        raise CatalogParseError(f"{context}.micro_usd must not be negative")
    if per <= 0:
        raise CatalogParseError(f"{context}.per_units must be a positive integer")
    return Rate(micro, per)


def parse_catalog(text: str) -> Catalog:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogParseError(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CatalogParseError("catalog must be a JSON object")

    vendor = _require(doc, "vendor_id", "catalog")
    version = _require(doc, "version", "catalog")
    if not isinstance(vendor, str) or not isinstance(version, str):
        raise CatalogParseError("vendor_id and version must be strings")
    raw_rules = _require(doc, "rules", "catalog")
    if not isinstance(raw_rules, list):
        raise CatalogParseError("catalog rules must be a list")

    rules: list[PriceRule] = []
    seen: dict[tuple[str, str], int] = {}
    for i, raw in enumerate(raw_rules):
        context = f"rules[{i}]"
        if not isinstance(raw, Mapping):
            raise CatalogParseError(f"{context} must be an object")
        applies = _require(raw, "applies_to", context)
        if not isinstance(applies, Mapping):
            raise CatalogParseError(f"{context}.applies_to must be an object")
        node_class = _require(applies, "node_class", f"{context}.applies_to")
        unit = _require(applies, "unit", f"{context}.applies_to")
        if not isinstance(node_class, str) or not isinstance(unit, str):
            raise CatalogParseError(f"{context}.applies_to fields must be strings")

        key = (node_class, unit)
        if key in seen:
            raise DuplicateRule(
                f"rules[{seen[key]}] and {context} both price ({node_class}, {unit})"
            )
        seen[key] = i

        scheme = _require(raw, "scheme", context)
        if not isinstance(scheme, Mapping):
            raise CatalogParseError(f"{context}.scheme must be an object")
        kind = _require(scheme, "kind", f"{context}.scheme")
        allowance = raw.get("free_allowance", 0)
        if isinstance(allowance, bool) or not isinstance(allowance, int) or allowance < 0:
            raise CatalogParseError(f"{context}.free_allowance must be a non-negative integer")

        if kind in ("per_unit", "fixed_monthly"):
            rate = _parse_rate(_require(scheme, "rate", f"{context}.scheme"), f"{context}.scheme.rate")
            rules.append(PriceRule(node_class, unit, kind, rate=rate, free_allowance=allowance))
        elif kind == "tiered":
            raw_tiers = _require(scheme, "tiers", f"{context}.scheme")
            if not isinstance(raw_tiers, list) or not raw_tiers:
                raise CatalogParseError(f"{context}.scheme.tiers must be a non-empty list")
            tiers: list[Tier] = []
            prev_bound = 0
            for j, raw_tier in enumerate(raw_tiers):
                tcontext = f"{context}.scheme.tiers[{j}]"
                if not isinstance(raw_tier, Mapping):
                    raise CatalogParseError(f"{tcontext} must be an object")
                bound = raw_tier.get("upper_bound")
                last = j == len(raw_tiers) - 1
                if bound is None:
                    if not last:
                        raise NonIncreasingTiers(
                            f"{tcontext} has no upper_bound but is not the last tier"
                        )
                else:
                    if isinstance(bound, bool) or not isinstance(bound, int):
                        raise CatalogParseError(f"{tcontext}.upper_bound must be an integer")
                    if bound <= prev_bound:
                        raise NonIncreasingTiers(
                            f"{tcontext}.upper_bound {bound} does not exceed {prev_bound}"
                        )
                    prev_bound = bound
                if last and bound is not None:
                    raise NonIncreasingTiers(f"{tcontext} is the last tier and must be unbounded")
                rate = _parse_rate(_require(raw_tier, "rate", tcontext), f"{tcontext}.rate")
                tiers.append(Tier(bound, rate))
            rules.append(
                PriceRule(node_class, unit, kind, tiers=tuple(tiers), free_allowance=allowance)
            )
        else:
            raise CatalogParseError(f"{context}.scheme.kind {kind!r} is not a pricing scheme")

    return Catalog(
        vendor_id=vendor,
        version=version,
        rules=tuple(rules),
        by_key={(r.node_class, r.unit): r for r in rules},
    )


def load_catalog(path: str | Path) -> Catalog:
    return parse_catalog(Path(path).read_text(encoding="utf-8"))


def _billable_volume(rule: PriceRule, quantity: Fraction) -> Fraction:
    volume = quantity - rule.free_allowance
    return volume if volume > 0 else Fraction(0)


def price_exact(rule: PriceRule, quantity: Fraction) -> Fraction:
    """Exact micro-USD for the month's quantity, before rounding."""
    if quantity < 0:
        raise NegativeQuantity(f"cannot price negative quantity {quantity}")
    if rule.kind == "fixed_monthly":
        assert rule.rate is not None
        return rule.rate.price(Fraction(1))
    volume = _billable_volume(rule, quantity)
    if rule.kind == "per_unit":
        assert rule.rate is not None
        return rule.rate.price(volume)
    total = Fraction(0)
    lower = Fraction(0)
    for tier in rule.tiers:
        if tier.upper_bound is None:
            span = volume - lower
        else:
            span = min(volume, Fraction(tier.upper_bound)) - lower
        if span > 0:
            total += tier.rate.price(span)
        if tier.upper_bound is None or volume <= tier.upper_bound:
            break
        lower = Fraction(tier.upper_bound)
    return total


def evaluate_rule(rule: PriceRule, quantity: Fraction) -> int:
    """Integer micro-USD, rounded half-even exactly once."""
    return round_half_even(price_exact(rule, quantity))


def marginal_rate(rule: PriceRule, volume: Fraction = Fraction(0)) -> Fraction:
    """Price of the next unit after `volume` units this month, in
    micro-USD per unit. Zero inside a free allowance; zero always for
    fixed monthly fees, which no single call can change."""
    if rule.kind == "fixed_monthly":
        return Fraction(0)
    if volume < rule.free_allowance:
        return Fraction(0)
    billable = _billable_volume(rule, volume)
    if rule.kind == "per_unit":
        assert rule.rate is not None
        return rule.rate.per_unit()
    for tier in rule.tiers:
        if tier.upper_bound is None or billable < tier.upper_bound:
            return tier.rate.per_unit()
    raise AssertionError("tier table with no unbounded tail")


@dataclass(frozen=True)
class BoundFactor:
    factor: CostFactor
    rule: PriceRule | None  # None only for user-priced factors


@dataclass(frozen=True)
class BoundModel:
    graph: CostGraph
    catalog: Catalog
    bindings: Mapping[str, tuple[BoundFactor, ...]]  # node id -> bound factors

    def factors_of(self, node_id: str) -> tuple[BoundFactor, ...]:
        return self.bindings.get(node_id, ())


def bind(graph: CostGraph, catalog: Catalog) -> BoundModel:
    """Attach a price rule to every factor in the graph, or fail with
    the complete list of gaps.

    Factors carrying a user price key never consult the catalog; the
    price is whatever assumption the key resolves to. A fixed_monthly
    rule matching a node class injects a synthetic fixed factor on
    each node of that class.
    """
    bindings: dict[str, tuple[BoundFactor, ...]] = {}
    gaps: list[tuple[str, str]] = []
    for node in graph.nodes:
        bound: list[BoundFactor] = []
        for factor in node.factors:
            if factor.user_price_key is not None:
                bound.append(BoundFactor(factor, None))
                continue
            rule = catalog.lookup(node, factor.unit)
            if rule is None:
                gaps.append((node.id, factor.unit))
                continue
            bound.append(BoundFactor(factor, rule))
        for pattern in node.rule_classes():
            fixed = catalog.by_key.get((pattern, "month"))
            if fixed is not None and fixed.kind == "fixed_monthly":
                bound.append(
                    BoundFactor(
                        CostFactor(
                            id=f"{node.id}.monthly_fee",
                            kind=FactorKind.FIXED,
                            origin=Origin.EXTERNAL,
                            unit="month",
                            quantity_spec="1 per month",
                            value_source=f"catalog:{catalog.id}",
                        ),
                        fixed,
                    )
                )
                break
        bindings[node.id] = tuple(bound)
    if gaps:
        listing = ", ".join(f"({n}, {u})" for n, u in gaps)
        raise UnpricedFactor(
            f"catalog {catalog.id} has no rule for: {listing}", gaps=gaps
        )
    return BoundModel(graph=graph, catalog=catalog, bindings=bindings)
