"""Failure taxonomy shared by every stage of the pipeline.

Each error carries an optional source span and a small bag of structured
details so the CLI and the HTTP service can emit machine-readable
diagnostics without string-parsing messages.
"""

from __future__ import annotations

from typing import Any

__all__ = [
    "PennyError",
    "ParseError",
    "SpanOutOfRange",
    "MalformedAnnotation",
    "TargetNotAnExpression",
    "UnsupportedResource",
    "UnresolvedReceiver",
    "UnsupportedMethod",
    "PreflightOperation",
    "DanglingTrigger",
    "UnknownRoute",
    "NoEntryPoints",
    "NotAnEntryPoint",
    "CatalogParseError",
    "DuplicateRule",
    "NonIncreasingTiers",
    "NegativeQuantity",
    "UnpricedFactor",
    "CycleDetected",
    "UnresolvedAssumption",
    "SimulationUnsupported",
]


class PennyError(Exception):
    """Base class; `code` is the stable machine-readable identifier."""

    code = "error"

    def __init__(self, message: str, *, span: Any | None = None, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.span = span
        self.details = details

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"error": self.code, "message": self.message}
        if self.span is not None:
            doc["span"] = {
                "start": self.span.start_byte,
                "end": self.span.end_byte,
                "line": self.span.start_line,
                "col": self.span.start_col,
            }
        for key, value in self.details.items():
            if isinstance(value, (str, int, bool, float)) or value is None:
                doc[key] = value
            elif isinstance(value, (list, tuple)):
                doc[key] = [str(v) for v in value]
            else:
                doc[key] = str(value)
        return doc


class ParseError(PennyError):
    """First syntax violation; parsing is fail-fast by design."""

    code = "ParseError"

    def __init__(self, message: str, *, span=None, expected: str | None = None, found: str | None = None):
        super().__init__(message, span=span, expected=expected, found=found)
        self.expected = expected
        self.found = found


class SpanOutOfRange(PennyError):
    code = "SpanOutOfRange"


class MalformedAnnotation(PennyError):
    code = "MalformedAnnotation"


class TargetNotAnExpression(PennyError):
    code = "TargetNotAnExpression"


class UnsupportedResource(PennyError):
    code = "UnsupportedResource"


class UnresolvedReceiver(PennyError):
    code = "UnresolvedReceiver"


class UnsupportedMethod(PennyError):
    code = "UnsupportedMethod"


class PreflightOperation(PennyError):
    """A billable resource operation outside any inflight closure.

    Deployment-time calls have no place in a monthly traffic model and
    dropping them silently would hide cost-relevant code, so we refuse.
    """

    code = "PreflightOperation"


class DanglingTrigger(PennyError):
    code = "DanglingTrigger"


class UnknownRoute(PennyError):
    code = "UnknownRoute"


class NoEntryPoints(PennyError):
    code = "NoEntryPoints"


class NotAnEntryPoint(PennyError):
    code = "NotAnEntryPoint"


class CatalogParseError(PennyError):
    code = "CatalogParseError"


class DuplicateRule(PennyError):
    code = "DuplicateRule"


class NonIncreasingTiers(PennyError):
    code = "NonIncreasingTiers"


class NegativeQuantity(PennyError):
    code = "NegativeQuantity"


class UnpricedFactor(PennyError):
    """Raised by binding with every gap listed at once in `details["gaps"]`."""

    code = "UnpricedFactor"


class CycleDetected(PennyError):
    code = "CycleDetected"


class UnresolvedAssumption(PennyError):
    """Raised with all missing assumption keys in `details["keys"]`."""

    code = "UnresolvedAssumption"

    @property
    def keys(self) -> list[str]:
        return list(self.details.get("keys", []))


class SimulationUnsupported(PennyError):
    code = "SimulationUnsupported"
