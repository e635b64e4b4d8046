"""Immutable syntax trees for the DSL subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator

from .errors import SpanOutOfRange
from .source import SourceFile, Span

__all__ = ["NodeKind", "Phase", "SyntaxNode", "SyntaxTree", "phase_of", "EXPRESSION_KINDS"]


class Phase(Enum):
    PREFLIGHT = "preflight"
    INFLIGHT = "inflight"


class NodeKind(Enum):
    PROGRAM = "program"
    BRING = "bring"
    LET = "let-binding"
    IF_LET = "if-let"
    RETURN = "return"
    EXPR_STMT = "expr-statement"
    BLOCK = "block"
    CONSTRUCTOR = "constructor-call"
    METHOD_CALL = "method-call"
    BARE_CALL = "call"
    CLOSURE = "closure"
    ANNOTATION_WRAPPER = "annotation-wrapper"
    OBJECT_LITERAL = "object-literal"
    OBJECT_FIELD = "object-field"
    NAMED_ARG = "named-arg"
    MEMBER_ACCESS = "member-access"
    NAME = "name"
    STRING = "string"
    NUMBER = "number"
    DURATION = "duration-literal"
    BOOL = "bool"
    PARAM = "param"


# Kinds that stand for a complete expression; annotation targets and the
# span-soundness property are restricted to these.
EXPRESSION_KINDS = frozenset(
    {
        NodeKind.CONSTRUCTOR,
        NodeKind.METHOD_CALL,
        NodeKind.BARE_CALL,
        NodeKind.CLOSURE,
        NodeKind.ANNOTATION_WRAPPER,
        NodeKind.OBJECT_LITERAL,
        NodeKind.MEMBER_ACCESS,
        NodeKind.NAME,
        NodeKind.STRING,
        NodeKind.NUMBER,
        NodeKind.DURATION,
        NodeKind.BOOL,
    }
)


@dataclass(frozen=True)
class SyntaxNode:
    """One tree node.

    `name` holds identifiers (binding names, method names, type names),
    `value` holds literal values (str, int, Fraction, bool, duration
    seconds) or the index of an annotation wrapper.
    """

    kind: NodeKind
    span: Span
    children: tuple["SyntaxNode", ...] = ()
    name: str | None = None
    value: object = None
    phase: Phase = Phase.PREFLIGHT

    def walk(self) -> Iterator["SyntaxNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def find(self, kind: NodeKind) -> Iterator["SyntaxNode"]:
        for node in self.walk():
            if node.kind is kind:
                yield node

    def to_doc(self, with_spans: bool = True) -> dict:
        doc: dict = {"kind": self.kind.value}
        if self.name is not None:
            doc["name"] = self.name
        if self.value is not None:
            doc["value"] = str(self.value) if isinstance(self.value, Fraction) else self.value
        if with_spans:
            doc["span"] = self.span.to_doc()
        doc["phase"] = self.phase.value
        if self.children:
            doc["children"] = [c.to_doc(with_spans) for c in self.children]
        return doc


@dataclass(frozen=True)
class SyntaxTree:
    source: SourceFile
    root: SyntaxNode
    parents: dict = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        if not self.parents:
            for node in self.root.walk():
                for child in node.children:
                    self.parents[id(child)] = node

    def walk(self) -> Iterator[SyntaxNode]:
        return self.root.walk()

    def parent_of(self, node: SyntaxNode) -> SyntaxNode | None:
        return self.parents.get(id(node))

    def text_of(self, node: SyntaxNode) -> str:
        return self.source.slice(node.span)

    def expression_at(self, start: int, end: int) -> SyntaxNode | None:
        """The expression node whose span is exactly [start, end), innermost wins."""
        hit = None
        for node in self.root.walk():
            if node.span.start_byte == start and node.span.end_byte == end and node.kind in EXPRESSION_KINDS:
                hit = node
        return hit

    def innermost_containing(self, start: int, end: int) -> SyntaxNode:
        node = self.root
        while True:
            for child in node.children:
                if child.span.start_byte <= start and end <= child.span.end_byte:
                    node = child
                    break
            else:
                return node

    def to_doc(self, with_spans: bool = True) -> dict:
        return self.root.to_doc(with_spans)


def phase_of(tree: SyntaxTree, span: Span) -> Phase:
    """Phase of the innermost node containing the span."""
    size = len(tree.source.data)
    if span.start_byte < 0 or span.end_byte > size:
        raise SpanOutOfRange(
            f"span [{span.start_byte}, {span.end_byte}) outside source of {size} bytes",
            span=span,
        )
    return tree.innermost_containing(span.start_byte, span.end_byte).phase
