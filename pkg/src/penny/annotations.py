"""Reading, writing, and stripping `[expr, {key: value}][0]` wrappers.

The wrapper idiom is the only in-source persistence channel for
user-supplied cost facts. Writing is a byte-splicing operation: all
text outside the edited region stays byte-identical, which is what
makes the round-trip guarantees testable at the byte level.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import MalformedAnnotation, TargetNotAnExpression
from .parser import parse
from .source import SourceFile, Span
from .syntax import NodeKind, SyntaxNode, SyntaxTree

__all__ = [
    "Annotation",
    "read_annotations",
    "write_annotation",
    "strip_annotations",
    "scalar_to_source",
]

_SCALAR_KINDS = frozenset({NodeKind.STRING, NodeKind.NUMBER, NodeKind.DURATION, NodeKind.BOOL})


@dataclass(frozen=True)
class Annotation:
    """One wrapper occurrence; `entries` maps keys to plain scalars."""

    target_span: Span
    entries: dict
    wrapper_span: Span
    object_span: Span
    entry_value_spans: dict

    def to_doc(self) -> dict:
        return {
            "target": self.target_span.to_doc(),
            "wrapper": self.wrapper_span.to_doc(),
            "entries": {k: str(v) if isinstance(v, Fraction) else v for k, v in self.entries.items()},
        }


def read_annotations(tree: SyntaxTree) -> list[Annotation]:
    """All annotations in source order; malformed wrappers raise."""
    out = []
    for node in tree.walk():
        if node.kind is not NodeKind.ANNOTATION_WRAPPER:
            continue
        if node.value != 0:
            raise MalformedAnnotation(
                f"annotation wrapper must select index 0, got {node.value}", span=node.span
            )
        payload = node.children[1]
        if payload.kind is not NodeKind.OBJECT_LITERAL or payload.name is not None:
            raise MalformedAnnotation(
                "second wrapper element must be a plain object literal", span=payload.span
            )
        entries: dict = {}
        value_spans: dict = {}
        for field in payload.children:
            if field.name in entries:
                raise MalformedAnnotation(f"duplicate annotation key {field.name!r}", span=field.span)
            value_node = field.children[0]
            if value_node.kind not in _SCALAR_KINDS:
                raise MalformedAnnotation(
                    f"annotation value for {field.name!r} must be a scalar literal",
                    span=value_node.span,
                )
            entries[field.name] = value_node.value
            value_spans[field.name] = value_node.span
        out.append(
            Annotation(
                target_span=node.children[0].span,
                entries=entries,
                wrapper_span=node.span,
                object_span=payload.span,
                entry_value_spans=value_spans,
            )
        )
    return out


def scalar_to_source(value: object) -> str:
    """Render a scalar as DSL literal text.

    The literal grammar has no unary minus, so a negative number can be
    stored in an assumption but never written back into source.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, Fraction)) and value < 0:
        raise MalformedAnnotation(f"negative value {value} has no literal form")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        text = _terminating_decimal(value)
        if text is None:
            raise MalformedAnnotation(
                f"value {value} has no finite decimal form and cannot be written as a literal"
            )
        return text
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
        return f'"{escaped}"'
    raise MalformedAnnotation(f"unsupported annotation value type {type(value).__name__}")


def _terminating_decimal(value: Fraction) -> str | None:
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    digits = max(twos, fives)
    scaled = value.numerator * 10**digits // value.denominator
    text = str(scaled).rjust(digits + 1, "0")
    return f"{text[:-digits]}.{text[-digits:]}" if digits else text


def _wrapper_around(tree: SyntaxTree, node: SyntaxNode) -> SyntaxNode | None:
    parent = tree.parent_of(node)
    if (
        parent is not None
        and parent.kind is NodeKind.ANNOTATION_WRAPPER
        and parent.children[0] is node
    ):
        return parent
    return None


def write_annotation(source: SourceFile, target: Span, entries: Mapping) -> SourceFile:
    """Attach (or merge) entries onto the expression exactly at `target`.

    Returns a new SourceFile with a bumped version; a no-op write
    returns the input unchanged.
    """
    tree = parse(source)
    node = tree.expression_at(target.start_byte, target.end_byte)
    if node is None:
        raise TargetNotAnExpression(
            f"no expression spans bytes [{target.start_byte}, {target.end_byte})", span=target
        )
    wrapper = _wrapper_around(tree, node)
    if not entries and wrapper is None:
        return source

    data = source.data
    if wrapper is None:
        body = ", ".join(f"{k}: {scalar_to_source(v)}" for k, v in entries.items())
        new_data = (
            data[: target.start_byte]
            + b"["
            + data[target.start_byte : target.end_byte]
            + b", { "
            + body.encode("utf-8")
            + b" }][0]"
            + data[target.end_byte :]
        )
    else:
        existing = read_annotations(tree)
        annotation = next(a for a in existing if a.wrapper_span == wrapper.span)
        edits: list[tuple[int, int, bytes]] = []
        additions = []
        for key, value in entries.items():
            rendered = scalar_to_source(value).encode("utf-8")
            if key in annotation.entry_value_spans:
                span = annotation.entry_value_spans[key]
                edits.append((span.start_byte, span.end_byte, rendered))
            else:
                additions.append(f"{key}: {scalar_to_source(value)}")
        if additions:
            joined = ", ".join(additions).encode("utf-8")
            if annotation.entries:
                after_last = max(s.end_byte for s in annotation.entry_value_spans.values())
                edits.append((after_last, after_last, b", " + joined))
            else:
                close = annotation.object_span.end_byte - 1
                edits.append((close, close, b" " + joined + b" "))
        new_data = data
        for start, end, replacement in sorted(edits, key=lambda e: e[0], reverse=True):
            new_data = new_data[:start] + replacement + new_data[end:]
        if new_data == data:
            return source
    return SourceFile(text=new_data.decode("utf-8"), path=source.path, version=source.version + 1)


def strip_annotations(source: SourceFile) -> SourceFile:
    """Replace every wrapper with its bare target expression."""
    data = source.data
    changed = False
    while True:
        tree = parse(SourceFile(data.decode("utf-8"), path=source.path))
        wrapper = next(
            (n for n in tree.walk() if n.kind is NodeKind.ANNOTATION_WRAPPER), None
        )
        if wrapper is None:
            break
        target = wrapper.children[0].span
        data = (
            data[: wrapper.span.start_byte]
            + data[target.start_byte : target.end_byte]
            + data[wrapper.span.end_byte :]
        )
        changed = True
    if not changed:
        return source
    return SourceFile(text=data.decode("utf-8"), path=source.path, version=source.version + 1)
