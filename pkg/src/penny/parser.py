"""Recursive-descent parser for the DSL subset.

The grammar (documented in docs/grammar.md) is deliberately small:
`bring`, `let`, `if let`, `return`, expression statements, constructor
calls on `cloud.*`, method calls, inflight closures, object literals,
the `[expr, {…}][0]` annotation wrapper, and string/number/duration
literals. Anything else is a ParseError so later stages never skip
constructs they cannot see.

Parsing is fail-fast: the first violation raises with the offending
span, the expected token class, and what was found instead.
"""

from __future__ import annotations

from .errors import ParseError
from .lexer import Token, TokenKind, tokenize
from .source import LineIndex, SourceFile
from .syntax import NodeKind, Phase, SyntaxNode, SyntaxTree

__all__ = ["parse", "parse_expression"]


def parse(source: SourceFile | str) -> SyntaxTree:
    if isinstance(source, str):
        source = SourceFile(source)
    parser = _Parser(source)
    root = parser.parse_program()
    return SyntaxTree(source, root)


def parse_expression(source: SourceFile | str) -> SyntaxNode:
    """Parse a single expression covering the whole text (used by tests)."""
    if isinstance(source, str):
        source = SourceFile(source)
    parser = _Parser(source)
    expr = parser.parse_expr()
    parser.expect_eof()
    return expr


class _Parser:
    def __init__(self, source: SourceFile) -> None:
        self.source = source
        self.index = LineIndex(source.data)
        self.tokens = tokenize(source.data, self.index)
        self.pos = 0
        self.inflight_depth = 0

    # -- token plumbing ------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.PUNCT and tok.text == text

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.KEYWORD and tok.text == word

    def expect_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            self.fail(f"'{text}'")
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self.fail(f"keyword '{word}'")
        return self.advance()

    def expect_name(self) -> Token:
        tok = self.peek()
        if tok.kind is not TokenKind.NAME:
            self.fail("an identifier")
        return self.advance()

    def expect_eof(self) -> None:
        if self.peek().kind is not TokenKind.EOF:
            self.fail("end of input")

    def fail(self, expected: str) -> None:
        tok = self.peek()
        found = "end of file" if tok.kind is TokenKind.EOF else tok.text
        raise ParseError(
            f"expected {expected}, found {found}",
            span=self.index.span(tok.start, tok.end),
            expected=expected,
            found=found,
        )

    def span_from(self, start: int, end: int):
        return self.index.span(start, end)

    def phase(self) -> Phase:
        return Phase.INFLIGHT if self.inflight_depth > 0 else Phase.PREFLIGHT

    def node(self, kind: NodeKind, start: int, end: int, children=(), name=None, value=None) -> SyntaxNode:
        return SyntaxNode(
            kind=kind,
            span=self.span_from(start, end),
            children=tuple(children),
            name=name,
            value=value,
            phase=self.phase(),
        )

    # -- grammar -------------------------------------------------------

    def parse_program(self) -> SyntaxNode:
        statements = []
        while self.peek().kind is not TokenKind.EOF:
            statements.append(self.parse_statement())
        return self.node(NodeKind.PROGRAM, 0, len(self.source.data), statements)

    def parse_statement(self) -> SyntaxNode:
        if self.at_keyword("bring"):
            start = self.advance().start
            name = self.expect_name()
            end = self.expect_punct(";").end
            return self.node(NodeKind.BRING, start, end, name=name.text)
        if self.at_keyword("let"):
            start = self.advance().start
            name = self.expect_name()
            self.expect_punct("=")
            init = self.parse_expr()
            end = self.expect_punct(";").end
            return self.node(NodeKind.LET, start, end, [init], name=name.text)
        if self.at_keyword("if"):
            return self.parse_if_let()
        if self.at_keyword("return"):
            start = self.advance().start
            children = []
            if not self.at_punct(";"):
                children.append(self.parse_expr())
            end = self.expect_punct(";").end
            return self.node(NodeKind.RETURN, start, end, children)
        expr = self.parse_expr()
        end = self.expect_punct(";").end
        return self.node(NodeKind.EXPR_STMT, expr.span.start_byte, end, [expr])

    def parse_if_let(self) -> SyntaxNode:
        start = self.expect_keyword("if").start
        self.expect_keyword("let")
        name = self.expect_name()
        self.expect_punct("=")
        # A `{` after the scrutinee opens the arm block, so typed object
        # literals are not allowed here (same restriction Rust applies).
        scrutinee = self.parse_expr(no_struct=True)
        block = self.parse_block()
        return self.node(NodeKind.IF_LET, start, block.span.end_byte, [scrutinee, block], name=name.text)

    def parse_block(self) -> SyntaxNode:
        start = self.expect_punct("{").start
        statements = []
        while not self.at_punct("}"):
            if self.peek().kind is TokenKind.EOF:
                self.fail("'}'")
            statements.append(self.parse_statement())
        end = self.advance().end
        return self.node(NodeKind.BLOCK, start, end, statements)

    def parse_expr(self, no_struct: bool = False) -> SyntaxNode:
        expr = self.parse_primary(no_struct)
        while True:
            if self.at_punct("."):
                self.advance()
                method = self.expect_name()
                if self.at_punct("("):
                    args, end = self.parse_args()
                    expr = self.node(
                        NodeKind.METHOD_CALL, expr.span.start_byte, end, [expr, *args], name=method.text
                    )
                else:
                    expr = self.node(
                        NodeKind.MEMBER_ACCESS, expr.span.start_byte, method.end, [expr], name=method.text
                    )
                continue
            if self.at_punct("(") and expr.kind is NodeKind.NAME:
                args, end = self.parse_args()
                expr = self.node(NodeKind.BARE_CALL, expr.span.start_byte, end, args, name=expr.name)
                continue
            return expr

    def parse_primary(self, no_struct: bool = False) -> SyntaxNode:
        tok = self.peek()
        if self.at_keyword("new"):
            start = self.advance().start
            type_name = self.parse_dotted_name()
            if not self.at_punct("("):
                self.fail("'(' after constructor type")
            args, end = self.parse_args()
            return self.node(NodeKind.CONSTRUCTOR, start, end, args, name=type_name)
        if self.at_keyword("inflight"):
            return self.parse_closure()
        if self.at_punct("["):
            return self.parse_annotation_wrapper()
        if self.at_punct("{"):
            return self.parse_object_literal(None, tok.start)
        if self.at_punct("("):
            self.advance()
            inner = self.parse_expr()
            self.expect_punct(")")
            return inner
        if tok.kind is TokenKind.STRING:
            self.advance()
            return self.node(NodeKind.STRING, tok.start, tok.end, value=tok.value)
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            return self.node(NodeKind.NUMBER, tok.start, tok.end, value=tok.value)
        if tok.kind is TokenKind.DURATION:
            self.advance()
            return self.node(NodeKind.DURATION, tok.start, tok.end, value=tok.value)
        if tok.kind is TokenKind.KEYWORD and tok.text in ("true", "false"):
            self.advance()
            return self.node(NodeKind.BOOL, tok.start, tok.end, value=tok.text == "true")
        if tok.kind is TokenKind.NAME:
            self.advance()
            if self.at_punct("{") and not no_struct:
                return self.parse_object_literal(tok.text, tok.start)
            return self.node(NodeKind.NAME, tok.start, tok.end, name=tok.text)
        self.fail("an expression")
        raise AssertionError("unreachable")

    def parse_dotted_name(self) -> str:
        parts = [self.expect_name().text]
        while self.at_punct("."):
            self.advance()
            parts.append(self.expect_name().text)
        return ".".join(parts)

    def parse_closure(self) -> SyntaxNode:
        start = self.expect_keyword("inflight").start
        self.expect_punct("(")
        params = []
        while not self.at_punct(")"):
            name = self.expect_name()
            type_name = None
            end = name.end
            if self.at_punct(":"):
                self.advance()
                type_start = self.peek().start
                type_name = self.parse_dotted_name()
                end = self.tokens[self.pos - 1].end if self.pos else type_start
            params.append(self.node(NodeKind.PARAM, name.start, end, name=name.text, value=type_name))
            if self.at_punct(","):
                self.advance()
            elif not self.at_punct(")"):
                self.fail("',' or ')'")
        self.advance()
        if self.at_punct(":"):
            self.advance()
            self.parse_dotted_name()
        self.expect_punct("=>")
        self.inflight_depth += 1
        try:
            block = self.parse_block()
        finally:
            self.inflight_depth -= 1
        return self.node(NodeKind.CLOSURE, start, block.span.end_byte, [*params, block])

    def parse_annotation_wrapper(self) -> SyntaxNode:
        start = self.expect_punct("[").start
        target = self.parse_expr()
        self.expect_punct(",")
        payload = self.parse_expr()
        self.expect_punct("]")
        self.expect_punct("[")
        idx = self.peek()
        if idx.kind is not TokenKind.NUMBER or not isinstance(idx.value, int):
            self.fail("an integer index")
        self.advance()
        end = self.expect_punct("]").end
        return self.node(
            NodeKind.ANNOTATION_WRAPPER, start, end, [target, payload], value=idx.value
        )

    def parse_object_literal(self, type_name: str | None, start: int) -> SyntaxNode:
        self.expect_punct("{")
        fields = []
        while not self.at_punct("}"):
            key = self.expect_name()
            self.expect_punct(":")
            value = self.parse_expr()
            fields.append(
                self.node(NodeKind.OBJECT_FIELD, key.start, value.span.end_byte, [value], name=key.text)
            )
            if self.at_punct(","):
                self.advance()
            elif not self.at_punct("}"):
                self.fail("',' or '}'")
        end = self.advance().end
        return self.node(NodeKind.OBJECT_LITERAL, start, end, fields, name=type_name)

    def parse_args(self) -> tuple[list[SyntaxNode], int]:
        self.expect_punct("(")
        args: list[SyntaxNode] = []
        while not self.at_punct(")"):
            if (
                self.peek().kind is TokenKind.NAME
                and self.peek(1).kind is TokenKind.PUNCT
                and self.peek(1).text == ":"
            ):
                key = self.advance()
                self.advance()
                value = self.parse_expr()
                args.append(
                    self.node(NodeKind.NAMED_ARG, key.start, value.span.end_byte, [value], name=key.text)
                )
            else:
                args.append(self.parse_expr())
            if self.at_punct(","):
                self.advance()
            elif not self.at_punct(")"):
                self.fail("',' or ')'")
        end = self.advance().end
        return args, end
