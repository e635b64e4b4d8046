"""Parser behaviour: shapes, spans, literals, and rejection of bad input."""

from fractions import Fraction

import pytest

from penny.errors import PennyError
from penny.parser import parse, parse_expression
from penny.source import SourceFile
from penny.syntax import EXPRESSION_KINDS, NodeKind, Phase, phase_of


def kinds_of(node):
    return [child.kind for child in node.children]


def test_program_statement_kinds(fixture_source):
    tree = parse(fixture_source)
    assert tree.root.kind is NodeKind.PROGRAM
    top = kinds_of(tree.root)
    assert top[0] is NodeKind.BRING
    assert NodeKind.LET in top
    assert NodeKind.EXPR_STMT in top


def test_let_binding_holds_name_and_value():
    tree = parse('let bucket = new cloud.Bucket();\n')
    let = tree.root.children[0]
    assert let.kind is NodeKind.LET
    assert let.name == "bucket"
    assert let.children[0].kind is NodeKind.CONSTRUCTOR
    assert let.children[0].name == "cloud.Bucket"


def test_method_call_chain_nests_left():
    expr = parse_expression('a.b().c(1).d()')
    assert expr.kind is NodeKind.METHOD_CALL
    assert expr.name == "d"
    inner = expr.children[0]
    assert inner.kind is NodeKind.METHOD_CALL
    assert inner.name == "c"
    assert inner.children[1].value == 1
    assert inner.children[0].kind is NodeKind.METHOD_CALL
    assert inner.children[0].name == "b"


def test_bare_call_only_on_plain_name():
    expr = parse_expression('handle(req)')
    assert expr.kind is NodeKind.BARE_CALL
    assert expr.name == "handle"
    # A dotted callee is a method call on a member chain, not a bare call.
    dotted = parse_expression('util.handle(req)')
    assert dotted.kind is NodeKind.METHOD_CALL


def test_member_access_without_call():
    expr = parse_expression('req.body')
    assert expr.kind is NodeKind.MEMBER_ACCESS
    assert expr.name == "body"
    assert expr.children[0].kind is NodeKind.NAME


def test_duration_literals_normalise_to_seconds():
    for text, seconds in [("1s", 1), ("30s", 30), ("5m", 300), ("2h", 7200), ("1d", 86400)]:
        node = parse_expression(text)
        assert node.kind is NodeKind.DURATION
        assert node.value == seconds


def test_decimal_numbers_are_exact_fractions():
    node = parse_expression('0.1')
    assert node.kind is NodeKind.NUMBER
    assert node.value == Fraction(1, 10)
    assert parse_expression('12').value == 12
    assert isinstance(parse_expression('12').value, int)


def test_string_escapes():
    node = parse_expression(r'"a\"b\\c\nd\te\rf"')
    assert node.value == 'a"b\\c\nd\te\rf'


def test_string_rejects_unknown_escape():
    bad = '"' + chr(92) + 'q"'
    with pytest.raises(PennyError):
        parse_expression(bad)


def test_raw_multibyte_text_in_strings():
    node = parse_expression('"café"')
    assert node.value == "café"
    assert node.span.end_byte == len('"café"'.encode())


def test_annotation_wrapper_shape():
    expr = parse_expression('[q.push(msg), { requestsPerMonth: 100 }][0]')
    assert expr.kind is NodeKind.ANNOTATION_WRAPPER
    assert expr.children[0].kind is NodeKind.METHOD_CALL
    assert expr.children[1].kind is NodeKind.OBJECT_LITERAL


def test_wrapper_index_recorded_for_validation():
    # The parser keeps whatever index was written; the annotation reader
    # is the layer that insists on zero.
    expr = parse_expression('[q.push(msg), { a: 1 }][1]')
    assert expr.kind is NodeKind.ANNOTATION_WRAPPER
    assert expr.value == 1


def test_object_literal_fields_and_named_args():
    expr = parse_expression('f(timeout: 30s, cpu: 0.25)')
    named = [c for c in expr.children if c.kind is NodeKind.NAMED_ARG]
    assert [n.name for n in named] == ["timeout", "cpu"]
    lit = parse_expression('MyOpts { a: 1, b: "x" }')
    assert lit.kind is NodeKind.OBJECT_LITERAL
    assert lit.name == "MyOpts"
    assert [f.name for f in lit.children] == ["a", "b"]


def test_if_let_scrutinee_refuses_typed_struct():
    tree = parse('if let x = maybe() {\n  log(x);\n}\n')
    if_let = tree.root.children[0]
    assert if_let.kind is NodeKind.IF_LET
    assert if_let.name == "x"
    # `Opts { ... }` after the scrutinee would swallow the arm block.
    with pytest.raises(PennyError):
        parse('if let x = Opts { a: 1 } {\n}\n')


def test_closure_phase_tracking():
    src = (
        'bring cloud;\n'
        'let api = new cloud.Api();\n'
        'api.get("/x", inflight (req: cloud.ApiRequest) => {\n'
        '  return req.body;\n'
        '});\n'
    )
    tree = parse(src)
    closure = next(tree.root.find(NodeKind.CLOSURE))
    assert phase_of(tree, closure.children[-1].span) is Phase.INFLIGHT
    bring = tree.root.children[0]
    assert phase_of(tree, bring.span) is Phase.PREFLIGHT


def test_spans_reproduce_source_bytes(fixture_source):
    tree = parse(fixture_source)
    data = fixture_source.text.encode()
    for node in tree.walk():
        if node.kind not in EXPRESSION_KINDS:
            continue
        piece = data[node.span.start_byte:node.span.end_byte].decode()
        assert piece == tree.text_of(node)
        assert piece.strip() == piece, f"padded span on {node.kind}"


def test_expression_spans_reparse_to_same_kind(fixture_source):
    """Any expression's source slice is itself a parseable expression."""
    tree = parse(fixture_source)
    data = fixture_source.text.encode()
    checked = 0
    for node in tree.walk():
        if node.kind not in EXPRESSION_KINDS or node.kind is NodeKind.CLOSURE:
            continue
        piece = data[node.span.start_byte:node.span.end_byte].decode()
        again = parse_expression(piece)
        assert again.kind is node.kind
        checked += 1
    assert checked > 40


def test_comments_are_invisible_to_structure():
    bare = parse('let a = f();\nlet b = g();\n')
    noisy = parse('// lead\nlet a = f(); // tail\n// middle\nlet b = g();\n')
    assert [c.kind for c in bare.root.children] == [c.kind for c in noisy.root.children]
    assert [c.name for c in bare.root.children] == [c.name for c in noisy.root.children]


def test_error_carries_span():
    with pytest.raises(PennyError) as exc:
        parse('let = 3;\n')
    assert exc.value.span is not None
    assert exc.value.span.start_byte >= 4


def test_error_on_unterminated_block():
    with pytest.raises(PennyError):
        parse('api.get("/x", inflight (req: cloud.ApiRequest) => {\n  return 1;\n')


def test_error_on_trailing_garbage():
    with pytest.raises(PennyError):
        parse_expression('f() )')


def test_parse_accepts_plain_string():
    tree = parse('bring cloud;\n')
    assert isinstance(tree.source, SourceFile)
    assert tree.source.version == 1


def test_expression_at_finds_exact_span(fixture_source):
    tree = parse(fixture_source)
    call = next(n for n in tree.walk() if n.kind is NodeKind.METHOD_CALL)
    found = tree.expression_at(call.span.start_byte, call.span.end_byte)
    assert found is call
    assert tree.expression_at(call.span.start_byte, call.span.end_byte + 1) is None
