import pytest
from hypothesis import given, strategies as st

from modal_nbe.checker import System
from modal_nbe.generate import corpus
from modal_nbe.parser import (
    LexError,
    ParseError,
    ScopeError,
    parse_file,
    parse_open_term,
    parse_term,
    parse_type,
    pretty,
    pretty_stack,
    pretty_ty,
)
from modal_nbe.syntax import App, Arr, B, Box, BoxT, CtxT, Lam, Unbox, Var

AXIOM_K = Lam(None, Lam(None, Box(App(Unbox(1, Var(1)), Unbox(1, Var(0))))))


def test_axiom_k_term():
    assert parse_term(r"\f. \x. box ((unbox 1 f) (unbox 1 x))") == AXIOM_K


def test_unicode_syntax():
    assert parse_term("λf. λx. box ((unbox 1 f) (unbox 1 x))") == AXIOM_K
    assert parse_type("□B → B") == Arr(BoxT(B), B)


def test_unbound_name_is_scope_error():
    with pytest.raises(ScopeError):
        parse_term("box x")


def test_variable_not_visible_under_box():
    with pytest.raises(ScopeError):
        parse_term(r"\x. unbox 0 (box x)")


def test_unbox_maps_directly():
    assert parse_term("unbox 0 x", [["x"]]) == Unbox(0, Var(0))


def test_open_term_collects_free_names():
    t, worlds = parse_open_term("unbox 1 f y")
    assert worlds == (("f",), ("y",))
    assert t == App(Unbox(1, Var(0)), Var(0))


def test_box_takes_an_atom():
    assert parse_term("unbox 1 f x", [["f"], ["x"]]) == App(Unbox(1, Var(0)), Var(0))


def test_pretty_lambda():
    assert pretty(Lam(None, Var(0))) == r"\x0. x0"


def test_pretty_free_variable_with_names():
    t = parse_term(r"(\x. x) y", [["y"]])
    assert pretty(t, [["y"]]) == r"(\x. x) y"
    assert parse_term(pretty(t, [["y"]]), [["y"]]) == t


def test_pretty_free_variable_without_names():
    assert pretty(parse_term(r"(\x. x) y", [["y"]])) == r"(\x. x) _0"


def test_axiom_4_round_trip():
    t = parse_term(r"\x. box (box (unbox 2 x))")
    assert parse_term(pretty(t)) == t


def test_types_round_trip():
    for src in ["B", "[]B -> B", "(B -> B) -> B", "[][](B -> B)", "[x : B ; . |- B -> B]"]:
        ty = parse_type(src)
        assert parse_type(pretty_ty(ty)) == ty
    assert parse_type("[x : B |- B]") == CtxT(((B,),), B)


def test_arrow_is_right_associative():
    assert parse_type("B -> B -> B") == Arr(B, Arr(B, B))


def test_lex_error_position():
    with pytest.raises(LexError) as info:
        parse_term("x $ y")
    assert (info.value.line, info.value.col) == (1, 3)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_file("def a\n  \\x : B. (x")
    assert info.value.line == 2
    assert info.value.to_json()["kind"] == "parse-error"


def test_duplicate_definition():
    with pytest.raises(ParseError, match="a"):
        parse_file("def a [x : B |- ] x\ndef a [x : B |- ] x")


def test_file_header_and_stacks():
    src = parse_file("system k4\ndef f [g : []B ; . ; x : B |- ] unbox 2 g : B")
    assert src.system is System.K4
    (d,) = src.decls
    assert d.stack == ((BoxT(B),), (), (B,))
    assert d.term == Unbox(2, Var(0))
    assert d.ty == B
    assert pretty_stack(d.stack, d.names) == "g : []B ; . ; x : B"


def test_comments_and_default_stack():
    src = parse_file("-- nothing here\ndef i \\x : B. x -- trailing\n")
    assert src.system is None
    assert src.decls[0].stack == ((),)


def test_contextual_syntax_round_trip():
    src = r"cunbox (cbox {x : B} x) with (y ^ 0)"
    t = parse_term(src, [["y"]])
    assert parse_term(pretty(t, [["y"]]), [["y"]]) == t


@given(st.integers(0, 10_000), st.sampled_from(list(System)))
def test_pretty_parse_round_trip(seed, system):
    ((cfg, t),) = corpus(system, 1, seed=seed, max_size=15)
    names = [[f"v{i}_{j}" for j in range(len(ctx))] for i, ctx in enumerate(cfg.stack)]
    assert parse_term(pretty(t, names), names) == t


@given(st.integers(0, 10_000))
def test_contextual_round_trip(seed):
    ((cfg, t),) = corpus(System.S4, 1, seed=seed, max_size=12, contextual=True)
    names = [[f"v{i}_{j}" for j in range(len(ctx))] for i, ctx in enumerate(cfg.stack)]
    assert parse_term(pretty(t, names), names) == t
