import pytest
from hypothesis import given, strategies as st

from modal_nbe.checker import ALL_SYSTEMS, System, TypeCheckError, check, check_ksub, check_semisub, synth, well_typed
from modal_nbe.parser import parse_term, parse_type
from modal_nbe.subst import ksub_id, semi_id
from modal_nbe.syntax import Arr, B, BoxT, CBox, CtxT, SemiKSub, Unbox, Var

EMPTY = ((),)
AXIOMS = {
    "K": (r"\f : [](B -> B). \x : []B. box ((unbox 1 f) (unbox 1 x))", "[](B -> B) -> []B -> []B"),
    "T": (r"\x : []B. unbox 0 x", "[]B -> B"),
    "4": (r"\x : []B. box (box (unbox 2 x))", "[]B -> [][]B"),
}
# which systems admit which axiom, by their allowed unbox levels
MATRIX = {
    "K": {System.K, System.T, System.K4, System.S4},
    "T": {System.T, System.S4},
    "4": {System.K4, System.S4},
}


def test_unbox_levels():
    assert [n for n in range(4) if System.K.ul_allowed(n)] == [1]
    assert [n for n in range(4) if System.T.ul_allowed(n)] == [0, 1]
    assert [n for n in range(4) if System.K4.ul_allowed(n)] == [1, 2, 3]
    assert [n for n in range(4) if System.S4.ul_allowed(n)] == [0, 1, 2, 3]


@pytest.mark.parametrize("axiom", sorted(AXIOMS))
@pytest.mark.parametrize("sys", ALL_SYSTEMS, ids=str)
def test_axiom_matrix(axiom, sys):
    src, ty = AXIOMS[axiom]
    t = parse_term(src)
    if sys in MATRIX[axiom]:
        assert synth(sys, EMPTY, t) == parse_type(ty)
    else:
        with pytest.raises(TypeCheckError) as info:
            synth(sys, EMPTY, t)
        assert info.value.kind == "ul-violation"


def test_t_axiom_in_k_reports_level():
    with pytest.raises(TypeCheckError) as info:
        synth(System.K, EMPTY, parse_term(r"\x : []B. unbox 0 x"))
    err = info.value
    assert err.level == 0 and err.system is System.K
    assert err.span is not None and err.to_json()["kind"] == "ul-violation"


def test_variable_rule():
    assert synth(System.S4, ((B,),), Var(0)) == B


def test_variable_of_lower_world_is_unbound():
    with pytest.raises(TypeCheckError) as info:
        synth(System.S4, ((B,), ()), Var(0))
    assert info.value.kind == "unbound-variable"


def test_unbox_past_stack_bottom():
    with pytest.raises(TypeCheckError) as info:
        synth(System.S4, ((BoxT(B),),), Unbox(1, Var(0)))
    assert info.value.kind == "stack-too-short"


def test_not_a_function_and_not_a_box():
    with pytest.raises(TypeCheckError) as info:
        synth(System.S4, ((B,),), parse_term("x x", [["x"]]))
    assert info.value.kind == "not-a-function"
    with pytest.raises(TypeCheckError) as info:
        synth(System.S4, ((B,),), parse_term("unbox 0 x", [["x"]]))
    assert info.value.kind == "not-a-box"


def test_missing_annotation():
    with pytest.raises(TypeCheckError) as info:
        synth(System.S4, EMPTY, parse_term(r"\x. x"))
    assert info.value.kind == "missing-annotation"


def test_check_against_expected():
    t = parse_term(r"\x : B. x")
    check(System.K, EMPTY, t, Arr(B, B))
    with pytest.raises(TypeCheckError) as info:
        check(System.K, EMPTY, t, B)
    assert info.value.kind == "type-mismatch"
    assert well_typed(System.K, EMPTY, t) and not well_typed(System.K, EMPTY, t, B)


def test_contextual_typing():
    t = parse_term(r"cbox {x : B} x")
    assert synth(System.S4, EMPTY, t) == CtxT(((B,),), B)
    run = parse_term(r"cunbox (cbox {x : B} x) with (y ^ 0)", [["y"]])
    assert synth(System.S4, ((B,),), run) == B
    # offset 0 is not an admissible level in K
    with pytest.raises(TypeCheckError):
        synth(System.K, ((B,),), run)


def test_empty_semisub_is_ok():
    check_semisub(System.K, EMPTY, SemiKSub(()), ())


def test_identity_semisub():
    D = ((B, BoxT(B)),)
    G = ((B,),) + D
    check_semisub(System.S4, G, semi_id(D), D)


def test_semisub_mismatch():
    with pytest.raises(TypeCheckError) as info:
        check_semisub(System.S4, ((B,), (B,)), SemiKSub(((1, (Var(0),)),)), ((BoxT(B),),))
    assert info.value.kind == "substitution-mismatch"


def test_semisub_levels_checked_per_system():
    s = SemiKSub(((0, (Var(0),)),))
    check_semisub(System.T, ((B,),), s, ((B,),))
    with pytest.raises(TypeCheckError):
        check_semisub(System.K4, ((B,),), s, ((B,),))


def test_cunbox_needs_contextual_type():
    with pytest.raises(TypeCheckError) as info:
        synth(System.S4, ((B,),), parse_term("cunbox x with ()", [["x"]]))
    assert info.value.kind == "not-contextual"


@given(st.lists(st.lists(st.sampled_from([B, BoxT(B), Arr(B, B)]), max_size=3), min_size=1, max_size=4))
def test_identity_ksub_is_well_typed(ctxs):
    G = tuple(tuple(c) for c in ctxs)
    for sys in ALL_SYSTEMS:
        check_ksub(sys, G, ksub_id(G), G)


def test_cbox_captures_are_checked():
    with pytest.raises(TypeCheckError):
        synth(System.S4, EMPTY, CBox(((B,),), Var(1)))
