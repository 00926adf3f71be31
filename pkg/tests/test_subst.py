import random

import pytest
from hypothesis import given, strategies as st

from modal_nbe.checker import ALL_SYSTEMS, System, check_ksub, synth
from modal_nbe.generate import random_ksub, random_stack, random_typed_term
from modal_nbe.properties import mot_target
from modal_nbe.subst import (
    KSub,
    SubstError,
    compose,
    ksub_apply,
    ksub_id,
    lift,
    mot_apply,
    mot_as_ksub,
    semi_compose,
    semi_id,
    semi_offset,
    semi_to_ksub,
    shift,
    term_subst,
    trunc,
    trunc_offset,
)
from modal_nbe.syntax import App, B, Box, BoxT, Lam, SemiKSub, Unbox, Var


def test_subst_identity_body():
    assert term_subst(Var(0), 0, Var(3)) == Var(3)


def test_subst_closes_the_gap():
    ident = Lam(B, Var(0))
    assert term_subst(App(Var(0), Var(1)), 0, ident) == App(ident, Var(0))


def test_subst_descends_under_box():
    assert term_subst(Box(Unbox(1, Var(0))), 0, Var(5)) == Box(Unbox(1, Var(5)))


def test_subst_shifts_under_binders():
    assert term_subst(Lam(B, Var(1)), 0, Var(0)) == Lam(B, Var(1))


def test_shift_leaves_other_worlds():
    assert shift(Box(Var(0))) == Box(Var(0))
    assert shift(Box(Unbox(1, Var(0)))) == Box(Unbox(1, Var(1)))


def test_mot_examples():
    assert mot_apply(Var(0), 2, 0) == Var(0)
    assert mot_apply(Unbox(1, Var(0)), 2, 0) == Unbox(2, Var(0))
    assert mot_apply(Box(Unbox(1, Var(0))), 0, 0) == Box(Unbox(1, Var(0)))
    assert mot_apply(Unbox(1, Var(0)), 0, 0) == Unbox(0, Var(0))


def test_fusion_shifts_terms_moving_down():
    # under one binder of the upper world, x of the lower world becomes index 1
    t = Lam(B, Unbox(1, Var(0)))
    assert mot_apply(t, 0, 0) == Lam(B, Unbox(0, Var(1)))


def test_trunc_offset_zero():
    s = KSub((Var(0),), ((3, (Var(1),)),))
    assert trunc_offset(s, 0) == 0


def test_trunc_one_step():
    s = KSub((Var(0),), ((3, (Var(1),)),))
    assert trunc_offset(s, 1) == 3
    assert trunc(s, 1) == KSub((Var(0),))


def test_trunc_out_of_range():
    with pytest.raises(SubstError, match="truncation exceeds stack"):
        trunc(KSub(()), 1)
    with pytest.raises(SubstError, match="truncation exceeds stack"):
        trunc_offset(KSub(()), 1)


@pytest.mark.parametrize("depth", [1, 2, 4])
def test_identity_offsets(depth):
    G = ((B,),) * depth
    for n in range(depth):
        assert trunc_offset(ksub_id(G), n) == n


def test_ksub_id_examples():
    assert ksub_id(((),)) == KSub(())
    assert ksub_id(((B,),)) == KSub((Var(0),))


def test_apply_under_box():
    s = KSub((Var(4),))
    assert ksub_apply(Box(Unbox(1, Var(0))), s) == Box(Unbox(1, Var(4)))


def test_apply_unbox_uses_offset():
    s = KSub((Var(0),), ((3, ()),))
    assert ksub_apply(Unbox(1, Var(0)), s) == Unbox(3, Var(0))


def test_lift_extends_top():
    s = KSub((Var(2),))
    assert lift(s) == KSub((Var(3), Var(0)))


def test_semi_offset():
    assert semi_offset(SemiKSub(())) == 0
    assert semi_offset(SemiKSub(((2, ()), (1, ())))) == 3


def test_semi_to_ksub_identity():
    G = ((B,), (BoxT(B),), (B, B))
    assert semi_to_ksub(semi_id(G[1:]), G) == ksub_id(G)


def test_mot_as_ksub_offsets():
    D = ((B,), (B,))
    assert mot_as_ksub(2, 0, D).offsets() == (2,)
    assert mot_as_ksub(3, 0, D).offsets() == (3,)
    assert mot_as_ksub(0, 0, D).offsets() == (0,)


def test_mot_as_ksub_needs_two_worlds():
    with pytest.raises(SubstError, match="incompatible shapes"):
        mot_as_ksub(1, 0, ((B,),))


@pytest.mark.parametrize("n,l", [(0, 0), (1, 0), (2, 0), (0, 1), (3, 1)])
def test_mot_as_ksub_is_well_typed(n, l):
    D = ((B,), (BoxT(B), B), (B,))
    check_ksub(System.S4, mot_target(D, n, l), mot_as_ksub(n, l, D), D)


def _typed(rng, sys, D):
    for ty in (B, BoxT(B), *[t for c in D for t in c]):
        t = random_typed_term(rng, sys, D, ty, 10)
        if t is not None:
            return t, ty
    return None


@given(st.integers(0, 100_000), st.sampled_from(ALL_SYSTEMS))
def test_identity_action(seed, sys):
    rng = random.Random(seed)
    D = random_stack(rng, 4)
    got = _typed(rng, sys, D)
    if got is not None:
        assert ksub_apply(got[0], ksub_id(D)) == got[0]


@given(st.integers(0, 100_000), st.sampled_from(ALL_SYSTEMS))
def test_composition_laws(seed, sys):
    rng = random.Random(seed)
    D = random_stack(rng, 3)
    a = random_ksub(rng, sys, D)
    if a is None:
        return
    s, G = a
    b = random_ksub(rng, sys, G)
    if b is None:
        return
    d, G2 = b
    assert compose(ksub_id(D), s) == s
    assert compose(s, ksub_id(G)) == s
    sd = compose(s, d)
    check_ksub(sys, G2, sd, D)
    got = _typed(rng, sys, D)
    if got is not None:
        t, ty = got
        assert ksub_apply(t, sd) == ksub_apply(ksub_apply(t, s), d)
        assert synth(sys, G2, ksub_apply(t, sd)) == ty


@given(st.integers(0, 100_000))
def test_semi_compose_agrees_with_compose(seed):
    rng = random.Random(seed)
    sys = System.S4
    D = random_stack(rng, 3)
    a = random_ksub(rng, sys, D)
    if a is None:
        return
    s, G = a
    b = random_ksub(rng, sys, G)
    if b is None:
        return
    d, _ = b
    semi = SemiKSub(s.exts)
    lhs = semi_compose(semi, d)
    assert lhs.exts == compose(s, d).exts
