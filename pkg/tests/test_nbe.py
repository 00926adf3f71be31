import pytest
from hypothesis import given, strategies as st

from modal_nbe.checker import ALL_SYSTEMS, System, TypeCheckError
from modal_nbe.generate import corpus
from modal_nbe.kweak import P, kweak_id
from modal_nbe.nbe import (
    ECons,
    ETop,
    NeFun,
    UnsupportedFragment,
    VBox,
    VFun,
    VNe,
    apply_fun,
    env_trunc,
    env_trunc_offset,
    eval_term,
    id_env,
    nbe,
    normalize,
    reflect,
    reify,
    weaken_value,
)
from modal_nbe.oracle import oracle_normalize
from modal_nbe.parser import parse_term
from modal_nbe.syntax import App, Arr, B, Box, BoxT, Lam, Unbox, Var, is_normal

BB = Arr(B, B)


def test_weaken_by_identity():
    v = VBox(VNe(B, Unbox(1, Var(0))))
    assert weaken_value(v, kweak_id((1,))) == v


def test_weaken_box_value():
    v = VBox(VNe(B, Unbox(1, Var(0))))
    assert weaken_value(v, P(kweak_id((1,)))) == VBox(VNe(B, Unbox(1, Var(1))))


def test_env_truncation():
    tail = ETop((VNe(B, Var(0)),))
    r = ECons(2, tail, ())
    assert env_trunc(r, 1) == tail
    assert env_trunc_offset(r, 1) == 2
    assert env_trunc_offset(r, 0) == 0


def test_identity_env_offsets():
    G = ((B,), (), (BoxT(B),), ())
    r = id_env(G)
    for n in range(len(G)):
        assert env_trunc_offset(r, n) == n


def test_identity_env_examples():
    assert id_env(((),)) == ETop(())
    assert id_env(((B,),)) == ETop((VNe(B, Var(0)),))
    assert id_env(((), ())) == ECons(1, ETop(()), ())


def test_eval_variable():
    v = VNe(B, Var(7))
    assert eval_term(Var(0), ETop((v,)), (1,)) is v


def test_eval_fused_unbox():
    G = ((BoxT(B),),)
    t = Unbox(0, Box(Unbox(1, Var(0))))
    v = eval_term(t, id_env(G), (1,))
    assert reify(B, v, (1,)) == Unbox(0, Var(0))


def test_apply_identity_function():
    v = VNe(B, Var(0))
    f = eval_term(Lam(B, Var(0)), ETop((v,)), (1,))
    assert apply_fun(f, None, v, (1,)) == v
    assert apply_fun(f, kweak_id((1,)), v, (1,)) == v


def test_apply_neutral_function():
    f = VFun(NeFun(BB, Var(1)))
    x = reflect(B, Var(0), (2,))
    assert apply_fun(f, None, x, (2,)) == VNe(B, App(Var(1), Var(0)))


def test_reflect_examples():
    assert reflect(B, Var(0), (1,)) == VNe(B, Var(0))
    assert reflect(BoxT(B), Var(0), (1,)) == VBox(VNe(B, Unbox(1, Var(0))))


def test_reify_examples():
    assert reify(B, VNe(B, Var(0)), (1,)) == Var(0)
    assert reify(BoxT(B), reflect(BoxT(B), Var(0), (1,)), (1,)) == Box(Unbox(1, Var(0)))
    assert reify(BB, reflect(BB, Var(0), (1,)), (1,)) == Lam(B, App(Var(1), Var(0)))


def test_nbe_eta_box():
    assert nbe(System.S4, ((BoxT(B),),), BoxT(B), Var(0)) == Box(Unbox(1, Var(0)))


def test_nbe_box_beta():
    G = ((BoxT(B),), ())
    assert nbe(System.S4, G, B, Unbox(1, Box(Unbox(1, Var(0))))) == Unbox(1, Var(0))


def test_nbe_fusion():
    t = parse_term(r"\x : []B. unbox 0 (box (unbox 1 x))")
    assert normalize(System.S4, ((),), t) == Lam(BoxT(B), Unbox(0, Var(0)))


def test_nbe_axiom_k_is_normal():
    t = parse_term(r"\f : [](B -> B). \x : []B. box ((unbox 1 f) (unbox 1 x))")
    assert normalize(System.K, ((),), t) == t


def test_nbe_rejects_contextual_terms():
    with pytest.raises(UnsupportedFragment):
        normalize(System.S4, ((),), parse_term(r"cbox {x : B} x"))


def test_nbe_rejects_wrong_type():
    with pytest.raises(TypeCheckError):
        nbe(System.S4, ((B,),), BoxT(B), Var(0))


@given(st.integers(0, 100_000), st.sampled_from(ALL_SYSTEMS))
def test_agrees_with_oracle(seed, sys):
    ((cfg, t),) = corpus(sys, 1, seed=seed, max_size=20)
    nf = nbe(sys, cfg.stack, cfg.goal, t)
    assert nf == oracle_normalize(sys, cfg.stack, cfg.goal, t)
    assert is_normal(nf)


@given(st.integers(0, 100_000), st.sampled_from(ALL_SYSTEMS))
def test_normal_forms_are_fixed_points(seed, sys):
    ((cfg, t),) = corpus(sys, 1, seed=seed, max_size=20)
    nf = nbe(sys, cfg.stack, cfg.goal, t)
    assert nbe(sys, cfg.stack, cfg.goal, nf) == nf
