import pytest

from modal_nbe.checker import System, synth
from modal_nbe.oracle import FuelExhausted, beta_normalize, beta_step, eta_expand, has_beta_redex, oracle_normalize
from modal_nbe.parser import parse_term
from modal_nbe.subst import semi_id
from modal_nbe.syntax import App, Arr, B, Box, BoxT, CBox, CUnbox, Lam, Unbox, Var

S4 = System.S4
BB = Arr(B, B)


def test_lambda_beta():
    assert beta_normalize(S4, ((B,),), App(Lam(B, Var(0)), Var(0))) == Var(0)


def test_box_beta():
    G = ((BoxT(B),), ())
    assert beta_normalize(S4, G, Unbox(1, Box(Unbox(1, Var(0))))) == Unbox(1, Var(0))


def test_contextual_beta_with_identity():
    cap = ((B,),)
    G = ((), (B,))
    t = CUnbox(CBox(cap, Var(0)), semi_id(cap))
    assert beta_normalize(S4, G, t) == Var(0)


def test_contextual_beta_substitutes():
    t = parse_term(r"cunbox (cbox {x : B} x) with (y ^ 0)", [["y"]])
    assert beta_normalize(S4, ((B,),), t) == Var(0)


def test_eta_examples():
    G = ((BoxT(B), BB, B),)
    assert eta_expand(S4, G, BoxT(B), Var(2)) == Box(Unbox(1, Var(2)))
    assert eta_expand(S4, G, BB, Var(1)) == Lam(B, App(Var(2), Var(0)))
    assert eta_expand(S4, G, B, Var(0)) == Var(0)


def test_eta_expands_arguments():
    G = ((Arr(BB, B), BB),)
    t = App(Var(1), Var(0))
    assert eta_expand(S4, G, B, t) == App(Var(1), Lam(B, App(Var(1), Var(0))))


def test_oracle_normalize_box():
    assert oracle_normalize(S4, ((BoxT(B),),), BoxT(B), Var(0)) == Box(Unbox(1, Var(0)))


def test_oracle_fusion():
    t = parse_term(r"\x : []B. unbox 0 (box (unbox 1 x))")
    assert oracle_normalize(S4, ((),), None, t) == Lam(BoxT(B), Unbox(0, Var(0)))


def test_steps_are_reported():
    t = parse_term(r"(\x : B. (\y : B. y) x) z", [["z"]])
    seen = []
    assert beta_normalize(S4, ((B,),), t, on_step=seen.append) == Var(0)
    assert len(seen) == 2
    for u in seen:
        assert synth(S4, ((B,),), u) == B


def test_fuel_exhaustion():
    t = App(Lam(B, Var(0)), Var(0))
    with pytest.raises(FuelExhausted):
        beta_normalize(S4, ((B,),), t, fuel=0)


def test_leftmost_outermost():
    t = App(Lam(B, Var(0)), App(Lam(B, Var(0)), Var(0)))
    assert beta_step(t, (1,)) == App(Lam(B, Var(0)), Var(0))


def test_has_beta_redex():
    assert has_beta_redex(App(Lam(B, Var(0)), Var(0)))
    assert has_beta_redex(Box(Unbox(1, Box(Var(0)))))
    assert not has_beta_redex(Lam(B, App(Var(1), Var(0))))
