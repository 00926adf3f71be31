"""Reduction-based normalizer, independent of the evaluator in `nbe`.

Beta steps go through `subst.term_subst`, `subst.mot_apply` and the
K-substitution operation; eta expansion is type-directed.  Both are looked up
through the `subst` module at call time so tests can swap in mutants.
"""

from __future__ import annotations

from . import subst
from .checker import System, synth
from .syntax import (
    App,
    Arr,
    Box,
    BoxT,
    CBox,
    CtxT,
    CUnbox,
    Lam,
    SemiKSub,
    Unbox,
    Var,
    extend_top,
    shape,
    subterms,
)

DEFAULT_FUEL = 10**6


class FuelExhausted(RuntimeError):
    pass


def contract(t, shp):
    """Contract `t` if it is a redex at stack shape `shp`, else None."""
    match t:
        case App(Lam(_, body), arg):
            return subst.term_subst(body, 0, arg)
        case Unbox(n, Box(body)):
            return subst.mot_apply(body, n, 0)
        case CUnbox(CBox(_, body), sub):
            return subst.ksub_apply(body, subst.semi_to_ksub(sub, shp))
    return None


def _trunc(shp, n):
    return shp[: len(shp) - n]


def beta_step(t, shp):
    """One leftmost-outermost beta step, or None when `t` is beta-normal."""
    r = contract(t, shp)
    if r is not None:
        return r
    match t:
        case Var():
            return None
        case Box(body):
            b = beta_step(body, shp + (0,))
            return None if b is None else Box(b, span=t.span)
        case Unbox(n, body):
            b = beta_step(body, _trunc(shp, n))
            return None if b is None else Unbox(n, b, span=t.span)
        case Lam(ann, body):
            b = beta_step(body, shp[:-1] + (shp[-1] + 1,))
            return None if b is None else Lam(ann, b, span=t.span)
        case App(f, a):
            b = beta_step(f, shp)
            if b is not None:
                return App(b, a, span=t.span)
            b = beta_step(a, shp)
            return None if b is None else App(f, b, span=t.span)
        case CBox(cap, body):
            b = beta_step(body, shp + tuple(len(c) for c in cap))
            return None if b is None else CBox(cap, b, span=t.span)
        case CUnbox(body, sub):
            total = subst.semi_offset(sub)
            b = beta_step(body, _trunc(shp, total))
            if b is not None:
                return CUnbox(b, sub, span=t.span)
            cur = shp
            exts = list(sub.exts)
            for j in range(len(exts) - 1, -1, -1):
                off, terms = exts[j]
                for i, u in enumerate(terms):
                    b = beta_step(u, cur)
                    if b is not None:
                        exts[j] = (off, terms[:i] + (b,) + terms[i + 1 :])
                        return CUnbox(body, SemiKSub(tuple(exts)), span=t.span)
                cur = _trunc(cur, off)
            return None
    raise TypeError(f"not a term: {t!r}")


def beta_normalize(sys: System, G, t, fuel=DEFAULT_FUEL, on_step=None):
    """Reduce `t` to beta-normal form; `on_step` sees every intermediate term."""
    shp = shape(G)
    steps = 0
    while True:
        nxt = beta_step(t, shp)
        if nxt is None:
            return t
        steps += 1
        if steps > fuel:
            raise FuelExhausted(f"no beta-normal form within {fuel} steps")
        t = nxt
        if on_step is not None:
            on_step(t)


def _wrap(ty, ne, G):
    """Eta-expand an already expanded neutral at type `ty`."""
    match ty:
        case Arr(dom, cod):
            G2 = extend_top(G, dom)
            x = _wrap(dom, Var(0), G2)
            return Lam(dom, _wrap(cod, App(subst.shift(ne), x), G2))
        case BoxT(body):
            return Box(_wrap(body, Unbox(1, ne), G + ((),)))
    return ne


def _exp_ne(t, G):
    """Expand the arguments inside a neutral; returns (term, type)."""
    match t:
        case Var(ix):
            return t, G[-1][-1 - ix]
        case App(f, a):
            f2, fty = _exp_ne(f, G)
            return App(f2, _exp_nf(fty.dom, a, G), span=t.span), fty.cod
        case Unbox(n, body):
            b2, bty = _exp_ne(body, G[: len(G) - n])
            return Unbox(n, b2, span=t.span), bty.body
        case CUnbox(body, sub):
            total = subst.semi_offset(sub)
            b2, bty = _exp_ne(body, G[: len(G) - total])
            exts = []
            cur = G
            for (off, terms), ctx in zip(reversed(sub.exts), reversed(bty.capture)):
                exts.append((off, tuple(_exp_nf(want, u, cur) for u, want in zip(terms, ctx))))
                cur = cur[: len(cur) - off]
            return CUnbox(b2, SemiKSub(tuple(reversed(exts))), span=t.span), bty.body
    raise TypeError(f"not a neutral term: {t!r}")


def _exp_nf(ty, t, G):
    match ty, t:
        case Arr(dom, cod), Lam(ann, body):
            return Lam(ann, _exp_nf(cod, body, extend_top(G, dom)), span=t.span)
        case BoxT(body_ty), Box(body):
            return Box(_exp_nf(body_ty, body, G + ((),)), span=t.span)
        case CtxT(cap, body_ty), CBox(_, body):
            return CBox(cap, _exp_nf(body_ty, body, G + tuple(cap)), span=t.span)
    t2, _ = _exp_ne(t, G)
    if isinstance(ty, CtxT):
        return t2
    return _wrap(ty, t2, G)


def eta_expand(sys: System, G, ty, t):
    """Eta-expand a beta-normal term of type `ty` to eta-long form."""
    return _exp_nf(ty, t, G)


def oracle_normalize(sys: System, G, ty, t, fuel=DEFAULT_FUEL):
    if ty is None:
        ty = synth(sys, G, t)
    return eta_expand(sys, G, ty, beta_normalize(sys, G, t, fuel))


def has_beta_redex(t) -> bool:
    """Syntactic scan for a beta redex of any kind."""
    for u in subterms(t):
        match u:
            case App(Lam(), _) | Unbox(_, Box()) | CUnbox(CBox(), _):
                return True
    return False


from .generate import GenConfig, GenerationFailed, gen_equiv_pair, gen_term  # noqa: E402,F401
