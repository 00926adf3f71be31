"""Normalization by evaluation for the box/arrow fragment.

Semantic values are first-order data.  A value always lives at some stack
shape (a tuple of context sizes); shapes are passed alongside values rather
than stored in them, since nameless neutrals need nothing more.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .checker import System, TypeCheckError, synth
from .kweak import Ext, kweak_compose, kweak_id, kweak_trunc, kweak_trunc_offset, rename, skip
from .parser import pretty_ty
from .syntax import App, Arr, Base, Box, BoxT, CBox, CtxT, CUnbox, Lam, Unbox, Var, is_modal_fragment, shape


class UnsupportedFragment(Exception):
    """Raised on contextual constructors, which have no evaluation rules."""


class NbeError(RuntimeError):
    """An internal invariant failed; impossible on well-typed input."""


# -- values and environments -------------------------------------------------


@dataclass(frozen=True)
class VNe:
    ty: object
    ne: object


@dataclass(frozen=True)
class Clos:
    env: Env
    ann: object
    body: object
    weak: object = None  # pending weakening of env; None is the identity


@dataclass(frozen=True)
class NeFun:
    ty: Arr
    ne: object


@dataclass(frozen=True)
class VFun:
    fun: Union[Clos, NeFun]


@dataclass(frozen=True)
class VBox:
    inner: Value


Value = Union[VNe, VFun, VBox]


@dataclass(frozen=True)
class ETop:
    local: tuple = ()


@dataclass(frozen=True)
class ECons:
    offset: int
    tail: Env
    local: tuple = ()


Env = Union[ETop, ECons]


def env_extend(r, v):
    match r:
        case ETop(local):
            return ETop(local + (v,))
        case ECons(off, tail, local):
            return ECons(off, tail, local + (v,))


def env_trunc(r, n: int):
    for _ in range(n):
        if not isinstance(r, ECons):
            raise NbeError("truncation exceeds stack")
        r = r.tail
    return r


def env_trunc_offset(r, n: int) -> int:
    total = 0
    for _ in range(n):
        if not isinstance(r, ECons):
            raise NbeError("truncation exceeds stack")
        total += r.offset
        r = r.tail
    return total


def env_offsets(r) -> list[int]:
    out = []
    while isinstance(r, ECons):
        out.append(r.offset)
        r = r.tail
    return out


# -- functorial action of weakenings ----------------------------------------


def weaken_value(v, g):
    match v:
        case VNe(ty, ne):
            return VNe(ty, rename(ne, g))
        case VFun(Clos(env, ann, body, weak)):
            return VFun(Clos(env, ann, body, g if weak is None else kweak_compose(weak, g)))
        case VFun(NeFun(ty, ne)):
            return VFun(NeFun(ty, rename(ne, g)))
        case VBox(inner):
            return VBox(weaken_value(inner, Ext(g, 1)))
    raise NbeError(f"not a value: {v!r}")


def weaken_env(r, g):
    match r:
        case ETop(local):
            return ETop(tuple(weaken_value(v, g) for v in local))
        case ECons(off, tail, local):
            return ECons(
                kweak_trunc_offset(g, off),
                weaken_env(tail, kweak_trunc(g, off)),
                tuple(weaken_value(v, g) for v in local),
            )
    raise NbeError(f"not an environment: {r!r}")


# -- evaluation ---------------------------------------------------------------


def _top_local(r):
    return r.local


def eval_term(t, r, shp):
    """Evaluate `t` in environment `r`, which lives at stack shape `shp`."""
    match t:
        case Var(ix):
            local = _top_local(r)
            if not 0 <= ix < len(local):
                raise NbeError(f"variable {ix} outside environment")
            return local[-1 - ix]
        case Box(body):
            return VBox(eval_term(body, ECons(1, r, ()), shp + (0,)))
        case Unbox(n, body):
            m = env_trunc_offset(r, n)
            lower = shp[: len(shp) - m]
            v = eval_term(body, env_trunc(r, n), lower)
            if not isinstance(v, VBox):
                raise NbeError(f"unbox of a non-box value {v!r}")
            return weaken_value(v.inner, Ext(kweak_id(lower), m))
        case Lam(ann, body):
            return VFun(Clos(r, ann, body))
        case App(f, a):
            return apply_fun(eval_term(f, r, shp), None, eval_term(a, r, shp), shp)
        case CBox() | CUnbox():
            raise UnsupportedFragment("contextual types have no evaluation rules; normalization covers box and arrow only")
    raise NbeError(f"not a term: {t!r}")


def apply_fun(f, g, a, shp):
    """Apply the function value `f` along weakening `g` (None for identity)
    to `a`; `shp` is the domain shape of `g`, where `a` lives."""
    if not isinstance(f, VFun):
        raise NbeError(f"application of a non-function value {f!r}")
    match f.fun:
        case Clos(env, _, body, weak):
            w = weak if g is None else (g if weak is None else kweak_compose(weak, g))
            env = env if w is None else weaken_env(env, w)
            return eval_term(body, env_extend(env, a), shp)
        case NeFun(Arr(dom, cod), ne):
            head = ne if g is None else rename(ne, g)
            return reflect(cod, App(head, reify(dom, a, shp)), shp)
    raise NbeError(f"not a function: {f!r}")


def reflect(ty, ne, shp):
    match ty:
        case Base():
            return VNe(ty, ne)
        case BoxT(body):
            return VBox(reflect(body, Unbox(1, ne), shp + (0,)))
        case Arr():
            return VFun(NeFun(ty, ne))
        case CtxT():
            raise UnsupportedFragment("cannot reflect at a contextual type")
    raise NbeError(f"not a type: {ty!r}")


def reify(ty, v, shp):
    match ty, v:
        case Base(), VNe(_, ne):
            return ne
        case BoxT(body), VBox(inner):
            return Box(reify(body, inner, shp + (0,)))
        case Arr(dom, cod), VFun():
            ext = shp[:-1] + (shp[-1] + 1,)
            x = reflect(dom, Var(0), ext)
            return Lam(dom, reify(cod, apply_fun(v, skip(kweak_id(shp)), x, ext), ext))
        case CtxT(), _:
            raise UnsupportedFragment("cannot reify at a contextual type")
    raise NbeError(f"value {v!r} does not inhabit {ty!r}")


def id_env(G):
    """The environment reflecting every variable of G as itself."""
    if len(G[-1]) == 0:
        if len(G) == 1:
            return ETop(())
        return ECons(1, id_env(G[:-1]), ())
    *ctx, ty = G[-1]
    smaller = G[:-1] + (tuple(ctx),)
    r = weaken_env(id_env(smaller), skip(kweak_id(shape(smaller))))
    return env_extend(r, reflect(ty, Var(0), shape(G)))


def nbe(sys: System, G, ty, t):
    """Normalize `t : ty` in stack G to its beta-normal eta-long form."""
    if not is_modal_fragment(t):
        raise UnsupportedFragment("normalization covers box and arrow only; contextual terms are not supported")
    got = synth(sys, G, t)
    if ty is None:
        ty = got
    elif got != ty:
        raise TypeCheckError("type-mismatch", f"term has type {pretty_ty(got)}, expected {pretty_ty(ty)}", t.span)
    shp = shape(G)
    return reify(ty, eval_term(t, id_env(G), shp), shp)


def normalize(sys: System, G, t):
    """Synthesize the type of `t` and normalize at it."""
    return nbe(sys, G, None, t)
