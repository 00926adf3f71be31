"""Kripke-style weakenings and their action on terms.

A weakening g : G' =>w G moves terms typed in G (the codomain) to G'.
`Q` keeps the newest binding on both sides, `P` skips the newest domain
binding, and `Ext(tail, n)` opens an empty codomain world on top of n domain
contexts.  The domain contents of skipped worlds are not recorded; they never
influence how a term is renamed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .subst import KSub, lift, weaken_top
from .syntax import App, Box, CBox, CUnbox, Lam, SemiKSub, Unbox, Var


class WeakeningError(ValueError):
    pass


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Q:
    tail: KWeak


@dataclass(frozen=True)
class P:
    tail: KWeak


@dataclass(frozen=True)
class Ext:
    tail: KWeak
    offset: int


KWeak = Union[Eps, Q, P, Ext]
EPS = Eps()


def skip(g):
    """P(g) in canonical form.

    Directly above an extension the skipped binding sits in the world the
    extension opened: with offset 0 that world is the tail's, so the skip
    moves below; with a positive offset the extension already ignores every
    binding of that world, so the skip disappears.
    """
    if isinstance(g, Ext):
        return Ext(skip(g.tail), 0) if g.offset == 0 else g
    return P(g)


def qs(g, k):
    for _ in range(k):
        g = Q(g)
    return g


def ps(g, k):
    for _ in range(k):
        g = skip(g)
    return g


def kweak_id(shape) -> KWeak:
    sizes = tuple(shape)
    g = qs(EPS, sizes[0])
    for k in sizes[1:]:
        g = qs(Ext(g, 1), k)
    return g


def codomain(g) -> tuple[int, ...]:
    match g:
        case Eps():
            return (0,)
        case Q(tail):
            c = codomain(tail)
            return c[:-1] + (c[-1] + 1,)
        case P(tail):
            return codomain(tail)
        case Ext(tail, _):
            return codomain(tail) + (0,)
    raise TypeError(f"not a weakening: {g!r}")


def kweak_trunc(g, n: int) -> KWeak:
    """Drop the n topmost codomain worlds.

    Bindings added above an offset-0 extension belong to the same domain
    world as the truncated part, so they are kept as skipped bindings.
    """
    if n < 0:
        raise WeakeningError(f"negative truncation {n}")
    carry = 0
    while n > 0:
        match g:
            case Q(tail) | P(tail):
                carry += 1
                g = tail
            case Ext(tail, off):
                if off > 0:
                    carry = 0
                g = tail
                n -= 1
            case Eps():
                raise WeakeningError("truncation exceeds stack")
    return ps(g, carry)


def kweak_trunc_offset(g, n: int) -> int:
    if n < 0:
        raise WeakeningError(f"negative truncation {n}")
    total = 0
    while n > 0:
        match g:
            case Q(tail) | P(tail):
                g = tail
            case Ext(tail, off):
                total += off
                g = tail
                n -= 1
            case Eps():
                raise WeakeningError("truncation exceeds stack")
    return total


def kweak_compose(a, b) -> KWeak:
    """The weakening that acts like `a` followed by `b`."""
    match a, b:
        case Ext(tail, off), _:
            return Ext(kweak_compose(tail, kweak_trunc(b, off)), kweak_trunc_offset(b, off))
        case Eps(), _:
            return b
        case _, P(btail):
            return skip(kweak_compose(a, btail))
        case Q(atail), Q(btail):
            return Q(kweak_compose(atail, btail))
        case P(atail), Q(btail):
            return skip(kweak_compose(atail, btail))
    raise WeakeningError(f"cannot compose weakenings of mismatched shapes: {a!r} then {b!r}")


def rename_var(ix: int, g) -> int:
    base = 0
    while True:
        match g:
            case Q(tail):
                if ix == 0:
                    return base
                ix -= 1
                base += 1
                g = tail
            case P(tail):
                base += 1
                g = tail
            case _:
                raise WeakeningError(f"variable {ix} is not in the weakening's codomain")


def rename(t, g):
    """Apply a weakening to a term."""
    match t:
        case Var(ix):
            return Var(rename_var(ix, g), span=t.span)
        case Box(body):
            return Box(rename(body, Ext(g, 1)), span=t.span)
        case Unbox(n, body):
            return Unbox(kweak_trunc_offset(g, n), rename(body, kweak_trunc(g, n)), span=t.span)
        case Lam(ann, body):
            return Lam(ann, rename(body, Q(g)), span=t.span)
        case App(f, a):
            return App(rename(f, g), rename(a, g), span=t.span)
        case CBox(cap, body):
            ext = g
            for ctx in cap:
                ext = qs(Ext(ext, 1), len(ctx))
            return CBox(cap, rename(body, ext), span=t.span)
        case CUnbox(body, sub):
            out = []
            cur = g
            for off, terms in reversed(sub.exts):
                out.append((kweak_trunc_offset(cur, off), tuple(rename(u, cur) for u in terms)))
                cur = kweak_trunc(cur, off)
            return CUnbox(rename(body, cur), SemiKSub(tuple(reversed(out))), span=t.span)
    raise TypeError(f"not a term: {t!r}")


def to_ksub(g) -> KSub:
    """The K-substitution that a weakening denotes."""
    match g:
        case Eps():
            return KSub(())
        case Q(tail):
            return lift(to_ksub(tail))
        case P(tail):
            return weaken_top(to_ksub(tail))
        case Ext(tail, off):
            return to_ksub(tail).extend(off)
    raise TypeError(f"not a weakening: {g!r}")


def offsets(g) -> list[int]:
    out = []
    while not isinstance(g, Eps):
        if isinstance(g, Ext):
            out.append(g.offset)
        g = g.tail
    return out
