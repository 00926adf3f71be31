"""Nameless abstract syntax for the Kripke-style modal lambda calculus.

Variables are de Bruijn indices into the *topmost* local context, counted
from the newest binding.  A context stack is a non-empty tuple of local
contexts, leftmost = deepest world, rightmost = current world.  Local
contexts are tuples of types ordered oldest to newest; surface names live
only in the parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class Base:
    pass


@dataclass(frozen=True)
class BoxT:
    body: Ty


@dataclass(frozen=True)
class Arr:
    dom: Ty
    cod: Ty


@dataclass(frozen=True)
class CtxT:
    """Contextual type: code of type `body` open in the captured contexts."""

    capture: tuple[tuple[Ty, ...], ...]
    body: Ty


Ty = Union[Base, BoxT, Arr, CtxT]
B = Base()

LocalCtx = tuple  # tuple[Ty, ...]
CtxStack = tuple  # tuple[LocalCtx, ...], non-empty
CtxList = tuple  # tuple[LocalCtx, ...], possibly empty


# -- terms -------------------------------------------------------------------

_span = dict(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Var:
    ix: int
    span: Span | None = field(**_span)


@dataclass(frozen=True)
class Box:
    body: Term
    span: Span | None = field(**_span)


@dataclass(frozen=True)
class Unbox:
    level: int
    body: Term
    span: Span | None = field(**_span)


@dataclass(frozen=True)
class Lam:
    ann: Ty | None
    body: Term
    span: Span | None = field(**_span)
    hint: str | None = field(**_span)  # surface binder name, for printing only


@dataclass(frozen=True)
class App:
    fn: Term
    arg: Term
    span: Span | None = field(**_span)


@dataclass(frozen=True)
class SemiKSub:
    """A possibly-empty list of (offset, local substitution), bottom entry first.

    A local substitution is a tuple of terms, one per binding of the target
    context, oldest binding first.
    """

    exts: tuple[tuple[int, tuple[Term, ...]], ...] = ()

    def __len__(self):
        return len(self.exts)


@dataclass(frozen=True)
class CBox:
    capture: tuple[tuple[Ty, ...], ...]
    body: Term
    span: Span | None = field(**_span)


@dataclass(frozen=True)
class CUnbox:
    body: Term
    sub: SemiKSub
    span: Span | None = field(**_span)


Term = Union[Var, Box, Unbox, Lam, App, CBox, CUnbox]


class StackError(ValueError):
    pass


def stack_len(stack) -> int:
    return len(stack)


def stack_truncate(stack, n: int):
    """Drop the `n` topmost contexts; the result must stay non-empty."""
    if n < 0 or n >= len(stack):
        raise StackError(f"truncation exceeds stack: cannot drop {n} of {len(stack)} contexts")
    return stack[: len(stack) - n]


def extend_top(stack, ty):
    return stack[:-1] + (stack[-1] + (ty,),)


def shape(stack) -> tuple[int, ...]:
    return tuple(len(ctx) for ctx in stack)


def is_neutral(t) -> bool:
    match t:
        case Var():
            return True
        case App(fn, arg):
            return is_neutral(fn) and is_normal(arg)
        case Unbox(_, body):
            return is_neutral(body)
        case _:
            return False


def is_normal(t) -> bool:
    match t:
        case Box(body) | Lam(_, body):
            return is_normal(body)
        case _:
            return is_neutral(t)


def alpha_eq(t, u) -> bool:
    # nameless terms: alpha-equivalence is structural equality
    return t == u


def term_size(t) -> int:
    match t:
        case Var():
            return 1
        case Box(body) | Unbox(_, body) | Lam(_, body) | CBox(_, body):
            return 1 + term_size(body)
        case App(fn, arg):
            return 1 + term_size(fn) + term_size(arg)
        case CUnbox(body, sub):
            return 1 + term_size(body) + sum(term_size(u) for _, terms in sub.exts for u in terms)
    raise TypeError(f"not a term: {t!r}")


def subterms(t):
    """Yield every subterm of `t`, pre-order."""
    yield t
    match t:
        case Box(body) | Unbox(_, body) | Lam(_, body) | CBox(_, body):
            yield from subterms(body)
        case App(fn, arg):
            yield from subterms(fn)
            yield from subterms(arg)
        case CUnbox(body, sub):
            yield from subterms(body)
            for _, terms in sub.exts:
                for u in terms:
                    yield from subterms(u)


def is_modal_fragment(t) -> bool:
    """True when `t` uses only the box/arrow constructors."""
    return not any(isinstance(u, (CBox, CUnbox)) for u in subterms(t))


def ty_is_modal_fragment(ty) -> bool:
    match ty:
        case Base():
            return True
        case BoxT(body):
            return ty_is_modal_fragment(body)
        case Arr(dom, cod):
            return ty_is_modal_fragment(dom) and ty_is_modal_fragment(cod)
    return False
