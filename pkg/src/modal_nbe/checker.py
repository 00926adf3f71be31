"""System-parametric type synthesis for the modal calculus."""

from __future__ import annotations

from enum import Enum

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
)


class System(Enum):
    K = "k"
    T = "t"
    K4 = "k4"
    S4 = "s4"

    def ul_allowed(self, n: int) -> bool:
        match self:
            case System.K:
                return n == 1
            case System.T:
                return n in (0, 1)
            case System.K4:
                return n >= 1
            case System.S4:
                return n >= 0
        return False

    @classmethod
    def parse(cls, name: str) -> System:
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown system {name!r}; expected one of k, t, k4, s4") from None

    def __str__(self):
        return self.name


ALL_SYSTEMS = (System.K, System.T, System.K4, System.S4)


class TypeCheckError(Exception):
    """A typing failure.

    `kind` is one of: unbound-variable, not-a-function, not-a-box,
    not-contextual, ul-violation, stack-too-short, substitution-mismatch,
    type-mismatch, missing-annotation.
    """

    def __init__(self, kind, message, span=None, level=None, system=None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span
        self.level = level
        self.system = system

    def to_json(self):
        out = {
            "kind": self.kind,
            "message": self.message,
            "span": None if self.span is None else {"line": self.span.line, "col": self.span.col},
        }
        if self.kind == "ul-violation":
            out["level"] = self.level
            out["system"] = self.system.value
        return out

    def __str__(self):
        where = f"{self.span}: " if self.span is not None else ""
        return f"{where}{self.kind}: {self.message}"


def _show(ty):
    from .parser import pretty_ty

    return pretty_ty(ty)


def _check_level(sys, G, n, span, what="unbox level"):
    if not sys.ul_allowed(n):
        raise TypeCheckError(
            "ul-violation", f"{what} {n} is not allowed in system {sys}", span, level=n, system=sys
        )
    if n > len(G) - 1:
        raise TypeCheckError(
            "stack-too-short", f"{what} {n} needs more than the {len(G)} context(s) available", span
        )


def _truncate(G, n):
    return G[: len(G) - n]


def synth(sys: System, G, t):
    match t:
        case Var(ix):
            top = G[-1]
            if not 0 <= ix < len(top):
                raise TypeCheckError("unbound-variable", f"index {ix} is not bound in the current context", t.span)
            return top[-1 - ix]
        case Box(body):
            return BoxT(synth(sys, G + ((),), body))
        case Unbox(n, body):
            _check_level(sys, G, n, t.span)
            ty = synth(sys, _truncate(G, n), body)
            if not isinstance(ty, BoxT):
                raise TypeCheckError("not-a-box", f"unbox expects a box type, got {_show(ty)}", t.span)
            return ty.body
        case Lam(ann, body):
            if ann is None:
                raise TypeCheckError("missing-annotation", "lambda binder needs a type annotation", t.span)
            return Arr(ann, synth(sys, extend_top(G, ann), body))
        case App(f, a):
            fty = synth(sys, G, f)
            if not isinstance(fty, Arr):
                raise TypeCheckError("not-a-function", f"applying a term of type {_show(fty)}", t.span)
            aty = synth(sys, G, a)
            if aty != fty.dom:
                raise TypeCheckError(
                    "type-mismatch", f"argument has type {_show(aty)}, expected {_show(fty.dom)}", a.span or t.span
                )
            return fty.cod
        case CBox(cap, body):
            return CtxT(cap, synth(sys, G + tuple(cap), body))
        case CUnbox(body, sub):
            total = sum(off for off, _ in sub.exts)
            if total > len(G) - 1:
                raise TypeCheckError(
                    "stack-too-short", f"substitution offsets total {total} on a stack of {len(G)} context(s)", t.span
                )
            ty = synth(sys, _truncate(G, total), body)
            if not isinstance(ty, CtxT):
                raise TypeCheckError("not-contextual", f"cunbox expects a contextual type, got {_show(ty)}", t.span)
            check_semisub(sys, G, sub, ty.capture, t.span)
            return ty.body
    raise TypeError(f"not a term: {t!r}")


def check(sys: System, G, t, ty):
    got = synth(sys, G, t)
    if got != ty:
        raise TypeCheckError("type-mismatch", f"term has type {_show(got)}, expected {_show(ty)}", t.span)


def _check_local(sys, G, terms, ctx, span):
    if len(terms) != len(ctx):
        raise TypeCheckError(
            "substitution-mismatch", f"local substitution has {len(terms)} term(s) for {len(ctx)} binding(s)", span
        )
    for u, want in zip(terms, ctx):
        got = synth(sys, G, u)
        if got != want:
            raise TypeCheckError(
                "substitution-mismatch",
                f"substitution supplies {_show(got)} for a binding of type {_show(want)}",
                u.span or span,
            )


def check_semisub(sys: System, G, s: SemiKSub, D, span=None):
    """Check s : G =>s D, walking from the topmost entry down."""
    if len(s.exts) != len(D):
        raise TypeCheckError(
            "substitution-mismatch", f"substitution has {len(s.exts)} entries for {len(D)} context(s)", span
        )
    cur = G
    for (off, terms), ctx in zip(reversed(s.exts), reversed(D)):
        _check_local(sys, cur, terms, ctx, span)
        _check_level(sys, cur, off, span, "substitution offset")
        cur = _truncate(cur, off)


def check_ksub(sys: System, G, s, D, span=None):
    """Check s : G => D for a K-substitution."""
    if len(s) != len(D):
        raise TypeCheckError(
            "substitution-mismatch", f"K-substitution has {len(s)} local substitutions for {len(D)} context(s)", span
        )
    cur = G
    for (off, terms), ctx in zip(reversed(s.exts), reversed(D[1:])):
        _check_local(sys, cur, terms, ctx, span)
        _check_level(sys, cur, off, span, "substitution offset")
        cur = _truncate(cur, off)
    _check_local(sys, cur, s.base, D[0], span)
    if len(cur) != 1:
        raise TypeCheckError(
            "substitution-mismatch", f"K-substitution leaves {len(cur) - 1} context(s) unaccounted for", span
        )


def well_typed(sys, G, t, ty=None) -> bool:
    try:
        got = synth(sys, G, t)
    except TypeCheckError:
        return False
    return ty is None or got == ty
