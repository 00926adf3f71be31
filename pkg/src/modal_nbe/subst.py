"""Term substitution, modal transformations and Kripke-style substitutions.

Local substitutions are tuples of terms ordered like the context they
replace (oldest binding first), so index ``i`` looks up ``terms[-1 - i]``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import App, Box, CBox, CUnbox, Lam, SemiKSub, Unbox, Var


class SubstError(ValueError):
    pass


def _sizes(stack):
    return tuple(c if isinstance(c, int) else len(c) for c in stack)


# -- variable traversal ------------------------------------------------------


def map_vars(t, fn, depth=0, k=0):
    """Rebuild `t`, replacing variables of one target world.

    `depth` counts worlds between the current position and the target world;
    `k` counts binders crossed inside the target world.  `fn(ix, k)` is called
    for every variable that refers to the target world.
    """
    match t:
        case Var(ix):
            return fn(ix, k) if depth == 0 else t
        case Box(body):
            return Box(map_vars(body, fn, depth + 1, k), span=t.span)
        case Unbox(n, body):
            if n > depth:
                return t
            return Unbox(n, map_vars(body, fn, depth - n, k), span=t.span)
        case Lam(ann, body):
            return Lam(ann, map_vars(body, fn, depth, k + 1 if depth == 0 else k), span=t.span)
        case App(f, a):
            return App(map_vars(f, fn, depth, k), map_vars(a, fn, depth, k), span=t.span)
        case CBox(cap, body):
            return CBox(cap, map_vars(body, fn, depth + len(cap), k), span=t.span)
        case CUnbox(body, sub):
            exts = list(sub.exts)
            d = depth
            for j in range(len(exts) - 1, -1, -1):
                if d < 0:
                    break
                off, terms = exts[j]
                exts[j] = (off, tuple(map_vars(u, fn, d, k) for u in terms))
                d -= off
            if d >= 0:
                body = map_vars(body, fn, d, k)
            return CUnbox(body, SemiKSub(tuple(exts)), span=t.span)
    raise TypeError(f"not a term: {t!r}")


def shift(t, by=1, cutoff=0, depth=0):
    """Add `by` to every index >= `cutoff` of the world `depth` levels down."""

    def bump(ix, k):
        return Var(ix + by) if ix >= cutoff + k else Var(ix)

    return map_vars(t, bump, depth)


def term_subst(t, x, s):
    """Replace index `x` of the topmost context by `s` and close the gap."""

    def go(ix, k):
        if ix < k + x:
            return Var(ix)
        if ix == k + x:
            return shift(s, k) if k else s
        return Var(ix - 1)

    return map_vars(t, go)


# -- modal transformations ---------------------------------------------------


def mot_apply(t, n, l, width=0):
    """Apply the modal transformation {n/l}.

    For n >= 1 this splices n-1 worlds below the world l levels down; for n = 0
    it fuses that world into the one beneath it.  With nameless variables the
    fused lower context ends up older than the upper one, so terms that move
    down into it are shifted by `width`, the size of the upper context.
    """
    match t:
        case Var():
            return t
        case Box(body):
            return Box(mot_apply(body, n, l + 1, width), span=t.span)
        case Unbox(m, body):
            if m <= l:
                return Unbox(m, mot_apply(body, n, l - m, width), span=t.span)
            if n == 0 and m == l + 1:
                body = shift(body, width)
            return Unbox(n + m - 1, body, span=t.span)
        case Lam(ann, body):
            return Lam(ann, mot_apply(body, n, l, width + 1 if l == 0 else width), span=t.span)
        case App(f, a):
            return App(mot_apply(f, n, l, width), mot_apply(a, n, l, width), span=t.span)
        case CBox(cap, body):
            return CBox(cap, mot_apply(body, n, l + len(cap), width), span=t.span)
        case CUnbox(body, sub):
            exts = list(sub.exts)
            cur = l
            for j in range(len(exts) - 1, -1, -1):
                off, terms = exts[j]
                terms = tuple(mot_apply(u, n, cur, width) for u in terms)
                if off <= cur:
                    exts[j] = (off, terms)
                    cur -= off
                    continue
                exts[j] = (n + off - 1, terms)
                rest = CUnbox(body, SemiKSub(tuple(exts[:j])))
                if n == 0 and off == cur + 1:
                    rest = shift(rest, width)
                return CUnbox(rest.body, SemiKSub(rest.sub.exts + tuple(exts[j:])), span=t.span)
            return CUnbox(mot_apply(body, n, cur, width), SemiKSub(tuple(exts)), span=t.span)
    raise TypeError(f"not a term: {t!r}")


# -- K-substitutions ---------------------------------------------------------


@dataclass(frozen=True)
class KSub:
    """`base` substitutes the bottom context; `exts` are (offset, local sub)
    pairs, bottom first, the last one being the topmost local substitution."""

    base: tuple
    exts: tuple = ()

    def __len__(self):
        return 1 + len(self.exts)

    def top(self):
        return self.exts[-1][1] if self.exts else self.base

    def with_top(self, terms):
        if self.exts:
            return KSub(self.base, self.exts[:-1] + ((self.exts[-1][0], terms),))
        return KSub(terms, ())

    def extend(self, offset, terms=()):
        return KSub(self.base, self.exts + ((offset, tuple(terms)),))

    def offsets(self):
        return tuple(off for off, _ in self.exts)


def local_id(size):
    return tuple(Var(size - 1 - j) for j in range(size))


def lookup(terms, ix):
    if not 0 <= ix < len(terms):
        raise SubstError(f"variable {ix} outside local substitution of length {len(terms)}")
    return terms[-1 - ix]


def trunc(s: KSub, n: int) -> KSub:
    if n < 0 or n >= len(s):
        raise SubstError(f"truncation exceeds stack: cannot drop {n} of {len(s)} local substitutions")
    return KSub(s.base, s.exts[: len(s.exts) - n])


def trunc_offset(s: KSub, n: int) -> int:
    if n < 0 or n >= len(s):
        raise SubstError(f"truncation exceeds stack: cannot drop {n} of {len(s)} local substitutions")
    return sum(off for off, _ in s.exts[len(s.exts) - n :])


def weaken_top(s: KSub) -> KSub:
    """Weaken the target's topmost context by one binding.

    Entries reached through offset 0 share the topmost target world, so
    their terms are shifted too.
    """
    exts = list(s.exts)
    for j in range(len(exts) - 1, -1, -1):
        off, terms = exts[j]
        exts[j] = (off, tuple(shift(u) for u in terms))
        if off != 0:
            return KSub(s.base, tuple(exts))
    return KSub(tuple(shift(u) for u in s.base), tuple(exts))


def lift(s: KSub) -> KSub:
    w = weaken_top(s)
    return w.with_top(w.top() + (Var(0),))


def ksub_apply(t, s: KSub):
    match t:
        case Var(ix):
            return lookup(s.top(), ix)
        case Box(body):
            return Box(ksub_apply(body, s.extend(1)), span=t.span)
        case Unbox(n, body):
            return Unbox(trunc_offset(s, n), ksub_apply(body, trunc(s, n)), span=t.span)
        case Lam(ann, body):
            return Lam(ann, ksub_apply(body, lift(s)), span=t.span)
        case App(f, a):
            return App(ksub_apply(f, s), ksub_apply(a, s), span=t.span)
        case CBox(cap, body):
            ext = s
            for ctx in cap:
                ext = ext.extend(1, local_id(len(ctx)))
            return CBox(cap, ksub_apply(body, ext), span=t.span)
        case CUnbox(body, sub):
            total = semi_offset(sub)
            return CUnbox(ksub_apply(body, trunc(s, total)), semi_compose(sub, s), span=t.span)
    raise TypeError(f"not a term: {t!r}")


def ksub_id(stack) -> KSub:
    sizes = _sizes(stack)
    if not sizes:
        raise SubstError("context stacks are non-empty")
    return KSub(local_id(sizes[0]), tuple((1, local_id(k)) for k in sizes[1:]))


def compose(s: KSub, d: KSub) -> KSub:
    """The K-substitution that acts like `s` followed by `d`."""

    def local(terms, dd):
        return tuple(ksub_apply(u, dd) for u in terms)

    def go(exts, dd):
        if not exts:
            return KSub(local(s.base, dd), ())
        *rest, (off, terms) = exts
        if off >= len(dd):
            raise SubstError("composition of K-substitutions with mismatched stacks")
        tail = go(tuple(rest), trunc(dd, off))
        return tail.extend(trunc_offset(dd, off), local(terms, dd))

    return go(s.exts, d)


def mot_as_ksub(n: int, l: int, stack) -> KSub:
    """The K-substitution realising {n/l} on terms typed in `stack`.

    Weakening (n >= 1) gives the context l levels down the offset n; fusion
    (n = 0) maps that context with offset 0 onto the merged world and weakens
    the context beneath it past the merged-in bindings.
    """
    sizes = _sizes(stack)
    if l + 2 > len(sizes):
        raise SubstError(f"incompatible shapes: {{{n}/{l}}} needs a stack of at least {l + 2} contexts")
    s = ksub_id(sizes)
    p = len(sizes) - 1 - l
    exts = list(s.exts)
    if n >= 1:
        exts[p - 1] = (n, exts[p - 1][1])
        return KSub(s.base, tuple(exts))
    upper = sizes[p]
    below = tuple(shift(u, upper) for u in local_id(sizes[p - 1]))
    exts[p - 1] = (0, exts[p - 1][1])
    if p - 1 == 0:
        return KSub(below, tuple(exts))
    exts[p - 2] = (exts[p - 2][0], below)
    return KSub(s.base, tuple(exts))


def ksub_shapes(s: KSub):
    return len(s.base), tuple((off, len(terms)) for off, terms in s.exts)


# -- semi-K-substitutions ----------------------------------------------------


def semi_offset(s: SemiKSub) -> int:
    return sum(off for off, _ in s.exts)


def semi_id(ctxs) -> SemiKSub:
    return SemiKSub(tuple((1, local_id(k)) for k in _sizes(ctxs)))


def semi_to_ksub(s: SemiKSub, stack) -> KSub:
    """Prefix `s` with the identity on the part of `stack` it leaves alone."""
    sizes = _sizes(stack)
    total = semi_offset(s)
    if total >= len(sizes):
        raise SubstError(f"truncation exceeds stack: offset {total} on a stack of {len(sizes)} contexts")
    prefix = ksub_id(sizes[: len(sizes) - total])
    return KSub(prefix.base, prefix.exts + s.exts)


def semi_compose(s: SemiKSub, d: KSub) -> SemiKSub:
    """Push the semi-K-substitution `s` through the K-substitution `d`."""
    out = []
    cur = d
    for off, terms in reversed(s.exts):
        out.append((trunc_offset(cur, off), tuple(ksub_apply(u, cur) for u in terms)))
        cur = trunc(cur, off)
    return SemiKSub(tuple(reversed(out)))
