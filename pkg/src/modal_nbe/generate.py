"""Seeded random generation of well-typed terms, substitutions, weakenings and
equivalent term pairs, used by the property suites."""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import subst
from .checker import System, check_ksub, synth, well_typed
from .kweak import EPS, Q, Ext, skip as skip_binding
from .syntax import (
    App,
    Arr,
    B,
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
    term_size,
)

_INF = 10**9


class GenerationFailed(Exception):
    pass


@dataclass(frozen=True)
class GenConfig:
    seed: int
    max_size: int
    system: System
    stack: tuple
    goal: object
    contextual: bool = False
    weights: tuple = (0.4, 0.4, 0.2)  # introduce, eliminate, inject a redex
    min_size: int = 1  # soft target: smaller terms are kept only as a last resort

    def __post_init__(self):
        if self.max_size < 1:
            raise ValueError("max_size must be at least 1")


def _level_bounds(sys, count=1):
    """Smallest and largest total of `count` offsets allowed in `sys`."""
    if count == 0:
        return 0, 0
    match sys:
        case System.K:
            return count, count
        case System.T:
            return 0, count
        case System.K4:
            return count, _INF
        case _:
            return 0, _INF


def _split(rng, total, bounds):
    """Randomly split `total` into parts within the given (lo, hi) bounds."""
    parts = [lo for lo, _ in bounds]
    rest = total - sum(parts)
    if rest < 0 or rest > sum(min(hi, total) - lo for lo, hi in bounds):
        return None
    while rest > 0:
        open_ = [i for i, (_, hi) in enumerate(bounds) if parts[i] < hi]
        i = rng.choice(open_)
        parts[i] += 1
        rest -= 1
    return parts


def _split_offsets(rng, sys, total, k):
    return _split(rng, total, [_level_bounds(sys)] * k)


def _trunc(G, n):
    return G[: len(G) - n]


SMALL_TYPES = (
    B,
    B,
    B,
    BoxT(B),
    Arr(B, B),
    BoxT(BoxT(B)),
    Arr(BoxT(B), B),
    BoxT(Arr(B, B)),
    Arr(B, BoxT(B)),
    Arr(Arr(B, B), B),
    Arr(B, Arr(B, B)),
)

CONTEXTUAL_TYPES = (
    CtxT(((B,),), B),
    CtxT((), B),
    CtxT(((), (B,)), B),
    CtxT(((B, B),), BoxT(B)),
)


class Generator:
    def __init__(self, rng: random.Random, sys: System, contextual=False, weights=(0.4, 0.4, 0.2), work=200):
        self.rng = rng
        self.sys = sys
        self.contextual = contextual
        self.weights = weights
        self.work = work
        self._memo = {}

    # -- entry point -----------------------------------------------------

    def term(self, G, ty, budget):
        """A term of type `ty` in stack G with at most `budget` nodes, or None."""
        if budget < 1 or self.work <= 0:
            return None
        self.work -= 1
        kinds = ["intro", "elim", "redex"]
        first = self.rng.choices(kinds, weights=self.weights)[0]
        order = [first] + [k for k in ("elim", "intro", "redex") if k != first]
        for kind in order:
            t = getattr(self, kind)(G, ty, budget)
            if t is not None:
                return t
        return None

    def small_type(self):
        if self.contextual and self.rng.random() < 0.15:
            return self.rng.choice(CONTEXTUAL_TYPES)
        return self.rng.choice(SMALL_TYPES)

    def small_ctx(self, max_len=2):
        return tuple(self.small_type() for _ in range(self.rng.randint(0, max_len)))

    # -- introductions -----------------------------------------------------

    def intro(self, G, ty, budget):
        if budget < 2:
            return None
        match ty:
            case Arr(dom, cod):
                body = self.term(extend_top(G, dom), cod, budget - 1)
                return None if body is None else Lam(dom, body)
            case BoxT(body_ty):
                body = self.term(G + ((),), body_ty, budget - 1)
                return None if body is None else Box(body)
            case CtxT(cap, body_ty):
                body = self.term(G + tuple(cap), body_ty, budget - 1)
                return None if body is None else CBox(cap, body)
        return None

    # -- eliminations --------------------------------------------------------

    def _paths(self, have, want):
        if have == want:
            yield ()
            return
        match have:
            case Arr(dom, cod):
                for rest in self._paths(cod, want):
                    yield (("app", dom),) + rest
            case BoxT(body):
                for rest in self._paths(body, want):
                    yield (("unbox",),) + rest
            case CtxT(cap, body):
                if self.contextual:
                    for rest in self._paths(body, want):
                        yield (("cunbox", cap),) + rest

    def _min_size(self, path):
        size = 1
        for step in path:
            match step:
                case ("app", _):
                    size += 2
                case ("unbox",):
                    size += 1
                case ("cunbox", cap):
                    size += 1 + sum(len(c) for c in cap)
        return size

    def _candidates(self, G, ty, budget):
        key = (G, ty)
        if key not in self._memo:
            out = []
            for depth in range(len(G)):
                ctx = G[len(G) - 1 - depth]
                for pos, have in enumerate(ctx):
                    ix = len(ctx) - 1 - pos
                    for path in self._paths(have, ty):
                        bounds = []
                        for step in path:
                            if step[0] == "unbox":
                                bounds.append(_level_bounds(self.sys))
                            elif step[0] == "cunbox":
                                bounds.append(_level_bounds(self.sys, len(step[1])))
                        lo = sum(b[0] for b in bounds)
                        hi = sum(b[1] for b in bounds)
                        if lo <= depth <= hi:
                            out.append((self._min_size(path), depth, ix, path, bounds))
            self._memo[key] = out
        return [c[1:] for c in self._memo[key] if c[0] <= budget]

    def elim(self, G, ty, budget):
        cands = self._candidates(G, ty, budget)
        # favour longer spines so that eliminations carry arguments
        keyed = sorted(cands, key=lambda c: self.rng.random() ** (1 / (1 + 2 * len(c[2]))), reverse=True)
        for depth, ix, path, bounds in keyed[:4]:
            t = self._build_spine(G, depth, ix, path, bounds, budget)
            if t is not None:
                return t
        return None

    def _build_spine(self, G, depth, ix, path, bounds, budget):
        raises = _split(self.rng, depth, bounds)
        if raises is None:
            return None
        raises = iter(raises)
        extra = budget - self._min_size(path)
        t = Var(ix)
        d = depth
        for step in path:
            match step:
                case ("app", dom):
                    share = self.rng.randint(0, extra)
                    arg = self.term(_trunc(G, d), dom, 1 + share)
                    if arg is None:
                        return None
                    extra -= term_size(arg) - 1
                    t = App(t, arg)
                case ("unbox",):
                    n = next(raises)
                    d -= n
                    t = Unbox(n, t)
                case ("cunbox", cap):
                    total = next(raises)
                    offs = _split_offsets(self.rng, self.sys, total, len(cap))
                    if offs is None:
                        return None
                    d -= total
                    sub = self._semisub(_trunc(G, d), cap, offs, extra)
                    if sub is None:
                        return None
                    extra -= sum(term_size(u) - 1 for _, ts in sub.exts for u in ts)
                    t = CUnbox(t, sub)
        return t

    def _semisub(self, H, cap, offs, extra):
        """Terms for a semi-K-substitution whose topmost entry lives in H."""
        entries = []
        cur = H
        for ctx, off in zip(reversed(cap), reversed(offs)):
            terms = []
            for want in ctx:
                share = self.rng.randint(0, max(extra, 0))
                u = self.term(cur, want, 1 + share)
                if u is None:
                    return None
                extra -= term_size(u) - 1
                terms.append(u)
            entries.append((off, tuple(terms)))
            cur = _trunc(cur, off)
        return SemiKSub(tuple(reversed(entries)))

    # -- redex injection -----------------------------------------------------

    def redex(self, G, ty, budget):
        options = ["beta", "box"]
        if self.contextual:
            options.append("ctx")
        self.rng.shuffle(options)
        for kind in options:
            t = getattr(self, "_redex_" + kind)(G, ty, budget)
            if t is not None:
                return t
        return None

    def _redex_beta(self, G, ty, budget):
        if budget < 4:
            return None
        dom = self.rng.choice([self.small_type(), ty] + list(G[-1]))
        split = self.rng.randint(1, budget - 3)
        arg = self.term(G, dom, split)
        if arg is None:
            return None
        body = self.term(extend_top(G, dom), ty, budget - 2 - term_size(arg))
        if body is None:
            return None
        return App(Lam(dom, body), arg)

    def _redex_box(self, G, ty, budget):
        if budget < 3:
            return None
        levels = [n for n in range(len(G)) if self.sys.ul_allowed(n)]
        if not levels:
            return None
        n = self.rng.choice(levels)
        body = self.term(_trunc(G, n) + ((),), ty, budget - 2)
        return None if body is None else Unbox(n, Box(body))

    def _redex_ctx(self, G, ty, budget):
        if budget < 3:
            return None
        cap = tuple(self.small_ctx(1) for _ in range(self.rng.randint(0, 2)))
        lo, hi = _level_bounds(self.sys, len(cap))
        hi = min(hi, len(G) - 1)
        if lo > hi:
            return None
        total = self.rng.randint(lo, hi)
        offs = _split_offsets(self.rng, self.sys, total, len(cap))
        if offs is None:
            return None
        extra = budget - 3
        share = self.rng.randint(0, extra)
        body = self.term(_trunc(G, total) + cap, ty, 1 + share)
        if body is None:
            return None
        extra -= term_size(body) - 1
        sub = self._semisub(G, cap, offs, extra - sum(len(c) for c in cap))
        if sub is None:
            return None
        return CUnbox(CBox(cap, body), sub)


# -- configurations and corpora ---------------------------------------------


def _rng(*parts):
    return random.Random(":".join(str(p) for p in parts))


def gen_term(cfg: GenConfig, attempts=20):
    """A term with synth(cfg.system, cfg.stack, t) == cfg.goal, deterministic in the seed."""
    best = None
    for attempt in range(attempts):
        g = Generator(_rng("term", cfg.seed, attempt), cfg.system, cfg.contextual, cfg.weights)
        t = g.term(cfg.stack, cfg.goal, cfg.max_size)
        if t is None or term_size(t) > cfg.max_size:
            continue
        if term_size(t) >= cfg.min_size:
            return t
        if best is None or term_size(t) > term_size(best):
            best = t
    if best is not None:
        return best
    raise GenerationFailed(f"no term of the goal type within size {cfg.max_size} (seed {cfg.seed})")


def random_stack(rng, max_depth=4, contextual=False, max_ctx=3):
    g = Generator(rng, System.S4, contextual)
    return tuple(g.small_ctx(max_ctx) for _ in range(rng.randint(1, max_depth)))


def random_config(seed, system, max_size=25, max_depth=4, contextual=False):
    rng = _rng("config", seed)
    stack = random_stack(rng, max_depth, contextual)
    pool = list(SMALL_TYPES)
    if contextual:
        pool += list(CONTEXTUAL_TYPES)
    local = [ty for ctx in stack for ty in ctx]
    goal = rng.choice(local if local and rng.random() < 0.5 else pool)
    size = rng.randint(max(1, max_size // 3), max_size)
    return GenConfig(seed, size, system, stack, goal, contextual, min_size=max(1, size // 3))


def corpus(system, n, seed=0, max_size=25, max_depth=4, contextual=False):
    """Yield `n` (config, term) pairs drawn from consecutive derived seeds."""
    produced = 0
    k = 0
    while produced < n:
        cfg = random_config(f"{seed}/{k}", system, max_size, max_depth, contextual)
        k += 1
        try:
            t = gen_term(cfg, attempts=4)
        except GenerationFailed:
            continue
        produced += 1
        yield cfg, t


def random_typed_term(rng, sys, G, ty, budget, contextual=False):
    g = Generator(rng, sys, contextual)
    for _ in range(10):
        t = g.term(G, ty, budget)
        if t is not None:
            return t
    return None


# -- substitutions and weakenings -------------------------------------------


def _fresh_ctx(g, wanted):
    ctx = list(g.small_ctx(2))
    for ty in wanted:
        if g.rng.random() < 0.6:
            ctx.insert(g.rng.randint(0, len(ctx)), ty)
    return tuple(ctx)


def random_ksub(rng, sys, D, budget=5, tries=30):
    """A K-substitution s : G => D with a random domain G; returns (s, G)."""
    g = Generator(rng, sys)
    for _ in range(tries):
        G = (_fresh_ctx(g, D[0]),)
        base = _local_terms(g, G, D[0], budget)
        if base is None:
            continue
        exts = []
        for ctx in D[1:]:
            off = _pick_offset(rng, sys)
            if off > 0:
                G = G + tuple(g.small_ctx(2) for _ in range(off - 1)) + (_fresh_ctx(g, ctx),)
            terms = _local_terms(g, G, ctx, budget)
            if terms is None:
                break
            exts.append((off, terms))
        else:
            s = subst.KSub(base, tuple(exts))
            check_ksub(sys, G, s, D)
            return s, G
    return None


def _pick_offset(rng, sys):
    choices = [n for n in range(4) if sys.ul_allowed(n)]
    return rng.choice(choices)


def _local_terms(g, G, ctx, budget):
    out = []
    for ty in ctx:
        u = None
        for _ in range(5):
            u = g.term(G, ty, g.rng.randint(1, budget))
            if u is not None:
                break
        if u is None:
            return None
        out.append(u)
    return tuple(out)


def random_kweak(rng, sys, D, max_extra=2):
    """A weakening w : G =>w D with a random domain G; returns (w, G)."""
    gen = Generator(rng, sys)

    def skip(w, G):
        for _ in range(rng.randint(0, max_extra) if rng.random() < 0.5 else 0):
            ty = gen.small_type()
            w, G = skip_binding(w), extend_top(G, ty)
        return w, G

    def fill(w, G, ctx):
        for ty in ctx:
            w, G = skip(w, G)
            w, G = Q(w), extend_top(G, ty)
        return skip(w, G)

    w, G = fill(EPS, ((),), D[0])
    for ctx in D[1:]:
        off = _pick_offset(rng, sys)
        if off > 0:
            G = G + tuple(gen.small_ctx(2) for _ in range(off - 1)) + ((),)
        w, G = fill(Ext(w, off), G, ctx)
    return w, G


def random_env_stack(rng, sys, max_depth=4):
    return random_stack(rng, max_depth)


# -- equivalence pairs --------------------------------------------------------


def positions(sys, G, t, path=()):
    """Yield (path, stack, type) for every subterm of a box/arrow term."""
    yield path, G, synth(sys, G, t)
    match t:
        case Box(body):
            yield from positions(sys, G + ((),), body, path + (0,))
        case Unbox(n, body):
            yield from positions(sys, _trunc(G, n), body, path + (0,))
        case Lam(ann, body):
            yield from positions(sys, extend_top(G, ann), body, path + (0,))
        case App(f, a):
            yield from positions(sys, G, f, path + (0,))
            yield from positions(sys, G, a, path + (1,))


def subterm_at(t, path):
    for i in path:
        match t:
            case Box(body) | Unbox(_, body) | Lam(_, body):
                t = body
            case App(f, a):
                t = (f, a)[i]
    return t


def replace_at(t, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    match t:
        case Box(body):
            return Box(replace_at(body, rest, new))
        case Unbox(n, body):
            return Unbox(n, replace_at(body, rest, new))
        case Lam(ann, body):
            return Lam(ann, replace_at(body, rest, new))
        case App(f, a):
            return App(replace_at(f, rest, new), a) if i == 0 else App(f, replace_at(a, rest, new))
    raise ValueError(f"no position {path} in {t!r}")


def uses_top_var(t, ix=0):
    found = []

    def probe(i, k):
        if i == ix + k:
            found.append(i)
        return Var(i)

    subst.map_vars(t, probe)
    return bool(found)


def _rewrites(g: Generator, sys, u, H, A):
    """Candidate equivalent replacements for `u : A` in stack H."""
    out = []
    match u:
        case App(Lam(_, body), arg):
            out.append(subst.term_subst(body, 0, arg))
        case Unbox(n, Box(body)):
            out.append(subst.mot_apply(body, n, 0))
    out.append(App(Lam(A, Var(0)), u))
    dom = g.rng.choice([B, A] + list(H[-1]))
    arg = g.term(H, dom, g.rng.randint(1, 4))
    if arg is not None:
        out.append(App(Lam(dom, subst.shift(u)), arg))
    if len(H) >= 2 and well_typed(sys, _trunc(H, 1) + ((),), u, A):
        out.append(Unbox(1, Box(u)))
    match A:
        case Arr(dom_ty, _):
            out.append(Lam(dom_ty, App(subst.shift(u), Var(0))))
        case BoxT():
            out.append(Box(Unbox(1, u)))
    match u:
        case Box(Unbox(1, v)):
            out.append(v)
        case Lam(_, App(f, Var(ix=0))) if not uses_top_var(f):
            out.append(subst.shift(f, -1))
    return out


def gen_equiv_pair(cfg: GenConfig, steps=1, attempts=20):
    """A term and a rewrite of it by `steps` random equivalence rule instances."""
    t = gen_term(cfg, attempts)
    rng = _rng("equiv", cfg.seed)
    g = Generator(rng, cfg.system)
    u = t
    for _ in range(steps):
        spots = list(positions(cfg.system, cfg.stack, u))
        for _ in range(5):
            path, H, A = rng.choice(spots)
            options = _rewrites(g, cfg.system, subterm_at(u, path), H, A)
            if options:
                u = replace_at(u, path, rng.choice(options))
                break
    return t, u
