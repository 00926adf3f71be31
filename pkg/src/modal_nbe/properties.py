"""Seeded property suites shared by the `selftest` command and the tests.

Every suite returns a `Report`; a failing instance is recorded as a
pretty-printed counterexample (shrunk where the suite knows how).
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from . import subst
from .checker import System, check_ksub, synth
from .generate import (
    CONTEXTUAL_TYPES,
    SMALL_TYPES,
    _level_bounds,
    _split_offsets,
    GenerationFailed,
    Generator,
    corpus,
    gen_equiv_pair,
    positions,
    random_config,
    random_ksub,
    random_kweak,
    random_stack,
    replace_at,
    subterm_at,
)
from .kweak import kweak_compose, kweak_id, kweak_trunc, kweak_trunc_offset, rename, to_ksub
from .nbe import ECons, ETop, env_trunc, env_trunc_offset, eval_term, id_env, nbe, reify, weaken_env, weaken_value
from .oracle import beta_step, oracle_normalize
from .parser import pretty, pretty_stack, pretty_ty
from .syntax import CBox, CUnbox, is_normal, shape


@dataclass
class Report:
    name: str
    system: System | None
    checked: int = 0
    failed: int = 0
    counterexample: str | None = None
    elapsed: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return self.failed == 0

    def fail(self, text):
        self.failed += 1
        if self.counterexample is None:
            self.counterexample = text

    def line(self):
        sys = self.system.value if self.system is not None else "-"
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name} [{sys}] {self.checked - self.failed}/{self.checked} in {self.elapsed:.2f}s"

    def to_json(self):
        return {
            "property": self.name,
            "system": None if self.system is None else self.system.value,
            "checked": self.checked,
            "failed": self.failed,
            "ok": self.ok,
            "counterexample": self.counterexample,
            "seconds": round(self.elapsed, 3),
        }


class _timed:
    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self.start = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.elapsed += time.perf_counter() - self.start
        return False


def _rng(*parts):
    return random.Random(":".join(str(p) for p in parts))


def describe(G, t, ty=None):
    out = f"[{pretty_stack(G)} |- ] {pretty(t, _names(G))}"
    return out if ty is None else f"{out} : {pretty_ty(ty)}"


def _names(G):
    out, k = [], 0
    for ctx in G:
        out.append([f"v{k + i}" for i in range(len(ctx))])
        k += len(ctx)
    return out


def _show(compute, G):
    try:
        return pretty(compute(), _names(G))
    except Exception as exc:
        return f"raised {exc!r}"


def shrink(sys, G, t, still_fails, rounds=50):
    """Greedily replace subterms by smaller same-typed descendants while the
    failure persists."""
    for _ in range(rounds):
        spots = list(positions(sys, G, t))
        improved = False
        for path, H, A in spots:
            for path2, H2, A2 in spots:
                if len(path2) <= len(path) or path2[: len(path)] != path or H2 != H or A2 != A:
                    continue
                cand = replace_at(t, path, subterm_at(t, path2))
                try:
                    bad = still_fails(cand)
                except Exception:
                    bad = True
                if bad:
                    t = cand
                    improved = True
                    break
            if improved:
                break
        if not improved:
            return t
    return t


# -- normalization ------------------------------------------------------------


def soundness(sys, n=1000, seed=0, max_size=25, max_depth=4):
    rep = Report("soundness", sys)
    with _timed(rep):
        for cfg, t in corpus(sys, n, seed, max_size, max_depth):
            rep.checked += 1
            G, ty = cfg.stack, cfg.goal

            def differs(u):
                return nbe(sys, G, ty, u) != oracle_normalize(sys, G, ty, u)

            try:
                bad = differs(t)
            except Exception as exc:  # a crash is a failure too
                rep.fail(f"{describe(G, shrink(sys, G, t, differs), ty)}\n  raised {exc!r}")
                continue
            if bad:
                small = shrink(sys, G, t, differs)
                rep.fail(
                    f"{describe(G, small, ty)}\n  nbe    = {_show(lambda: nbe(sys, G, ty, small), G)}"
                    f"\n  oracle = {_show(lambda: oracle_normalize(sys, G, ty, small), G)}"
                )
    return rep


def completeness(sys, n=1000, seed=0, max_steps=5, max_size=25, max_depth=4):
    rep = Report("completeness", sys)
    with _timed(rep):
        produced = k = rewritten = 0
        while produced < n:
            cfg = random_config(f"eq/{seed}/{k}", sys, max_size, max_depth)
            steps = _rng("steps", seed, k).randint(1, max_steps)
            k += 1
            try:
                t, u = gen_equiv_pair(cfg, steps, attempts=4)
            except GenerationFailed:
                continue
            produced += 1
            rep.checked += 1
            rewritten += t != u
            G, ty = cfg.stack, cfg.goal
            try:
                if synth(sys, G, u) != ty:
                    rep.fail(f"rewrite changed the type: {describe(G, t, ty)} ~> {describe(G, u)}")
                    continue
                a, b = nbe(sys, G, ty, t), nbe(sys, G, ty, u)
            except Exception as exc:
                rep.fail(f"{describe(G, t, ty)} ~> {pretty(u, _names(G))}\n  raised {exc!r}")
                continue
            if a != b:
                rep.fail(
                    f"{describe(G, t, ty)}\n  ~ {pretty(u, _names(G))}\n  nbe: {pretty(a, _names(G))}"
                    f"\n   vs {pretty(b, _names(G))}"
                )
        rep.notes.append({"rewritten": rewritten})
    return rep


def idempotence(sys, n=1000, seed=0, max_size=25, max_depth=4):
    rep = Report("idempotence", sys)
    with _timed(rep):
        for cfg, t in corpus(sys, n, seed, max_size, max_depth):
            rep.checked += 1
            G, ty = cfg.stack, cfg.goal
            w = nbe(sys, G, ty, t)
            if not is_normal(w):
                rep.fail(f"{describe(G, t, ty)}\n  not normal: {pretty(w, _names(G))}")
            elif synth(sys, G, w) != ty:
                rep.fail(f"{describe(G, t, ty)}\n  normal form has another type: {pretty(w, _names(G))}")
            elif nbe(sys, G, ty, w) != w:
                rep.fail(f"{describe(G, t, ty)}\n  not a fixed point: {pretty(w, _names(G))}")
    return rep


# -- substitution algebra -------------------------------------------------------


def _typed_term(g: Generator, D, budget=10, tries=10):
    for _ in range(tries):
        ty = g.rng.choice(SMALL_TYPES + tuple(t for ctx in D for t in ctx))
        t = g.term(D, ty, g.rng.randint(1, budget))
        if t is not None:
            return t, ty
    return None


def _instances(sys, n, seed, tag, make):
    """Yield `n` non-None results of `make(rng)` from derived seeds."""
    produced = k = 0
    while produced < n:
        got = make(_rng(tag, seed, k))
        k += 1
        if got is not None:
            produced += 1
            yield got


def _ksub_chain(sys, rng, max_depth=4):
    g = Generator(rng, sys, work=300)
    D = random_stack(rng, max_depth)
    a = random_ksub(rng, sys, D)
    if a is None:
        return None
    s, G = a
    b = random_ksub(rng, sys, G)
    if b is None:
        return None
    d, G2 = b
    c = random_ksub(rng, sys, G2)
    if c is None:
        return None
    e, G3 = c
    tt = _typed_term(g, D)
    if tt is None:
        return None
    return D, G, G2, G3, s, d, e, tt[0], tt[1]


def ksub_category(sys, n=1000, seed=0):
    rep = Report("ksub-category", sys)
    with _timed(rep):
        for D, G, G2, G3, s, d, e, t, ty in _instances(sys, n, seed, "cat", lambda r: _ksub_chain(sys, r)):
            rep.checked += 1
            where = f"{describe(D, t, ty)}\n  s = {s}\n  d = {d}"
            if subst.ksub_apply(t, subst.ksub_id(D)) != t:
                rep.fail(f"identity action fails on {where}")
            elif subst.compose(subst.ksub_id(D), s) != s or subst.compose(s, subst.ksub_id(G)) != s:
                rep.fail(f"identity law fails on {where}")
            elif subst.compose(subst.compose(s, d), e) != subst.compose(s, subst.compose(d, e)):
                rep.fail(f"associativity fails on {where}")
            elif subst.ksub_apply(t, subst.compose(s, d)) != subst.ksub_apply(subst.ksub_apply(t, s), d):
                rep.fail(f"t[s o d] != t[s][d] on {where}")
            elif synth(sys, G, subst.ksub_apply(t, s)) != ty:
                rep.fail(f"substitution changed the type on {where}")
            else:
                try:
                    check_ksub(sys, G2, subst.compose(s, d), D)
                except Exception as exc:
                    rep.fail(f"composite is ill-typed ({exc}) on {where}")
    return rep


def ksub_distributivity(sys, n=1000, seed=0):
    rep = Report("ksub-distributivity", sys)
    with _timed(rep):
        for D, G, G2, _, s, d, *_ in _instances(sys, n, seed, "dist", lambda r: _ksub_chain(sys, r)):
            rep.checked += 1
            ok = True
            for k in range(len(s)):
                off = subst.trunc_offset(s, k)
                if not off < len(G):
                    ok = False
                    rep.fail(f"range not preserved: trunc_offset(s, {k}) = {off} on a domain of {len(G)}\n  s = {s}")
                    break
                for m in range(len(s) - k):
                    if subst.trunc(s, k + m) != subst.trunc(subst.trunc(s, k), m) or subst.trunc_offset(
                        s, k + m
                    ) != off + subst.trunc_offset(subst.trunc(s, k), m):
                        ok = False
                        rep.fail(f"distributivity of addition fails at n={k}, m={m}\n  s = {s}")
                        break
                if not ok:
                    break
                sd = subst.compose(s, d)
                if subst.trunc_offset(sd, k) != subst.trunc_offset(d, off) or subst.trunc(sd, k) != subst.compose(
                    subst.trunc(s, k), subst.trunc(d, off)
                ):
                    ok = False
                    rep.fail(f"distributivity of composition fails at n={k}\n  s = {s}\n  d = {d}")
                    break
    return rep


def _mot_instance(sys, rng):
    g = Generator(rng, System.S4, work=300)
    D = random_stack(rng, 4)
    if len(D) < 2:
        D = D + (g.small_ctx(2),)
    l = rng.randint(0, len(D) - 2)
    n = 0 if rng.random() < 0.5 else rng.randint(1, 3)
    tt = _typed_term(g, D, budget=14)
    if tt is None:
        return None
    return D, n, l, tt[0], tt[1]


def mot_target(D, n, l):
    """The stack a {n/l} transformation moves terms of D to."""
    p = len(D) - 1 - l
    if n == 0:
        return D[: p - 1] + (D[p - 1] + D[p],) + D[p + 1 :]
    return D[:p] + ((),) * (n - 1) + D[p:]


def mot_agreement(sys=System.S4, n=1000, seed=0):
    rep = Report("mot-agreement", sys)
    with _timed(rep):
        kinds = {"fusion": 0, "weakening": 0}
        for D, k, l, t, ty in _instances(sys, n, seed, "mot", lambda r: _mot_instance(sys, r)):
            rep.checked += 1
            kinds["fusion" if k == 0 else "weakening"] += 1
            width = len(D[len(D) - 1 - l])
            direct = subst.mot_apply(t, k, l, width)
            via = subst.ksub_apply(t, subst.mot_as_ksub(k, l, D))
            if direct != via:
                rep.fail(
                    f"{{{k}/{l}}} on {describe(D, t, ty)}\n  mot_apply  = {direct}\n  via K-sub = {via}"
                )
            elif synth(System.S4, mot_target(D, k, l), direct) != ty:
                rep.fail(f"{{{k}/{l}}} changed the type of {describe(D, t, ty)}")
        rep.notes.append(kinds)
    return rep


# -- weakenings and the semantic model -----------------------------------------


def eval_ksub(s, r, shp):
    """The environment a K-substitution denotes, given an environment for its domain."""
    entries = []
    cur, cur_shp = r, shp
    for off, terms in reversed(s.exts):
        local = tuple(eval_term(u, cur, cur_shp) for u in terms)
        m = env_trunc_offset(cur, off)
        entries.append((m, local))
        cur, cur_shp = env_trunc(cur, off), cur_shp[: len(cur_shp) - m]
    env = ETop(tuple(eval_term(u, cur, cur_shp) for u in s.base))
    for m, local in reversed(entries):
        env = ECons(m, env, local)
    return env


def _natural_instance(sys, rng):
    g = Generator(rng, sys, work=300)
    D = random_stack(rng, 4)
    tt = _typed_term(g, D, budget=14)
    if tt is None:
        return None
    a = random_ksub(rng, sys, D) if rng.random() < 0.7 else None
    if a is None:
        s, G = subst.ksub_id(D), D
    else:
        s, G = a
    w, G2 = random_kweak(rng, sys, G)
    return D, G, G2, s, w, tt[0], tt[1]


def naturality(sys, n=500, seed=0):
    rep = Report("naturality", sys)
    with _timed(rep):
        for D, G, G2, s, w, t, ty in _instances(sys, n, seed, "nat", lambda r: _natural_instance(sys, r)):
            rep.checked += 1
            shp, shp2 = shape(G), shape(G2)
            r = eval_ksub(s, id_env(G), shp)
            v = eval_term(t, r, shp)
            after = reify(ty, eval_term(t, weaken_env(r, w), shp2), shp2)
            before = reify(ty, weaken_value(v, w), shp2)
            renamed = rename(reify(ty, v, shp), w)
            if not after == before == renamed:
                rep.fail(
                    f"{describe(D, t, ty)}\n  w = {w}\n  eval after weakening: {after}"
                    f"\n  weakening after eval: {before}\n  renamed normal form: {renamed}"
                )
            elif reify(ty, v, shp) != nbe(System.S4, G, ty, subst.ksub_apply(t, s)):
                rep.fail(f"evaluating under a substitution disagrees with substituting: {describe(D, t, ty)}\n  s = {s}")
    return rep


def _kweak_instance(sys, rng):
    g = Generator(rng, sys, work=300)
    D = random_stack(rng, 4)
    tt = _typed_term(g, D)
    if tt is None:
        return None
    a, G = random_kweak(rng, sys, D)
    b, G2 = random_kweak(rng, sys, G)
    c, G3 = random_kweak(rng, sys, G2)
    return D, G, G2, G3, a, b, c, tt[0], tt[1]


def kweak_laws(sys, n=500, seed=0):
    rep = Report("kweak-laws", sys)
    with _timed(rep):
        for D, G, G2, G3, a, b, c, t, ty in _instances(sys, n, seed, "kw", lambda r: _kweak_instance(sys, r)):
            rep.checked += 1
            where = f"{describe(D, t, ty)}\n  a = {a}\n  b = {b}"
            if kweak_compose(kweak_id(shape(D)), a) != a or kweak_compose(a, kweak_id(shape(G))) != a:
                rep.fail(f"identity law fails on {where}")
            elif kweak_compose(kweak_compose(a, b), c) != kweak_compose(a, kweak_compose(b, c)):
                rep.fail(f"associativity fails on {where}")
            elif rename(rename(t, a), b) != rename(t, kweak_compose(a, b)):
                rep.fail(f"renaming is not functorial on {where}")
            elif rename(t, a) != subst.ksub_apply(t, to_ksub(a)):
                rep.fail(f"renaming disagrees with the K-substitution it denotes on {where}")
            elif synth(sys, G, rename(t, a)) != ty:
                rep.fail(f"renaming changed the type on {where}")
            else:
                for k in range(len(D)):
                    off = kweak_trunc_offset(a, k)
                    if off != subst.trunc_offset(to_ksub(a), k) or to_ksub(kweak_trunc(a, k)) != subst.trunc(
                        to_ksub(a), k
                    ):
                        rep.fail(f"truncation disagrees with K-substitutions at n={k} on {where}")
                        break
    return rep


# -- contextual types ----------------------------------------------------------


def _ctx_instance(sys, rng):
    g = Generator(rng, sys, contextual=True, work=300)
    G = random_stack(rng, 4, contextual=True)
    cap = tuple(g.small_ctx(2) for _ in range(rng.randint(0, 2)))
    lo, hi = _level_bounds(sys, len(cap))
    hi = min(hi, len(G) - 1)
    if lo > hi:
        return None
    total = rng.randint(lo, hi)
    offs = _split_offsets(rng, sys, total, len(cap))
    if offs is None:
        return None
    ty = rng.choice(SMALL_TYPES + CONTEXTUAL_TYPES)
    body = g.term(G[: len(G) - total] + cap, ty, rng.randint(1, 12))
    if body is None:
        return None
    sub = g._semisub(G, cap, offs, 6)
    if sub is None:
        return None
    return G, cap, sub, body, ty


def contextual_beta(sys, n=200, seed=0):
    rep = Report("contextual-beta-eta", sys)
    with _timed(rep):
        for G, cap, sub, body, ty in _instances(sys, n, seed, "ctx", lambda r: _ctx_instance(sys, r)):
            rep.checked += 1
            redex = CUnbox(CBox(cap, body), sub)
            where = describe(G, redex)
            try:
                if synth(sys, G, redex) != ty:
                    rep.fail(f"redex does not have the body's type: {where}")
                    continue
                lower = G[: len(G) - subst.semi_offset(sub)]
                ks = subst.semi_to_ksub(sub, G)
                check_ksub(sys, G, ks, lower + cap)
                reduct = beta_step(redex, shape(G))
                expected = subst.ksub_apply(body, ks)
                if reduct != expected:
                    rep.fail(f"{where}\n  reduces to {reduct}\n  expected  {expected}")
                elif synth(sys, G, reduct) != ty:
                    rep.fail(f"reduct changes the type: {where}")
                else:
                    code = CBox(cap, body)
                    eta = CBox(cap, CUnbox(code, subst.semi_id(cap)))
                    if synth(sys, lower, eta) != synth(sys, lower, code):
                        rep.fail(f"eta expansion changes the type of {describe(lower, code)}")
                    elif beta_step(eta, shape(lower)) != code:
                        rep.fail(f"eta expansion does not reduce back to {describe(lower, code)}")
            except Exception as exc:
                rep.fail(f"{where}\n  raised {exc!r}")
    return rep


def contextual_soundness(sys, n=200, seed=0):
    """Oracle normal forms of contextual terms keep their type."""
    rep = Report("contextual-oracle", sys)
    with _timed(rep):
        for cfg, t in corpus(sys, n, seed, 20, 4, contextual=True):
            rep.checked += 1
            try:
                w = oracle_normalize(sys, cfg.stack, cfg.goal, t)
                if synth(sys, cfg.stack, w) != cfg.goal:
                    rep.fail(f"{describe(cfg.stack, t, cfg.goal)}\n  normal form changes the type: {w}")
            except Exception as exc:
                rep.fail(f"{describe(cfg.stack, t, cfg.goal)}\n  raised {exc!r}")
    return rep


SUITES = {
    "soundness": soundness,
    "completeness": completeness,
    "idempotence": idempotence,
    "ksub-category": ksub_category,
    "ksub-distributivity": ksub_distributivity,
    "mot-agreement": mot_agreement,
    "naturality": naturality,
    "kweak-laws": kweak_laws,
    "contextual-beta-eta": contextual_beta,
    "contextual-oracle": contextual_soundness,
}


def run_all(systems, n=100, seed=0, only=None):
    reports = []
    for sys in systems:
        for name, suite in SUITES.items():
            if only is not None and name not in only:
                continue
            reports.append(suite(sys, n=n, seed=seed))
    return reports
