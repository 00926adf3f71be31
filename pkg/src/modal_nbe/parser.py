"""Concrete syntax: lexer, parser, name resolution and pretty-printer.

    ty    := tyatom ("->" ty)?
    tyatom:= "B" | "[]" tyatom | "(" ty ")" | "[" ctxs "|-" ty "]"
    term  := lam | app
    lam   := "\\" ident (":" ty)? "." term
    app   := atom+ lam?
    atom  := ident | "(" term ")" | "box" atom | "unbox" NAT atom
           | "cbox" "{" ctxs "}" atom | "cunbox" atom "with" "(" ssub ")"
    ssub  := entry (";" entry)* | ""        entry := (term ("," term)*)? ("^" NAT)?
    ctxs  := ctx (";" ctx)* | ""            ctx := "." | ident ":" ty ("," ident ":" ty)*

A file is an optional `system k|t|k4|s4` line followed by declarations
`def name [ctxs |- ] term (: ty)?`.  `--` starts a line comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import App, Arr, B, Base, Box, BoxT, CBox, CtxT, CUnbox, Lam, SemiKSub, Span, Unbox, Var


class ParseError(Exception):
    def __init__(self, message, line=None, col=None):
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.message = message
        self.line = line
        self.col = col

    @property
    def span(self):
        return None if self.line is None else Span(self.line, self.col)

    def to_json(self):
        kind = {LexError: "lex-error", ScopeError: "scope-error"}.get(type(self), "parse-error")
        span = None if self.line is None else {"line": self.line, "col": self.col}
        return {"kind": kind, "message": self.message, "span": span}


class LexError(ParseError):
    pass


class ScopeError(ParseError):
    pass


# -- lexer -------------------------------------------------------------------

KEYWORDS = {"box", "unbox", "cbox", "cunbox", "with", "def", "system"}

_SYMBOLS = [
    ("[]", "BOXTY"),
    ("->", "ARROW"),
    ("|-", "TURNSTILE"),
    ("\\", "LAMBDA"),
    ("λ", "LAMBDA"),
    ("□", "BOXTY"),
    ("→", "ARROW"),
    ("⊢", "TURNSTILE"),
    ("·", "."),
]


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def span(self):
        return Span(self.line, self.col)


def tokenize(src: str) -> list[Token]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if src.startswith("--", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        for sym, kind in _SYMBOLS:
            if src.startswith(sym, i):
                toks.append(Token(kind, sym, line, col))
                i, col = i + len(sym), col + len(sym)
                break
        else:
            if c in ".()[]{};,:^":
                toks.append(Token(c, c, line, col))
                i, col = i + 1, col + 1
            elif c.isdigit():
                j = i
                while j < n and src[j].isdigit():
                    j += 1
                toks.append(Token("NAT", src[i:j], line, col))
                col += j - i
                i = j
            elif c.isalpha() or c == "_":
                j = i
                while j < n and (src[j].isalnum() or src[j] in "_'"):
                    j += 1
                word = src[i:j]
                toks.append(Token(word if word in KEYWORDS else "IDENT", word, line, col))
                col += j - i
                i = j
            else:
                raise LexError(f"unexpected character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


# -- surface syntax ----------------------------------------------------------


@dataclass(frozen=True)
class SVar:
    name: str
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SBox:
    body: object
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SUnbox:
    level: int
    body: object
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SLam:
    name: str
    ann: object
    body: object
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SApp:
    fn: object
    arg: object
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SCBox:
    capture: tuple  # tuple of tuples of (name, ty)
    body: object
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SCUnbox:
    body: object
    entries: tuple  # (offset, tuple of surface terms), bottom first
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Decl:
    name: str
    stack: tuple  # tuple of tuples of types
    names: tuple  # tuple of tuples of binder names, parallel to stack
    term: object
    ty: object
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SourceFile:
    system: object  # System or None when the file has no header
    decls: tuple
    system_span: Span | None = field(default=None, compare=False)


_ATOM_START = {"IDENT", "(", "box", "unbox", "cbox", "cunbox"}


class _Parser:
    def __init__(self, src):
        self.toks = tokenize(src)
        self.pos = 0

    @property
    def tok(self):
        return self.toks[self.pos]

    def peek(self, k=1):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def advance(self):
        t = self.tok
        self.pos += 1
        return t

    def expect(self, kind, what=None):
        if self.tok.kind != kind:
            found = "end of input" if self.tok.kind == "EOF" else repr(self.tok.text)
            raise self.error(f"expected {what or repr(kind)}, found {found}")
        return self.advance()

    def accept(self, kind):
        if self.tok.kind == kind:
            return self.advance()
        return None

    # -- types -----------------------------------------------------------

    def ty(self):
        left = self.ty_atom()
        if self.accept("ARROW"):
            return Arr(left, self.ty())
        return left

    def ty_atom(self):
        tok = self.tok
        match tok.kind:
            case "IDENT":
                if tok.text != "B":
                    raise self.error(f"unknown base type {tok.text!r}")
                self.advance()
                return B
            case "BOXTY":
                self.advance()
                return BoxT(self.ty_atom())
            case "(":
                self.advance()
                t = self.ty()
                self.expect(")")
                return t
            case "[":
                self.advance()
                ctxs = self.ctxs(("TURNSTILE",))
                self.expect("TURNSTILE", "'|-'")
                body = self.ty()
                self.expect("]")
                return CtxT(tuple(tuple(ty for _, ty in c) for c in ctxs), body)
        raise self.error("expected a type" + ("" if tok.kind == "EOF" else f", found {tok.text!r}"))

    def ctxs(self, stop):
        """Contexts separated by ';' up to (not including) a token in `stop`."""
        if self.tok.kind in stop:
            return ()
        out = [self.ctx()]
        while self.accept(";"):
            out.append(self.ctx())
        return tuple(out)

    def ctx(self):
        if self.accept("."):
            return ()
        out = []
        seen = set()
        while True:
            name = self.expect("IDENT", "a binder name or '.'")
            if name.text in seen:
                raise ParseError(f"duplicate name {name.text!r} in one context", name.line, name.col)
            seen.add(name.text)
            self.expect(":", "':'")
            out.append((name.text, self.ty()))
            if not self.accept(","):
                return tuple(out)

    # -- terms -----------------------------------------------------------

    def term(self):
        if self.tok.kind == "LAMBDA":
            return self.lam()
        tok = self.tok
        if self.tok.kind not in _ATOM_START:
            found = "end of input" if tok.kind == "EOF" else repr(tok.text)
            raise self.error(f"expected a term, found {found}")
        t = self.atom()
        while self.tok.kind in _ATOM_START:
            arg = self.atom()
            t = SApp(t, arg, tok.span)
        if self.tok.kind == "LAMBDA":
            t = SApp(t, self.lam(), tok.span)
        return t

    def lam(self):
        start = self.advance()
        name = self.expect("IDENT", "a binder name")
        ann = None
        if self.accept(":"):
            ann = self.ty()
        self.expect(".", "'.'")
        return SLam(name.text, ann, self.term(), start.span)

    def atom(self):
        tok = self.tok
        match tok.kind:
            case "IDENT":
                self.advance()
                return SVar(tok.text, tok.span)
            case "(":
                self.advance()
                t = self.term()
                self.expect(")", "')'")
                return t
            case "box":
                self.advance()
                return SBox(self.atom_or_error(), tok.span)
            case "unbox":
                self.advance()
                level = self.expect("NAT", "an unbox level")
                return SUnbox(int(level.text), self.atom_or_error(), tok.span)
            case "cbox":
                self.advance()
                self.expect("{", "'{'")
                ctxs = self.ctxs(("}",))
                self.expect("}", "'}'")
                return SCBox(ctxs, self.atom_or_error(), tok.span)
            case "cunbox":
                self.advance()
                body = self.atom_or_error()
                self.expect("with", "'with'")
                self.expect("(", "'('")
                entries = self.ssub()
                self.expect(")", "')'")
                return SCUnbox(body, entries, tok.span)
        raise self.error(f"expected a term, found {tok.text!r}")

    def atom_or_error(self):
        if self.tok.kind not in _ATOM_START:
            found = "end of input" if self.tok.kind == "EOF" else repr(self.tok.text)
            raise self.error(f"expected an atomic term, found {found}")
        return self.atom()

    def ssub(self):
        if self.tok.kind == ")":
            return ()
        out = [self.entry()]
        while self.accept(";"):
            out.append(self.entry())
        return tuple(out)

    def entry(self):
        terms = []
        if self.tok.kind not in ("^", ";", ")"):
            terms.append(self.term())
            while self.accept(","):
                terms.append(self.term())
        off = 1
        if self.accept("^"):
            off = int(self.expect("NAT", "an offset").text)
        return off, tuple(terms)

    # -- files -----------------------------------------------------------

    def file(self):
        from .checker import System

        system = None
        system_span = None
        if self.tok.kind == "system":
            kw = self.advance()
            name = self.expect("IDENT", "a system name")
            try:
                system = System.parse(name.text)
            except ValueError as exc:
                raise ParseError(str(exc), name.line, name.col) from None
            system_span = kw.span
        decls = []
        seen = set()
        while self.tok.kind != "EOF":
            decls.append(self.decl(seen))
        return system, tuple(decls), system_span

    def decl(self, seen):
        kw = self.expect("def", "'def'")
        name = self.expect("IDENT", "a declaration name")
        if name.text in seen:
            raise ParseError(f"duplicate definition {name.text!r}", name.line, name.col)
        seen.add(name.text)
        ctxs = ()
        if self.accept("["):
            ctxs = self.ctxs(("TURNSTILE",))
            self.expect("TURNSTILE", "'|-'")
            self.expect("]", "']'")
        if not ctxs:
            ctxs = ((),)
        body = self.term()
        ty = None
        if self.accept(":"):
            ty = self.ty()
        names = tuple(tuple(n for n, _ in c) for c in ctxs)
        stack = tuple(tuple(t for _, t in c) for c in ctxs)
        term = resolve(body, [list(c) for c in names])
        return Decl(name.text, stack, names, term, ty, kw.span)


# -- name resolution ---------------------------------------------------------


def resolve(s, worlds):
    """Turn a surface term into a nameless term; `worlds` lists the binder
    names of each world of the stack, deepest first."""
    match s:
        case SVar(name, span):
            top = worlds[-1]
            for i in range(len(top) - 1, -1, -1):
                if top[i] == name:
                    return Var(len(top) - 1 - i, span=span)
            if any(name in w for w in worlds[:-1]):
                raise ScopeError(f"variable {name!r} belongs to another world; reach it with unbox", span.line, span.col)
            raise ScopeError(f"unbound variable {name!r}", span.line, span.col)
        case SBox(body, span):
            return Box(resolve(body, worlds + [[]]), span=span)
        case SUnbox(n, body, span):
            if n >= len(worlds):
                raise ScopeError(f"unbox {n} reaches below the {len(worlds)} available world(s)", span.line, span.col)
            return Unbox(n, resolve(body, worlds[: len(worlds) - n]), span=span)
        case SLam(name, ann, body, span):
            return Lam(ann, resolve(body, worlds[:-1] + [worlds[-1] + [name]]), span=span, hint=name)
        case SApp(f, a, span):
            return App(resolve(f, worlds), resolve(a, worlds), span=span)
        case SCBox(cap, body, span):
            inner = worlds + [[n for n, _ in ctx] for ctx in cap]
            tys = tuple(tuple(t for _, t in ctx) for ctx in cap)
            return CBox(tys, resolve(body, inner), span=span)
        case SCUnbox(body, entries, span):
            total = sum(off for off, _ in entries)
            if total >= len(worlds):
                raise ScopeError(f"substitution offsets reach below the {len(worlds)} available world(s)", span.line, span.col)
            out = []
            cur = worlds
            for off, terms in reversed(entries):
                out.append((off, tuple(resolve(u, cur) for u in terms)))
                cur = cur[: len(cur) - off]
            return CUnbox(resolve(body, cur), SemiKSub(tuple(reversed(out))), span=span)
    raise TypeError(f"not a surface term: {s!r}")


def _reach(s, pos=0):
    """Lowest world position (relative to the start) a surface term reaches."""
    match s:
        case SVar():
            return pos
        case SBox(body):
            return _reach(body, pos + 1)
        case SUnbox(n, body):
            return _reach(body, pos - n)
        case SLam(_, _, body):
            return _reach(body, pos)
        case SApp(f, a):
            return min(_reach(f, pos), _reach(a, pos))
        case SCBox(cap, body):
            return _reach(body, pos + len(cap))
        case SCUnbox(body, entries):
            low = pos
            cur = pos
            for off, terms in reversed(entries):
                for u in terms:
                    low = min(low, _reach(u, cur))
                cur -= off
            return min(low, _reach(body, cur))
    raise TypeError(s)


def _free_names(s, worlds, pos, out):
    """Record free names per ambient world; `worlds` maps position -> bound names."""
    match s:
        case SVar(name, span):
            if name in worlds.get(pos, ()):
                return
            if pos > 0:
                raise ScopeError(f"unbound variable {name!r}", span.line, span.col)
            bucket = out.setdefault(pos, [])
            if name not in bucket:
                bucket.append(name)
        case SBox(body):
            _free_names(body, {**worlds, pos + 1: ()}, pos + 1, out)
        case SUnbox(n, body):
            _free_names(body, worlds, pos - n, out)
        case SLam(name, _, body):
            _free_names(body, {**worlds, pos: worlds.get(pos, ()) + (name,)}, pos, out)
        case SApp(f, a):
            _free_names(f, worlds, pos, out)
            _free_names(a, worlds, pos, out)
        case SCBox(cap, body):
            inner = dict(worlds)
            for k, ctx in enumerate(cap):
                inner[pos + 1 + k] = tuple(n for n, _ in ctx)
            _free_names(body, inner, pos + len(cap), out)
        case SCUnbox(body, entries):
            cur = pos
            for off, terms in reversed(entries):
                for u in terms:
                    _free_names(u, worlds, cur, out)
                cur -= off
            _free_names(body, worlds, cur, out)


def parse_open_term(src: str):
    """Parse a term, treating free names as variables of an ambient stack.

    Returns (term, worlds) where `worlds` lists the inferred ambient binder
    names per world, deepest first, each in order of first occurrence.
    """
    s = _parse_surface(src)
    depth = max(0, -_reach(s))
    free = {}
    _free_names(s, {}, 0, free)
    worlds = [free.get(-k, []) for k in range(depth, -1, -1)]
    return resolve(s, worlds), tuple(tuple(w) for w in worlds)


def _parse_surface(src):
    p = _Parser(src)
    s = p.term()
    if p.tok.kind != "EOF":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return s


def parse_term(src: str, names=None):
    """Parse a term.  `names` gives the binder names of the ambient stack
    (deepest world first); without it free names are inferred."""
    if names is None:
        return parse_open_term(src)[0]
    return resolve(_parse_surface(src), [list(w) for w in names])


def parse_type(src: str):
    p = _Parser(src)
    t = p.ty()
    if p.tok.kind != "EOF":
        raise p.error(f"unexpected {p.tok.text!r} after type")
    return t


def parse_file(src: str) -> SourceFile:
    p = _Parser(src)
    system, decls, span = p.file()
    return SourceFile(system, decls, span)


# -- pretty-printing ---------------------------------------------------------


def pretty_ty(ty) -> str:
    match ty:
        case Arr(dom, cod):
            left = pretty_ty(dom)
            if isinstance(dom, Arr):
                left = f"({left})"
            return f"{left} -> {pretty_ty(cod)}"
        case _:
            return _ty_atom(ty)


def _ty_atom(ty):
    match ty:
        case Base():
            return "B"
        case BoxT(body):
            return "[]" + _ty_atom(body)
        case CtxT(cap, body):
            ctxs = _pretty_ctxs([[(f"u{k}", t) for k, t in enumerate(ctx)] for ctx in cap])
            return f"[{ctxs + ' ' if ctxs else ''}|- {pretty_ty(body)}]"
        case Arr():
            return f"({pretty_ty(ty)})"
    raise TypeError(f"not a type: {ty!r}")


def _pretty_ctxs(ctxs):
    parts = []
    for ctx in ctxs:
        parts.append(", ".join(f"{n} : {pretty_ty(t)}" for n, t in ctx) if ctx else ".")
    return " ; ".join(parts)


def pretty_stack(stack, names=None) -> str:
    if names is None:
        names = _default_stack_names(stack)
    return _pretty_ctxs([list(zip(ns, ctx)) for ns, ctx in zip(names, stack)])


def _default_stack_names(stack):
    out = []
    k = 0
    for ctx in stack:
        out.append(tuple(f"v{k + i}" for i in range(len(ctx))))
        k += len(ctx)
    return tuple(out)


class _Printer:
    def __init__(self, names):
        self.taken = {n for w in names for n in w}
        self.counter = 0

    def fresh(self, used):
        while True:
            name = f"x{self.counter}"
            self.counter += 1
            if name not in self.taken and name not in used:
                return name

    def pp(self, t, worlds, ctx="top"):
        match t:
            case Var(ix):
                top = worlds[-1]
                return top[-1 - ix] if ix < len(top) else f"_{ix - len(top)}"
            case Lam(ann, body):
                used = {n for w in worlds for n in w}
                name = t.hint
                if name is None or name in used or name in self.taken:
                    name = self.fresh(used)
                inner = self.pp(body, worlds[:-1] + [worlds[-1] + [name]])
                head = f"\\{name} : {pretty_ty(ann)}" if ann is not None else f"\\{name}"
                out = f"{head}. {inner}"
                return out if ctx == "top" else f"({out})"
            case App(f, a):
                out = f"{self.pp(f, worlds, 'fn')} {self.pp(a, worlds, 'arg')}"
                return f"({out})" if ctx == "arg" else out
            case Box(body):
                out = f"box {self.pp(body, worlds + [[]], 'arg')}"
            case Unbox(n, body):
                out = f"unbox {n} {self.pp(body, worlds[: len(worlds) - n] or [[]], 'arg')}"
            case CBox(cap, body):
                used = {n for w in worlds for n in w}
                named = []
                for c in cap:
                    ns = []
                    for _ in c:
                        ns.append(self.fresh(used))
                    named.append(ns)
                ctxs = _pretty_ctxs([list(zip(ns, c)) for ns, c in zip(named, cap)])
                out = f"cbox {{{ctxs}}} {self.pp(body, worlds + named, 'arg')}"
            case CUnbox(body, sub):
                parts = []
                cur = worlds
                for off, terms in reversed(sub.exts):
                    ts = ", ".join(self.pp(u, cur) for u in terms)
                    parts.append(f"{ts} ^ {off}" if ts else f"^ {off}")
                    cur = cur[: len(cur) - off] or [[]]
                inner = self.pp(body, cur, "arg")
                out = f"cunbox {inner} with ({' ; '.join(reversed(parts))})"
            case _:
                raise TypeError(f"not a term: {t!r}")
        return f"({out})" if ctx == "arg" else out


def pretty(t, names=None) -> str:
    """Render a term; `names` gives the ambient binder names per world."""
    names = [list(w) for w in names] if names is not None else [[]]
    return _Printer(names).pp(t, names)
