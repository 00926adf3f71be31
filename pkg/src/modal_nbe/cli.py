"""Command-line front end.

Exit codes: 0 success, 1 type error, 2 parse or usage error, 3 contextual
input given to `normalize`, 4 terms not equivalent, 5 property or oracle
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .checker import ALL_SYSTEMS, System, TypeCheckError, synth
from .nbe import UnsupportedFragment, nbe
from .oracle import beta_normalize, eta_expand
from .parser import ParseError, parse_file, pretty, pretty_ty
from .properties import SUITES, run_all
from .syntax import is_modal_fragment, ty_is_modal_fragment

EXIT_OK = 0
EXIT_TYPE = 1
EXIT_PARSE = 2
EXIT_FRAGMENT = 3
EXIT_NOT_EQUIV = 4
EXIT_PROPERTY = 5


class _Run:
    """Collects results and diagnostics for one command invocation."""

    def __init__(self, args, command):
        self.args = args
        self.command = command
        self.results = []
        self.diagnostics = []
        self.warnings = []
        self.lines = []

    def warn(self, message):
        self.warnings.append(message)

    def diag(self, record, path=None, system=None):
        rec = dict(record)
        if path is not None:
            rec["file"] = path
        if system is not None:
            rec["system"] = system.value
        self.diagnostics.append(rec)

    def finish(self, code, systems):
        def pos(d):
            span = d.get("span") or {}
            return (d.get("file", ""), span.get("line", 0), span.get("col", 0))

        self.diagnostics.sort(key=pos)
        if self.args.json:
            doc = {
                "command": self.command,
                "system": [s.value for s in systems] if len(systems) != 1 else systems[0].value,
                "exit_code": code,
                "results": self.results,
                "diagnostics": self.diagnostics,
                "warnings": self.warnings,
            }
            print(json.dumps(doc, indent=2))
        else:
            for line in self.lines:
                print(line)
            for w in self.warnings:
                print(f"warning: {w}", file=sys.stderr)
            for d in self.diagnostics:
                span = d.get("span")
                where = d.get("file", "<input>")
                if span:
                    where += f":{span['line']}:{span['col']}"
                tag = f" [{d['system']}]" if "system" in d else ""
                print(f"{where}: {d['kind']}{tag}: {d['message']}", file=sys.stderr)
        return code


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _systems(run, flag, header):
    if flag is not None:
        if flag == "all":
            chosen = list(ALL_SYSTEMS)
        else:
            chosen = [System.parse(flag)]
        if header is not None and flag != header.value:
            run.warn(f"--system {flag} overrides the file's 'system {header.value}' header")
        return chosen
    return [header if header is not None else System.S4]


def _load(run, path):
    try:
        return parse_file(_read(path))
    except ParseError as exc:
        run.diag(exc.to_json(), path)
    except OSError as exc:
        run.diag({"kind": "io-error", "message": str(exc), "span": None}, path)
    return None


def _prefix(systems, sys_):
    return f"[{sys_.value}] " if len(systems) > 1 else ""


def _check_decl(sys_, decl):
    ty = synth(sys_, decl.stack, decl.term)
    if decl.ty is not None and decl.ty != ty:
        raise TypeCheckError(
            "type-mismatch",
            f"{decl.name} has type {pretty_ty(ty)} but is declared as {pretty_ty(decl.ty)}",
            decl.term.span,
        )
    return ty


def cmd_check(args):
    run = _Run(args, "check")
    src = _load(run, args.file)
    if src is None:
        return run.finish(EXIT_PARSE, [System.S4])
    systems = _systems(run, args.system, src.system)
    code = EXIT_OK
    for sys_ in systems:
        for decl in src.decls:
            try:
                ty = _check_decl(sys_, decl)
            except TypeCheckError as exc:
                run.diag(exc.to_json(), args.file, sys_)
                run.results.append({"name": decl.name, "system": sys_.value, "ok": False, "type": None})
                code = EXIT_TYPE
                continue
            run.results.append({"name": decl.name, "system": sys_.value, "ok": True, "type": pretty_ty(ty)})
            run.lines.append(f"{_prefix(systems, sys_)}{decl.name} : {pretty_ty(ty)}")
    return run.finish(code, systems)


def cmd_normalize(args):
    run = _Run(args, "normalize")
    src = _load(run, args.file)
    if src is None:
        return run.finish(EXIT_PARSE, [System.S4])
    systems = _systems(run, args.system, src.system)
    type_err = fragment = mismatch = False
    for sys_ in systems:
        for decl in src.decls:
            try:
                ty = _check_decl(sys_, decl)
            except TypeCheckError as exc:
                run.diag(exc.to_json(), args.file, sys_)
                type_err = True
                continue
            if (
                not is_modal_fragment(decl.term)
                or not all(ty_is_modal_fragment(a) for c in decl.stack for a in c)
                or not ty_is_modal_fragment(ty)
            ):
                span = decl.span
                run.diag(
                    {
                        "kind": "unsupported-fragment",
                        "message": f"{decl.name}: normalization by evaluation covers box and arrow types only; "
                        "contextual types (cbox/cunbox) can be checked but not normalized",
                        "span": None if span is None else {"line": span.line, "col": span.col},
                    },
                    args.file,
                    sys_,
                )
                fragment = True
                continue
            try:
                nf = nbe(sys_, decl.stack, ty, decl.term)
            except UnsupportedFragment as exc:
                run.diag({"kind": "unsupported-fragment", "message": str(exc), "span": None}, args.file, sys_)
                fragment = True
                continue
            steps = None
            if args.oracle:
                counter = []
                beta = beta_normalize(sys_, decl.stack, decl.term, on_step=counter.append)
                expected = eta_expand(sys_, decl.stack, ty, beta)
                steps = len(counter)
                if expected != nf:
                    mismatch = True
                    span = decl.span
                    run.diag(
                        {
                            "kind": "oracle-mismatch",
                            "message": f"{decl.name}: nbe gives {pretty(nf, decl.names)} "
                            f"but the reduction oracle gives {pretty(expected, decl.names)}",
                            "span": None if span is None else {"line": span.line, "col": span.col},
                        },
                        args.file,
                        sys_,
                    )
            text = pretty(nf, decl.names)
            run.results.append(
                {"name": decl.name, "system": sys_.value, "type": pretty_ty(ty), "normal_form": text, "steps": steps}
            )
            run.lines.append(f"{_prefix(systems, sys_)}{decl.name} = {text}")
    code = EXIT_TYPE if type_err else EXIT_FRAGMENT if fragment else EXIT_PROPERTY if mismatch else EXIT_OK
    return run.finish(code, systems)


def cmd_equiv(args):
    run = _Run(args, "equiv")
    src = _load(run, args.file)
    if src is None:
        return run.finish(EXIT_PARSE, [System.S4])
    systems = _systems(run, args.system, src.system)
    decls = {d.name: d for d in src.decls}
    for name in (args.name1, args.name2):
        if name not in decls:
            run.diag({"kind": "unknown-declaration", "message": f"no declaration named {name!r}", "span": None}, args.file)
    if run.diagnostics:
        return run.finish(EXIT_PARSE, systems)
    d1, d2 = decls[args.name1], decls[args.name2]
    code = EXIT_OK
    for sys_ in systems:
        try:
            t1, t2 = _check_decl(sys_, d1), _check_decl(sys_, d2)
        except TypeCheckError as exc:
            run.diag(exc.to_json(), args.file, sys_)
            code = max(code, EXIT_TYPE) if code != EXIT_NOT_EQUIV else code
            continue
        if d1.stack != d2.stack or t1 != t2:
            run.diag(
                {
                    "kind": "type-mismatch",
                    "message": f"{d1.name} : {pretty_ty(t1)} and {d2.name} : {pretty_ty(t2)} "
                    "do not share a context stack and type",
                    "span": None,
                },
                args.file,
                sys_,
            )
            code = EXIT_TYPE
            continue
        try:
            n1, n2 = nbe(sys_, d1.stack, t1, d1.term), nbe(sys_, d2.stack, t2, d2.term)
        except UnsupportedFragment as exc:
            run.diag({"kind": "unsupported-fragment", "message": str(exc), "span": None}, args.file, sys_)
            code = EXIT_FRAGMENT
            continue
        same = n1 == n2
        p1, p2 = pretty(n1, d1.names), pretty(n2, d2.names)
        run.results.append(
            {"system": sys_.value, "equivalent": same, "normal_forms": {d1.name: p1, d2.name: p2}, "type": pretty_ty(t1)}
        )
        pre = _prefix(systems, sys_)
        if same:
            run.lines.append(f"{pre}{d1.name} == {d2.name} : {pretty_ty(t1)}")
        else:
            run.lines.append(f"{pre}{d1.name} != {d2.name}")
            run.lines.append(f"{pre}  {d1.name} = {p1}")
            run.lines.append(f"{pre}  {d2.name} = {p2}")
            if code == EXIT_OK:
                code = EXIT_NOT_EQUIV
    return run.finish(code, systems)


def cmd_selftest(args):
    run = _Run(args, "selftest")
    flag = args.system or "all"
    systems = list(ALL_SYSTEMS) if flag == "all" else [System.parse(flag)]
    if args.n <= 0:
        run.warn("--n 0 requests no instances; nothing was tested")
        return run.finish(EXIT_OK, systems)
    only = set(args.only) if args.only else None
    reports = run_all(systems, n=args.n, seed=args.seed, only=only)
    failed = False
    for rep in reports:
        run.results.append(rep.to_json())
        run.lines.append(rep.line())
        if not rep.ok:
            failed = True
            run.lines.append("  counterexample:")
            run.lines.extend("    " + line for line in rep.counterexample.splitlines())
    total = sum(r.checked for r in reports)
    bad = sum(r.failed for r in reports)
    run.lines.append(f"{total - bad}/{total} instances passed")
    return run.finish(EXIT_PROPERTY if failed else EXIT_OK, systems)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--system",
        choices=["k", "t", "k4", "s4", "all"],
        default=None,
        help="modal system (default: the file's header, else s4; selftest defaults to all)",
    )
    common.add_argument("--json", action="store_true", help="emit a single JSON document")

    parser = argparse.ArgumentParser(
        prog="modal-nbe", description="Type checking and normalization for a Kripke-style modal lambda calculus."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="type-check every declaration")
    p.add_argument("file", help="source file, or - for stdin")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("normalize", parents=[common], help="print beta-normal eta-long forms")
    p.add_argument("file", help="source file, or - for stdin")
    p.add_argument("--oracle", action="store_true", help="cross-check against the reduction oracle")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("equiv", parents=[common], help="decide whether two declarations are equivalent")
    p.add_argument("file", help="source file, or - for stdin")
    p.add_argument("name1")
    p.add_argument("name2")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("selftest", parents=[common], help="run the seeded property suites")
    p.add_argument("--n", type=int, default=100, help="instances per property and system (default 100)")
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--only", action="append", choices=sorted(SUITES), help="run only the named suite (repeatable)")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
