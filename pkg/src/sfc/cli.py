"""Command-line front end: check, eval, compile, ast and delta subcommands.

Exit codes: 0 ok, 1 type error, 2 parse error, 3 runtime error, 4 usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .codegen import CodegenError, lower_program
from .core import IntVal, SfcError, TypeContext, is_pure
from .interp import DEFAULT_FUEL, EvalError, eval_program
from .parser import ParseError, parse_program
from .printer import print_term, print_type
from .typecheck import DeltaLog, TypeCheckError, check_program

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_PARSE_ERROR = 2
EXIT_RUNTIME_ERROR = 3
EXIT_USAGE = 4


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 4, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="sfc", description="Closure-typed prenex System F toolchain")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("input", help="path to a .sfc source file")
        sp.add_argument("--json-diagnostics", action="store_true", help="line-delimited JSON diagnostics")

    sp = sub.add_parser("check", help="type-check and print each binding's type")
    common(sp)
    sp.add_argument("--pure", action="store_true", help="reject integer-literal plumbing")

    sp = sub.add_parser("eval", help="evaluate main and print its value")
    common(sp)
    sp.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="evaluation step budget")

    sp = sub.add_parser("compile", help="lower to C++ source")
    common(sp)
    sp.add_argument("-o", "--output", help="output path (default stdout)")

    sp = sub.add_parser("ast", help="print the parsed program")
    common(sp)
    sp.add_argument("--pure", action="store_true", help="reject integer-literal plumbing")

    sp = sub.add_parser("delta", help="print the scope type of every lambda")
    common(sp)
    return p


def _diag(args, kind: str, message: str, pos=None, binding=None, expected=None, actual=None) -> None:
    if args.json_diagnostics:
        rec = {"kind": kind, "message": message}
        if pos:
            rec["line"], rec["col"] = pos
        if binding:
            rec["name"] = binding
        if expected is not None:
            rec["expected"] = print_type(expected)
        if actual is not None:
            rec["actual"] = print_type(actual)
        print(json.dumps(rec), file=sys.stderr)
    else:
        line, col = pos if pos else (0, 0)
        where = f"{args.input}:{line}:{col}: "
        print(f"{where}{kind}: {message}", file=sys.stderr)


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        with open(args.input, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        print(f"sfc: cannot read {args.input}: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        program = parse_program(text)
    except ParseError as e:
        _diag(args, "parse-error", e.message, pos=e.pos)
        return EXIT_PARSE_ERROR

    if getattr(args, "pure", False):
        for name, term in program.bindings:
            if not is_pure(term):
                _diag(args, "impure", f"binding '{name}' uses integer plumbing", binding=name)
                return EXIT_TYPE_ERROR

    try:
        if args.subcommand == "check":
            types = check_program(program)
            for name, _ in program.bindings:
                print(f"{name} : {print_type(types[name])}")
        elif args.subcommand == "delta":
            log: DeltaLog = []
            check_program(program, delta_log=log)
            for _, pos, scope in log:
                line, col = pos if pos else (0, 0)
                print(f"{line}:{col} {print_type(scope)}")
        elif args.subcommand == "ast":
            for name, term in program.bindings:
                print(f"let {name} = {print_term(term)}")
        elif args.subcommand == "eval":
            check_program(program)
            if program.main is None:
                _diag(args, "no-main", "program has no main binding")
                return EXIT_RUNTIME_ERROR
            values = eval_program(program, fuel=args.fuel)
            v = values["main"]
            print(v.value if isinstance(v, IntVal) else type(v).__name__.lower())
        elif args.subcommand == "compile":
            check_program(program)
            lowered = lower_program(program)
            if args.output:
                with open(args.output, "w", encoding="utf-8") as f:
                    f.write(lowered.text)
            else:
                sys.stdout.write(lowered.text)
    except TypeCheckError as e:
        _diag(args, e.kind, e.message, pos=e.pos, binding=e.binding, expected=e.expected, actual=e.actual)
        return EXIT_TYPE_ERROR
    except EvalError as e:
        _diag(args, e.kind, e.message, pos=e.pos)
        return EXIT_RUNTIME_ERROR
    except CodegenError as e:
        _diag(args, "unsupported-construct", str(e))
        return EXIT_TYPE_ERROR
    except SfcError as e:
        _diag(args, "error", str(e))
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
