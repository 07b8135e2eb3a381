"""Acceptance suite.

One test per criterion; each prints a single ``[PASS]``/``[FAIL]`` line on
stdout (run with ``pytest -s`` or check the captured output) in addition to
the usual assertion.
"""

import io
import re
import sys
import time
from contextlib import redirect_stdout
from pathlib import Path

from conftest import CORPUS
from sfc import (
    Abs,
    App,
    IntVal,
    Scope,
    TAbs,
    TApp,
    TyInt,
    TypeContext,
    TyVar,
    check_program,
    eval_program,
    eval_subst_oracle,
    eval_term,
    free_vars,
    parse_program,
    parse_scheme,
    parse_term,
    parse_type,
    program_term,
    scheme_equal,
    typecheck,
    values_agree,
    wf_type,
)
from sfc.cli import run as cli_run
from sfc.core import Env
from sfc.typecheck import TypeCheckError
from termgen import TermGen

sys.path.insert(0, str(CORPUS.parents[0] / "runtime"))
import harness  # noqa: E402


def _report(criterion, ok):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}")
    assert ok, criterion


def _ctx(tyvars=(), term_vars=(), globals_=None):
    return TypeContext(
        type_vars=frozenset(tyvars), term_vars=tuple(term_vars), globals=globals_ or {}
    )


TRUE = r"/\'a. /\'b. \t: 'a. \f: 'b. t"
FALSE = r"/\'a. /\'b. \t: 'a. \f: 'b. f"
COND = r"/\'a. /\'b. /\'c. /\'d. \t: 'a. \f: 'b. \c: ('a -{}-> 'b -'d-> 'c). c t f"
COMPOSE = (
    r"/\'a. /\'b. /\'c. /\'d1. /\'d2. "
    r"\f: ('b -'d1-> 'c). \g: ('a -'d2-> 'b). \x: 'a. f (g x)"
)


def test_golden_typings():
    """The boolean and compose combinators reproduce their published schemes."""
    start = time.monotonic()
    expected = {
        TRUE: "forall 'a. forall 'b. 'a -{}-> 'b -{t: 'a}-> 'a",
        FALSE: "forall 'a. forall 'b. 'a -{}-> 'b -{}-> 'b",
        COND: (
            "forall 'a. forall 'b. forall 'c. forall 'd. "
            "'a -{}-> 'b -{t: 'a}-> ('a -{}-> 'b -'d-> 'c) -{t: 'a, f: 'b}-> 'c"
        ),
        COMPOSE: (
            "forall 'a. forall 'b. forall 'c. forall 'd1. forall 'd2. "
            "('b -'d1-> 'c) -{}-> ('a -'d2-> 'b) -{f: 'b -'d1-> 'c}-> "
            "'a -{f: 'b -'d1-> 'c, g: 'a -'d2-> 'b}-> 'c"
        ),
    }
    ok = all(
        scheme_equal(typecheck(_ctx(), parse_term(src)), parse_scheme(want))
        for src, want in expected.items()
    )
    elapsed = time.monotonic() - start
    _report("golden typings (true/false/cond/compose)", ok and elapsed < 1.0)


def test_branch_typing():
    """Applying cond to the true boolean yields the first branch's type,
    and to the false boolean the second's."""
    globals_ = {
        "cond": typecheck(_ctx(), parse_term(COND)),
        "true": typecheck(_ctx(), parse_term(TRUE)),
        "false": typecheck(_ctx(), parse_term(FALSE)),
    }
    ctx = _ctx(("a", "b"), (("t", TyVar("a")), ("f", TyVar("b"))), globals_)
    via_true = typecheck(ctx, parse_term("cond ['a] ['b] ['a] [{t: 'a}] t f (true ['a] ['b])"))
    via_false = typecheck(ctx, parse_term("cond ['a] ['b] ['b] [{}] t f (false ['a] ['b])"))
    _report("branch typing (true instance : 'a, false instance : 'b)",
            via_true == TyVar("a") and via_false == TyVar("b"))


def test_tabs_restriction():
    """A type abstraction over an open body is rejected, naming the variable;
    a closed body is accepted."""
    try:
        typecheck(_ctx(), parse_term(r"/\'b. \y: 'b. /\'a. \x: 'a. y"))
        rejected = False
    except TypeCheckError as e:
        rejected = e.kind == "tabs-free-vars" and "y" in e.offending_names
    try:
        typecheck(_ctx(), parse_term(r"/\'a. \x: 'a. x"))
        accepted = True
    except TypeCheckError:
        accepted = False
    _report("type-abstraction closed-body restriction", rejected and accepted)


def test_oracle_equivalence():
    """Environment evaluation agrees with the substitution oracle on the
    whole corpus plus 1000 generated closed well-typed terms."""
    start = time.monotonic()
    disagreements = 0

    for path in sorted(CORPUS.glob("*.sfc")):
        program = parse_program(path.read_text())
        check_program(program)
        if program.main is None:
            continue
        term = program_term(program)
        if not values_agree(eval_term(Env(), term), eval_subst_oracle(term)):
            disagreements += 1

    gen = TermGen(seed=2026)
    for _ in range(1000):
        term = gen.closed_int_term(depth=6)
        assert typecheck(_ctx(), term) == TyInt()
        if not values_agree(eval_term(Env(), term), eval_subst_oracle(term)):
            disagreements += 1

    elapsed = time.monotonic() - start
    _report(
        f"oracle equivalence (corpus + 1000 generated, {elapsed:.1f}s)",
        disagreements == 0 and elapsed < 60.0,
    )


def test_snapshot_semantics():
    """A closure keeps the captured value even when the name is later
    rebound at the call site."""
    program = parse_program((CORPUS / "snapshot.sfc").read_text())
    check_program(program)
    v = eval_program(program)["main"]
    _report("snapshot semantics (captured value survives rebinding)",
            isinstance(v, IntVal) and v.value == 7)


def _lambda_free_var_sets(program):
    """Positions and free-variable name sets of every lambda, computed
    straight off the AST without the type checker."""
    globals_ = set()
    out = {}

    def walk(t):
        if isinstance(t, Abs):
            names = frozenset(free_vars(t)) - globals_
            out[t.pos] = names
            walk(t.body)
        elif isinstance(t, App):
            walk(t.fun), walk(t.arg)
        elif isinstance(t, (TAbs, TApp)):
            walk(t.body if isinstance(t, TAbs) else t.fun)
        elif hasattr(t, "left"):
            walk(t.left), walk(t.right)

    for name, term in program.bindings:
        walk(term)
        globals_.add(name)
    return out


def test_scope_exactness():
    """For every fixture the `delta` subcommand reports, at each lambda,
    exactly the lambda's free variables."""
    ok = True
    for path in sorted(CORPUS.glob("*.sfc")):
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = cli_run(["delta", str(path)])
        if code != 0:
            ok = False
            continue
        reported = {}
        for line in buf.getvalue().strip().splitlines():
            pos, scope_text = line.split(" ", 1)
            line_no, col = map(int, pos.split(":"))
            scope = parse_type(scope_text)
            reported[(line_no, col)] = frozenset(n for n, _ in scope.entries)
        expected = _lambda_free_var_sets(parse_program(path.read_text()))
        if reported != expected:
            ok = False
    _report("scope exactness (delta output == free variables, all fixtures)", ok)


def test_map_type_well_formed():
    """The polymorphic map type parses and is well formed once list/1 is
    declared.  (No map implementation exists to execute.)"""
    scheme = parse_scheme(
        "forall 'a. forall 'b. forall 'd. "
        "('a -'d-> 'b) -{}-> 'a list -{f: 'a -'d-> 'b}-> 'b list"
    )
    ctx = TypeContext(tycons={"list": 1})
    try:
        wf_type(ctx, scheme)
        ok = True
    except Exception:
        ok = False
    _report("map type parses and is well formed with list/1", ok)


def test_end_to_end_compiled_agreement(tmp_path):
    """[SECONDARY] Compiled corpus programs, built against the runtime
    header, print exactly what the evaluator computes; the header passes
    the allocation audit."""
    start = time.monotonic()
    ok = True
    checked = 0
    for path in sorted(CORPUS.glob("*.sfc")):
        program = parse_program(path.read_text())
        types = check_program(program)
        if types.get("main") != TyInt():
            continue
        expected = eval_program(program)["main"].value
        cpp = tmp_path / (path.stem + ".cpp")
        with redirect_stdout(io.StringIO()):
            code = cli_run(["compile", str(path), "-o", str(cpp)])
        if code != 0:
            ok = False
            continue
        exit_code, stdout = harness.build_and_run(cpp)
        if exit_code != 0 or stdout.strip() != str(expected):
            ok = False
        checked += 1
    audit = harness.audit_allocation_free(harness.HEADER)
    elapsed = time.monotonic() - start
    _report(
        f"end-to-end compiled agreement ({checked} programs, {elapsed:.1f}s)",
        ok and checked >= 10 and not audit and elapsed < 120.0,
    )
