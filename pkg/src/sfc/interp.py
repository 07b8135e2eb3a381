"""Big-step environment-passing evaluation, plus a substitution-based
interpreter used as an independent oracle and an observational value
comparison for cross-checking the two.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Union

from .core import (
    Abs,
    App,
    Closure,
    Env,
    IntLit,
    IntVal,
    Pos,
    PrimAdd,
    SfcError,
    TAbs,
    TApp,
    Term,
    TyInt,
    TypeClosure,
    Value,
    Var,
    free_vars,
    fresh_name,
)
from .parser import SourceProgram

DEFAULT_FUEL = 1_000_000

# When True, every constructed closure is checked to capture exactly the
# free variables of its lambda. Left on in tests, cheap enough for the CLI.
CHECK_CLOSURE_MINIMALITY = True


class EvalError(SfcError):
    def __init__(self, kind: str, message: str, pos: Optional[Pos] = None) -> None:
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.pos = pos


class _Fuel:
    __slots__ = ("left",)

    def __init__(self, amount: int) -> None:
        self.left = amount

    def tick(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise EvalError("fuel-exhausted", "evaluation step budget exhausted")


def eval_term(env: Env, t: Term, fuel: int = DEFAULT_FUEL) -> Value:
    return _eval(env, t, _Fuel(fuel))


def _eval(env: Env, t: Term, fuel: _Fuel) -> Value:
    fuel.tick()
    match t:
        case Var(name):
            v = env.lookup(name)
            if v is None:
                raise EvalError("unbound-var", f"unbound variable '{name}'", pos=t.pos)
            return v

        case Abs(param, _, body):
            fv = free_vars(t)
            missing = fv - env.domain()
            if missing:
                raise EvalError(
                    "unbound-var",
                    f"unbound variable '{sorted(missing)[0]}' captured by lambda",
                    pos=t.pos,
                )
            captured = env.restrict(fv)  # snapshot, never a reference
            if CHECK_CLOSURE_MINIMALITY:
                assert captured.domain() == fv
            return Closure(param, body, captured)

        case App(f, a):
            fun = _eval(env, f, fuel)
            arg = _eval(env, a, fuel)
            if not isinstance(fun, Closure):
                raise EvalError("apply-non-closure", "application of a non-closure value", pos=t.pos)
            # the body runs under the closure's captured environment
            return _eval(fun.captured.extend(fun.param, arg), fun.body, fuel)

        case TAbs(_, body):
            return TypeClosure(body)

        case TApp(f, _):
            fun = _eval(env, f, fuel)
            if not isinstance(fun, TypeClosure):
                raise EvalError(
                    "tapp-non-tabs", "type application of a non-type-abstraction value", pos=t.pos
                )
            return _eval(env, fun.body, fuel)

        case IntLit(v):
            return IntVal(v)

        case PrimAdd(l, r):
            lv = _eval(env, l, fuel)
            rv = _eval(env, r, fuel)
            if not (isinstance(lv, IntVal) and isinstance(rv, IntVal)):
                raise EvalError("apply-non-closure", "'+' applied to non-integers", pos=t.pos)
            return IntVal(lv.value + rv.value)

    raise TypeError(t)


def eval_program(p: SourceProgram, fuel: int = DEFAULT_FUEL) -> Dict[str, Value]:
    """Evaluate bindings in order; returns the final name -> value map."""
    env = Env()
    out: Dict[str, Value] = {}
    for name, term in p.bindings:
        v = eval_term(env, term, fuel)
        env = env.extend(name, v)
        out[name] = v
    return out


def program_term(p: SourceProgram) -> Term:
    """Inline a program into one closed term: each binding becomes a beta-redex.

    Used to feed whole programs to the substitution oracle.
    """
    main = p.main
    if main is None:
        raise SfcError("program has no main binding")
    term = main
    for name, bound in reversed([(n, b) for n, b in p.bindings if n != "main"]):
        # the annotation is irrelevant to evaluation; TyInt is a placeholder
        term = App(Abs(name, TyInt(), term), bound)
    return term


# ---------------------------------------------------------------------------
# Substitution-based oracle

OracleValue = Term  # IntLit, Abs or TAbs, all closed


def subst_term(t: Term, var: str, replacement: Term) -> Term:
    """Capture-avoiding substitution t[var := replacement]."""
    repl_fv = free_vars(replacement)
    match t:
        case Var(name):
            return replacement if name == var else t
        case Abs(param, ty, body):
            if param == var:
                return t
            if param in repl_fv:
                p2 = fresh_name(param, repl_fv | free_vars(body) | {var})
                body = subst_term(body, param, Var(p2))
                param = p2
            return Abs(param, ty, subst_term(body, var, replacement))
        case App(f, a):
            return App(subst_term(f, var, replacement), subst_term(a, var, replacement))
        case TAbs(tv, body):
            return TAbs(tv, subst_term(body, var, replacement))
        case TApp(f, ty):
            return TApp(subst_term(f, var, replacement), ty)
        case IntLit(_):
            return t
        case PrimAdd(l, r):
            return PrimAdd(subst_term(l, var, replacement), subst_term(r, var, replacement))
    raise TypeError(t)


def eval_subst_oracle(t: Term, fuel: int = DEFAULT_FUEL) -> OracleValue:
    """Call-by-value normalization of a closed term by direct substitution."""
    return _oracle_eval(t, _Fuel(fuel))


def _oracle_eval(t: Term, fuel: _Fuel) -> OracleValue:
    fuel.tick()
    match t:
        case Var(name):
            raise EvalError("unbound-var", f"unbound variable '{name}'", pos=t.pos)
        case Abs() | TAbs() | IntLit():
            return t
        case App(f, a):
            fun = _oracle_eval(f, fuel)
            arg = _oracle_eval(a, fuel)
            if not isinstance(fun, Abs):
                raise EvalError("apply-non-closure", "application of a non-lambda value", pos=t.pos)
            return _oracle_eval(subst_term(fun.body, fun.param, arg), fuel)
        case TApp(f, _):
            fun = _oracle_eval(f, fuel)
            if not isinstance(fun, TAbs):
                raise EvalError(
                    "tapp-non-tabs", "type application of a non-type-abstraction value", pos=t.pos
                )
            return _oracle_eval(fun.body, fuel)
        case PrimAdd(l, r):
            lv = _oracle_eval(l, fuel)
            rv = _oracle_eval(r, fuel)
            if not (isinstance(lv, IntLit) and isinstance(rv, IntLit)):
                raise EvalError("apply-non-closure", "'+' applied to non-integers", pos=t.pos)
            return IntLit(lv.value + rv.value)
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Observational agreement

PROBES = (0, 1, -3)


def values_agree(v: Value, w: OracleValue, depth: int = 2, fuel: int = DEFAULT_FUEL) -> bool:
    """Observational comparison of a machine value against an oracle value.

    Integers compare by value; functions are applied to a battery of
    integer probes and results compared recursively up to `depth`; type
    closures are compared after one erased instantiation.
    """
    if isinstance(v, IntVal):
        return isinstance(w, IntLit) and w.value == v.value
    if isinstance(v, Closure):
        if not isinstance(w, Abs):
            return False
        if depth <= 0:
            return True
        for probe in PROBES:
            if not _probe_agree(v, w, probe, depth, fuel):
                return False
        return True
    if isinstance(v, TypeClosure):
        if not isinstance(w, TAbs):
            return False
        try:
            v2: Union[Value, EvalError] = eval_term(Env(), v.body, fuel)
        except EvalError as e:
            v2 = e
        try:
            w2: Union[OracleValue, EvalError] = eval_subst_oracle(w.body, fuel)
        except EvalError as e:
            w2 = e
        return _outcomes_agree(v2, w2, depth, fuel)
    raise TypeError(v)


def _probe_agree(v: Closure, w: Abs, probe: int, depth: int, fuel: int) -> bool:
    try:
        r1: Union[Value, EvalError] = eval_term(
            v.captured.extend(v.param, IntVal(probe)), v.body, fuel
        )
    except EvalError as e:
        r1 = e
    try:
        r2: Union[OracleValue, EvalError] = eval_subst_oracle(
            subst_term(w.body, w.param, IntLit(probe)), fuel
        )
    except EvalError as e:
        r2 = e
    return _outcomes_agree(r1, r2, depth - 1, fuel)


def _outcomes_agree(r1, r2, depth: int, fuel: int) -> bool:
    if isinstance(r1, EvalError) or isinstance(r2, EvalError):
        return isinstance(r1, EvalError) and isinstance(r2, EvalError) and r1.kind == r2.kind
    return values_agree(r1, r2, depth, fuel)
