"""Type checking for the closure-typed calculus.

Closure-arrow introduction constructs the lambda's lexical scope type from
the types of its free variables; application demands an exact match on the
domain; type abstraction bodies must be closed terms; type application
instantiates the outermost quantifier.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple, Union

from .core import (
    Abs,
    App,
    ClosArrow,
    IllFormedTypeError,
    IntLit,
    PlainArrow,
    Pos,
    PrimAdd,
    Scope,
    SfcError,
    TAbs,
    TApp,
    Term,
    Ty,
    TyInt,
    TypeContext,
    TypeScheme,
    TyVar,
    Var,
    _subst_ty_plain,
    free_vars,
    fresh_name,
    subst_ty,
    ty_equal,
    wf_type,
)
from .parser import SourceProgram
from .printer import print_type


class TypeCheckError(SfcError):
    """A typing failure; `kind` selects which optional fields are populated."""

    def __init__(
        self,
        kind: str,
        message: str,
        pos: Optional[Pos] = None,
        expected: Optional[Union[Ty, TypeScheme]] = None,
        actual: Optional[Union[Ty, TypeScheme]] = None,
        offending_names: Tuple[str, ...] = (),
        binding: Optional[str] = None,
    ) -> None:
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.pos = pos
        self.expected = expected
        self.actual = actual
        self.offending_names = offending_names
        self.binding = binding


# A log entry per checked lambda: (node, position, its scope type).
DeltaLog = List[Tuple[Abs, Optional[Pos], Scope]]


def compute_delta(ctx: TypeContext, lam: Abs) -> Scope:
    """Build the lexical scope type of a lambda from its free variables.

    Each free variable is looked up in the context; names bound to
    top-level definitions are static and are not captured.
    """
    entries = []
    for name in sorted(free_vars(lam)):
        ty = ctx.lookup_term(name)
        if ty is None:
            if name in ctx.globals:
                continue
            raise TypeCheckError(
                "unbound-var", f"unbound variable '{name}'", pos=lam.pos, offending_names=(name,)
            )
        entries.append((name, ty))
    return Scope(tuple(entries))


def typecheck(
    ctx: TypeContext, t: Term, delta_log: Optional[DeltaLog] = None
) -> Union[Ty, TypeScheme]:
    match t:
        case Var(name):
            ty = ctx.lookup(name)
            if ty is None:
                raise TypeCheckError(
                    "unbound-var", f"unbound variable '{name}'", pos=t.pos, offending_names=(name,)
                )
            return ty

        case Abs(param, param_ty, body):
            _wf(ctx, param_ty, t.pos)
            delta = compute_delta(ctx, t)
            if delta_log is not None:
                delta_log.append((t, t.pos, delta))
            body_ty = typecheck(ctx.bind(param, param_ty), body, delta_log)
            if isinstance(body_ty, TypeScheme):
                raise TypeCheckError(
                    "ill-formed-type",
                    "lambda body has a polymorphic type; instantiate it first",
                    pos=t.pos,
                    actual=body_ty,
                )
            return ClosArrow(param_ty, delta, body_ty)

        case App(f, a):
            fun_ty = typecheck(ctx, f, delta_log)
            arg_ty = typecheck(ctx, a, delta_log)
            if isinstance(arg_ty, TypeScheme):
                raise TypeCheckError(
                    "ill-formed-type",
                    "argument has a polymorphic type; instantiate it first",
                    pos=a.pos,
                    actual=arg_ty,
                )
            if not isinstance(fun_ty, (ClosArrow, PlainArrow)):
                raise TypeCheckError(
                    "not-a-function",
                    f"cannot apply a value of type {print_type(fun_ty)}",
                    pos=t.pos,
                    actual=fun_ty,
                )
            if not ty_equal(fun_ty.domain, arg_ty):
                raise TypeCheckError(
                    "arg-mismatch",
                    f"argument type {print_type(arg_ty)} does not match "
                    f"parameter type {print_type(fun_ty.domain)}",
                    pos=t.pos,
                    expected=fun_ty.domain,
                    actual=arg_ty,
                )
            return fun_ty.codomain

        case TAbs(tv, body):
            offenders = tuple(sorted(free_vars(body) - set(ctx.globals)))
            if offenders:
                raise TypeCheckError(
                    "tabs-free-vars",
                    "type abstraction body must be closed; free variable(s): "
                    + ", ".join(offenders),
                    pos=t.pos,
                    offending_names=offenders,
                )
            body_ty = typecheck(ctx.with_tyvar(tv), body, delta_log)
            if isinstance(body_ty, TypeScheme):
                if tv in body_ty.quantified:
                    # inner quantifier shadows ours; rename it out of the way
                    avoid = set(body_ty.quantified) | {tv}
                    tv2 = fresh_name(tv, avoid)
                    body_ty = TypeScheme(
                        tuple(tv2 if q == tv else q for q in body_ty.quantified),
                        _subst_ty_plain(body_ty.body, tv, TyVar(tv2)),
                    )
                return TypeScheme((tv,) + body_ty.quantified, body_ty.body)
            return TypeScheme((tv,), body_ty)

        case TApp(f, ty_arg):
            fun_ty = typecheck(ctx, f, delta_log)
            if not isinstance(fun_ty, TypeScheme):
                raise TypeCheckError(
                    "not-a-scheme",
                    f"type application of a non-polymorphic value of type {print_type(fun_ty)}",
                    pos=t.pos,
                    actual=fun_ty,
                )
            _wf(ctx, ty_arg, t.pos)
            head, rest = fun_ty.quantified[0], fun_ty.quantified[1:]
            if rest:
                result: Union[Ty, TypeScheme] = subst_ty(
                    TypeScheme(rest, fun_ty.body), head, ty_arg
                )
            else:
                result = subst_ty(fun_ty.body, head, ty_arg)
            _wf(ctx, result, t.pos)
            return result

        case IntLit(_):
            return TyInt()

        case PrimAdd(l, r):
            for side in (l, r):
                side_ty = typecheck(ctx, side, delta_log)
                if not ty_equal(side_ty, TyInt()):
                    raise TypeCheckError(
                        "arg-mismatch",
                        f"'+' expects Int operands, got {print_type(side_ty)}",
                        pos=side.pos,
                        expected=TyInt(),
                        actual=side_ty,
                    )
            return TyInt()

    raise TypeError(t)


def _wf(ctx: TypeContext, ty: Union[Ty, TypeScheme], pos: Optional[Pos]) -> None:
    try:
        wf_type(ctx, ty)
    except IllFormedTypeError as e:
        raise TypeCheckError("ill-formed-type", e.message, pos=pos) from e


def check_program(
    p: SourceProgram, delta_log: Optional[DeltaLog] = None
) -> Dict[str, Union[Ty, TypeScheme]]:
    """Check bindings in order; earlier results are visible to later bindings."""
    results: Dict[str, Union[Ty, TypeScheme]] = {}
    for name, term in p.bindings:
        ctx = TypeContext(tycons=dict(p.tycons), globals=dict(results))
        try:
            results[name] = typecheck(ctx, term, delta_log)
        except TypeCheckError as e:
            e.binding = name
            raise
    return results
