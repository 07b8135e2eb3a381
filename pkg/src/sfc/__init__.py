"""Closure-typed prenex System F: parser, typechecker, evaluator, compiler."""

from .core import (
    Abs,
    App,
    ClosArrow,
    Closure,
    EMPTY_SCOPE,
    Env,
    IntLit,
    IntVal,
    PlainArrow,
    PrimAdd,
    Scope,
    TAbs,
    TApp,
    Term,
    Ty,
    TyCon,
    TyInt,
    TypeClosure,
    TypeContext,
    TypeScheme,
    TyVar,
    Value,
    Var,
    canonicalize_scope,
    free_type_vars,
    free_vars,
    scheme_equal,
    subst_ty,
    ty_equal,
    wf_type,
)
from .parser import SourceProgram, parse_program, parse_scheme, parse_term, parse_type
from .printer import print_term, print_type
from .typecheck import TypeCheckError, check_program, compute_delta, typecheck
from .interp import eval_program, eval_subst_oracle, eval_term, program_term, values_agree

__all__ = [name for name in dir() if not name.startswith("_")]
