"""Pretty-printer for terms, types and schemes.

Output round-trips through the parser and prints scope records in
canonical field order.
"""

from __future__ import annotations

from typing import Union

from .core import (
    Abs,
    App,
    ClosArrow,
    IntLit,
    PlainArrow,
    PrimAdd,
    Scope,
    TAbs,
    TApp,
    Term,
    Ty,
    TyCon,
    TyInt,
    TypeScheme,
    TyVar,
    Var,
)


def print_type(x: Union[Ty, TypeScheme]) -> str:
    if isinstance(x, TypeScheme):
        prefix = "".join(f"forall '{q}. " for q in x.quantified)
        return prefix + print_type(x.body)
    match x:
        case TyVar(name):
            return f"'{name}"
        case TyInt():
            return "Int"
        case ClosArrow(d, s, c):
            return f"{_arrow_operand(d)} -{_scope_str(s)}-> {print_type(c)}"
        case PlainArrow(d, c):
            return f"{_arrow_operand(d)} -> {print_type(c)}"
        case Scope():
            return _record_str(x)
        case TyCon(name, args):
            if len(args) == 1:
                return f"{_con_arg(args[0])} {name}"
            inner = ", ".join(print_type(a) for a in args)
            return f"({inner}) {name}"
    raise TypeError(x)


def _arrow_operand(t: Ty) -> str:
    if isinstance(t, (ClosArrow, PlainArrow)):
        return f"({print_type(t)})"
    return print_type(t)


def _con_arg(t: Ty) -> str:
    if isinstance(t, (ClosArrow, PlainArrow)):
        return f"({print_type(t)})"
    return print_type(t)


def _scope_str(s: Ty) -> str:
    if isinstance(s, TyVar):
        return f"'{s.name}"
    assert isinstance(s, Scope)
    return _record_str(s)


def _record_str(s: Scope) -> str:
    inner = ", ".join(f"{n}: {print_type(t)}" for n, t in s.entries)
    return "{" + inner + "}"


def print_term(t: Term) -> str:
    match t:
        case Var(name):
            return name
        case IntLit(v):
            return str(v)
        case Abs(param, ty, body):
            return f"\\{param}: {print_type(ty)}. {print_term(body)}"
        case TAbs(tv, body):
            return f"/\\'{tv}. {print_term(body)}"
        case App(f, a):
            return f"{_fun_pos(f)} {_arg_pos(a)}"
        case TApp(f, ty):
            return f"{_fun_pos(f)} [{print_type(ty)}]"
        case PrimAdd(l, r):
            return f"{_add_operand(l, right=False)} + {_add_operand(r, right=True)}"
    raise TypeError(t)


def _fun_pos(t: Term) -> str:
    # application binds tighter than lambda and +
    if isinstance(t, (Abs, TAbs, PrimAdd)):
        return f"({print_term(t)})"
    return print_term(t)


def _arg_pos(t: Term) -> str:
    if isinstance(t, (Abs, TAbs, PrimAdd, App, TApp)):
        return f"({print_term(t)})"
    return print_term(t)


def _add_operand(t: Term, *, right: bool) -> str:
    if isinstance(t, (Abs, TAbs)) or (right and isinstance(t, PrimAdd)):
        return f"({print_term(t)})"
    return print_term(t)
