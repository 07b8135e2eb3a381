"""Seeded random generation of closed, well-typed terms of type Int.

Construction is type-directed: applications are built by generating the
argument first and wrapping a lambda whose parameter type matches, so
every produced term typechecks by construction (asserted by callers).
"""

from __future__ import annotations

import random
from typing import List, Tuple

from sfc import (
    Abs,
    App,
    ClosArrow,
    IntLit,
    PrimAdd,
    TAbs,
    TApp,
    Term,
    Ty,
    TyInt,
    TyVar,
    Scope,
    Var,
    free_vars,
)

INT = TyInt()


class TermGen:
    def __init__(self, seed: int) -> None:
        self.rng = random.Random(seed)
        self.counter = 0

    def fresh(self, base: str = "v") -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def closed_int_term(self, depth: int = 6) -> Term:
        return self.int_term([], depth)

    def int_term(self, ctx: List[Tuple[str, Ty]], depth: int) -> Term:
        """A term of type Int under ctx (name, type pairs, innermost last)."""
        rng = self.rng
        int_vars = [n for n, t in ctx if t == INT]
        if depth <= 0:
            if int_vars and rng.random() < 0.5:
                return self._var(rng.choice(int_vars))
            return IntLit(rng.randrange(-9, 10))

        choices = ["lit", "add", "beta", "poly"]
        if int_vars:
            choices += ["var", "var"]
        if any(self._int_callable(t) for _, t in ctx):
            choices += ["call", "call"]
        kind = rng.choice(choices)

        if kind == "lit":
            return IntLit(rng.randrange(-9, 10))
        if kind == "var":
            return self._var(rng.choice(int_vars))
        if kind == "add":
            return PrimAdd(self.int_term(ctx, depth - 1), self.int_term(ctx, depth - 1))
        if kind == "call":
            name, ty = rng.choice([(n, t) for n, t in ctx if self._int_callable(t)])
            term: Term = self._var(name)
            while isinstance(ty, ClosArrow):
                term = App(term, self.int_term(ctx, depth - 1))
                ty = ty.codomain
            return term
        if kind == "poly":
            # (/\'a. \x:'a. x) [Int] <int term>
            tv = self.fresh("a")
            x = self.fresh("x")
            ident = TAbs(tv, Abs(x, TyVar(tv), self._var(x)))
            return App(TApp(ident, INT), self.int_term(ctx, depth - 1))

        # beta: (\x: A. body) arg  -- arg generated first so A is its type
        if rng.random() < 0.5:
            arg: Term = self.int_term(ctx, depth - 1)
            arg_ty: Ty = INT
        else:
            arg, arg_ty = self.fun_term(ctx, depth - 1)
        x = self.fresh("x")
        body = self.int_term(ctx + [(x, arg_ty)], depth - 1)
        return App(Abs(x, arg_ty, body), arg)

    def fun_term(self, ctx: List[Tuple[str, Ty]], depth: int) -> Tuple[Term, Ty]:
        """A lambda together with its checked type (scope included)."""
        x = self.fresh("f")
        if depth > 1 and self.rng.random() < 0.3:
            inner, inner_ty = self.fun_term(ctx + [(x, INT)], depth - 1)
            body: Term = inner
            body_ty: Ty = inner_ty
        else:
            body = self.int_term(ctx + [(x, INT)], depth - 1)
            body_ty = INT
        lam = Abs(x, INT, body)
        entries = []
        bound = dict(ctx)
        for name in sorted(free_vars(lam)):
            entries.append((name, bound[name]))
        return lam, ClosArrow(INT, Scope(tuple(entries)), body_ty)

    @staticmethod
    def _int_callable(ty: Ty) -> bool:
        while isinstance(ty, ClosArrow):
            if ty.domain != INT:
                return False
            ty = ty.codomain
        return ty == INT

    @staticmethod
    def _var(name: str) -> Term:
        return Var(name)
