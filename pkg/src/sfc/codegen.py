"""Lowering checked programs to C++ with stack-allocated closures.

One capture record struct is emitted per distinct set of captured names in
the program, with generic field types. Every capturing lambda is lifted to
a file-scope function taking its record as first argument; the record
value is built from the enclosing locals at the lambda's definition site.
Capture-free lambdas lift to plain functions wrapped as bare function
pointers. Type abstraction becomes template parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from .core import (
    Abs,
    App,
    ClosArrow,
    IntLit,
    PlainArrow,
    PrimAdd,
    Scope,
    SfcError,
    TAbs,
    TApp,
    Term,
    Ty,
    TyCon,
    TyInt,
    TypeContext,
    TypeScheme,
    TyVar,
    Var,
    free_type_vars,
    free_vars,
)
from .parser import SourceProgram
from .typecheck import check_program, compute_delta, typecheck


class CodegenError(SfcError):
    """Raised for constructs outside the lowerable fragment."""


RUNTIME_HEADER = "closure.hpp"


def mangle(name: str, prefix: str = "ju_") -> str:
    """Injective, deterministic, keyword-safe identifier mangling."""
    out = []
    for ch in name:
        if ch == "_":
            out.append("__")
        elif ch == "'":
            out.append("_prime")
        elif ch.isalnum() and ch.isascii():
            out.append(ch)
        else:
            out.append(f"_u{ord(ch):04x}")
    return prefix + "".join(out)


def _tv(name: str) -> str:
    return mangle(name, prefix="tv_")


@dataclass(frozen=True)
class CaptureRecordDef:
    """One struct per distinct captured-name set; field types are generic."""

    record_id: int
    field_names: Tuple[str, ...]

    @property
    def struct_name(self) -> str:
        return f"closuret_{self.record_id}"


def used_tyvars(t: Term) -> frozenset:
    """Type variables appearing in a term's annotations and type arguments."""
    match t:
        case Var(_) | IntLit(_):
            return frozenset()
        case Abs(_, ty, body):
            return free_type_vars(ty) | used_tyvars(body)
        case App(f, a):
            return used_tyvars(f) | used_tyvars(a)
        case TAbs(tv, body):
            return used_tyvars(body) - {tv}
        case TApp(f, ty):
            return used_tyvars(f) | free_type_vars(ty)
        case PrimAdd(l, r):
            return used_tyvars(l) | used_tyvars(r)
    raise TypeError(t)


class _RecordRegistry:
    def __init__(self) -> None:
        self.by_names: Dict[FrozenSet[str], CaptureRecordDef] = {}
        self.order: List[CaptureRecordDef] = []

    def add(self, names: Tuple[str, ...]) -> Optional[CaptureRecordDef]:
        if not names:
            return None
        key = frozenset(names)
        rec = self.by_names.get(key)
        if rec is None:
            rec = CaptureRecordDef(len(self.order), tuple(sorted(names)))
            self.by_names[key] = rec
            self.order.append(rec)
        return rec

    def scan_type(self, ty: Union[Ty, TypeScheme]) -> None:
        if isinstance(ty, TypeScheme):
            self.scan_type(ty.body)
            return
        match ty:
            case TyVar(_) | TyInt():
                pass
            case ClosArrow(d, s, c):
                self.scan_type(d)
                self.scan_type(s)
                self.scan_type(c)
            case PlainArrow(d, c):
                self.scan_type(d)
                self.scan_type(c)
            case Scope(entries):
                self.add(tuple(n for n, _ in entries))
                for _, t in entries:
                    self.scan_type(t)
            case TyCon(_, args):
                for t in args:
                    self.scan_type(t)


def collect_capture_records(p: SourceProgram) -> List[CaptureRecordDef]:
    """One record per distinct non-empty captured-name set, in first-occurrence
    order; scope record literals in type arguments and annotations count too."""
    types = check_program(p)
    reg = _RecordRegistry()
    done: Dict[str, Union[Ty, TypeScheme]] = {}
    for name, term in p.bindings:
        ctx = TypeContext(tycons=dict(p.tycons), globals=dict(done))
        _walk_records(term, ctx, reg)
        done[name] = types[name]
    return list(reg.order)


def _walk_records(t: Term, ctx: TypeContext, reg: _RecordRegistry) -> None:
    match t:
        case Var(_) | IntLit(_):
            pass
        case Abs(param, ty, body):
            reg.scan_type(ty)
            delta = compute_delta(ctx, t)
            reg.add(delta.names)
            for _, fty in delta.entries:
                reg.scan_type(fty)
            _walk_records(body, ctx.bind(param, ty), reg)
        case App(f, a):
            _walk_records(f, ctx, reg)
            _walk_records(a, ctx, reg)
        case TAbs(tv, body):
            _walk_records(body, ctx.with_tyvar(tv), reg)
        case TApp(f, ty):
            _walk_records(f, ctx, reg)
            reg.scan_type(ty)
        case PrimAdd(l, r):
            _walk_records(l, ctx, reg)
            _walk_records(r, ctx, reg)


@dataclass(frozen=True)
class LoweredProgram:
    records: Tuple[CaptureRecordDef, ...]
    text: str


class _Lowerer:
    def __init__(self, program: SourceProgram) -> None:
        self.program = program
        self.types = check_program(program)
        self.records = collect_capture_records(program)
        self.by_names = {frozenset(r.field_names): r for r in self.records}
        self.counter = 0
        self.pending: List[str] = []  # lifted functions awaiting emission

    # -- types ---------------------------------------------------------------

    def cxx(self, ty: Ty) -> str:
        match ty:
            case TyVar(name):
                return _tv(name)
            case TyInt():
                return "int"
            case ClosArrow(d, s, c):
                return f"rt::function<{self.cxx_scope(s)}, {self.cxx(c)}({self.cxx(d)})>"
            case PlainArrow(d, c):
                return f"{self.cxx(c)}(*)({self.cxx(d)})"
            case Scope(_):
                return self.cxx_scope(ty)
            case TyCon(name, _):
                raise CodegenError(f"type constructor '{name}' has no runtime representation")
        raise TypeError(ty)

    def cxx_scope(self, s: Ty) -> str:
        if isinstance(s, TyVar):
            return _tv(s.name)
        assert isinstance(s, Scope)
        if not s.entries:
            return "void"
        rec = self.by_names.get(frozenset(s.names))
        if rec is None:
            raise CodegenError(f"no capture record collected for scope {s.names}")
        args = ", ".join(self.cxx(t) for _, t in s.entries)
        return f"{rec.struct_name}<{args}>"

    # -- expressions ---------------------------------------------------------

    def lower_expr(self, t: Term, ctx: TypeContext, tyvars: frozenset) -> Tuple[str, Ty]:
        match t:
            case IntLit(v):
                return str(v), TyInt()

            case PrimAdd(l, r):
                lc, _ = self.lower_expr(l, ctx, tyvars)
                rc, _ = self.lower_expr(r, ctx, tyvars)
                return f"({lc} + {rc})", TyInt()

            case Var(name):
                local = ctx.lookup_term(name)
                if local is not None:
                    return mangle(name), local
                gty = self.types.get(name)
                if gty is None:
                    raise CodegenError(f"unbound variable '{name}'")
                if isinstance(gty, TypeScheme):
                    raise CodegenError(
                        f"polymorphic definition '{name}' must be fully instantiated"
                    )
                return f"{mangle(name)}()", gty

            case App(f, a):
                fc, fty = self.lower_expr(f, ctx, tyvars)
                ac, _ = self.lower_expr(a, ctx, tyvars)
                if not isinstance(fty, (ClosArrow, PlainArrow)):
                    raise CodegenError("application of a non-function value")
                return f"{fc}({ac})", fty.codomain

            case TApp(_, _):
                return self.lower_tapp(t, ctx, tyvars)

            case Abs(_, _, _):
                return self.lower_abs(t, ctx, tyvars)

            case TAbs(_, _):
                raise CodegenError("type abstraction must be fully applied in expression position")

        raise TypeError(t)

    def lower_abs(self, t: Abs, ctx: TypeContext, tyvars: frozenset) -> Tuple[str, Ty]:
        delta = compute_delta(ctx, t)
        abs_ty = typecheck(ctx, t)
        assert isinstance(abs_ty, ClosArrow)
        dom, cod = abs_ty.domain, abs_ty.codomain
        tparams = sorted((used_tyvars(t) | free_type_vars(abs_ty)) & tyvars)
        fname = f"lam_{self.counter}"
        self.counter += 1

        body_code, _ = self.lower_expr(t.body, ctx.bind(t.param, dom), frozenset(tparams))

        tmpl = ""
        if tparams:
            tmpl = "template<" + ", ".join(f"typename {_tv(a)}" for a in tparams) + ">\n"
        inst = "<" + ", ".join(_tv(a) for a in tparams) + ">" if tparams else ""
        param = mangle(t.param)
        lines: List[str] = []
        if delta.entries:
            rec_ty = self.cxx_scope(delta)
            sig = f"inline {self.cxx(cod)} {fname}({rec_ty}& env, {self.cxx(dom)} {param})"
            for n, _ in delta.entries:
                lines.append(f"    auto {mangle(n)} = env.{mangle(n)};")
            ctor_args = ", ".join(mangle(n) for n, _ in delta.entries)
            site = (
                f"rt::function<{rec_ty}, {self.cxx(cod)}({self.cxx(dom)})>"
                f"({rec_ty}({ctor_args}), &{fname}{inst})"
            )
        else:
            sig = f"inline {self.cxx(cod)} {fname}({self.cxx(dom)} {param})"
            site = f"rt::function<void, {self.cxx(cod)}({self.cxx(dom)})>(&{fname}{inst})"
        if t.param not in free_vars(t.body):
            lines.append(f"    (void){param};")
        lines.append(f"    return {body_code};")
        self.pending.append(tmpl + sig + " {\n" + "\n".join(lines) + "\n}\n")
        return site, abs_ty

    def lower_tapp(self, t: TApp, ctx: TypeContext, tyvars: frozenset) -> Tuple[str, Ty]:
        args: List[Ty] = []
        head: Term = t
        while isinstance(head, TApp):
            args.append(head.ty_arg)
            head = head.fun
        args.reverse()

        result = typecheck(ctx, t)
        if isinstance(result, TypeScheme):
            raise CodegenError("partial type application cannot be lowered")

        cxx_args = ", ".join(self.cxx_scope(a) if isinstance(a, Scope) else self.cxx(a) for a in args)

        if isinstance(head, Var) and ctx.lookup_term(head.name) is None:
            scheme = self.types.get(head.name)
            if not isinstance(scheme, TypeScheme):
                raise CodegenError(f"type application of non-polymorphic '{head.name}'")
            if len(args) != len(scheme.quantified):
                raise CodegenError(f"'{head.name}' must be fully instantiated")
            return f"{mangle(head.name)}<{cxx_args}>()", result

        if isinstance(head, TAbs):
            own: List[str] = []
            body = head
            while isinstance(body, TAbs):
                own.append(body.tyvar)
                body = body.body
            if len(args) != len(own):
                raise CodegenError("type abstraction must be fully instantiated")
            outer = sorted(used_tyvars(head) & tyvars)
            fname = f"tabs_{self.counter}"
            self.counter += 1
            inner_ctx = TypeContext(
                type_vars=frozenset(outer) | frozenset(own),
                tycons=ctx.tycons,
                globals=ctx.globals,
            )
            body_code, body_ty = self.lower_expr(body, inner_ctx, frozenset(outer) | frozenset(own))
            tmpl_params = ", ".join(f"typename {_tv(a)}" for a in list(outer) + own)
            self.pending.append(
                f"template<{tmpl_params}>\n"
                f"inline {self.cxx(body_ty)} {fname}() {{\n"
                f"    return {body_code};\n"
                f"}}\n"
            )
            site_args = ", ".join([_tv(a) for a in outer] + [self.cxx_scope(a) if isinstance(a, Scope) else self.cxx(a) for a in args])
            return f"{fname}<{site_args}>()", result

        raise CodegenError("type application head must be a definition or a type abstraction")

    # -- program -------------------------------------------------------------

    def lower(self) -> LoweredProgram:
        parts: List[str] = [
            "// Generated code: stack-allocated closure lowering.",
            f'#include "{RUNTIME_HEADER}"',
            "#include <cstdio>",
            "",
        ]
        for rec in self.records:
            parts.append(self._record_def(rec))

        done: Dict[str, Union[Ty, TypeScheme]] = {}
        for name, term in self.program.bindings:
            ctx = TypeContext(tycons=dict(self.program.tycons), globals=dict(done))
            parts.append(self._binding_def(name, term, ctx))
            done[name] = self.types[name]

        main_ty = self.types.get("main")
        if main_ty is not None and main_ty == TyInt():
            parts.append('int main() {\n    std::printf("%d\\n", ju_main());\n    return 0;\n}\n')
        return LoweredProgram(tuple(self.records), "\n".join(parts))

    def _record_def(self, rec: CaptureRecordDef) -> str:
        n = len(rec.field_names)
        tmpl = ", ".join(f"typename T{i + 1}" for i in range(n))
        fields = "\n".join(
            f"    T{i + 1} {mangle(f)};" for i, f in enumerate(rec.field_names)
        )
        ctor_params = ", ".join(f"T{i + 1} init_{mangle(f)}" for i, f in enumerate(rec.field_names))
        inits = ", ".join(f"{mangle(f)}(init_{mangle(f)})" for f in rec.field_names)
        return (
            f"template<{tmpl}>\n"
            f"struct {rec.struct_name} {{\n"
            f"{fields}\n"
            f"    {rec.struct_name}({ctor_params}) : {inits} {{}}\n"
            f"}};\n"
        )

    def _binding_def(self, name: str, term: Term, ctx: TypeContext) -> str:
        own: List[str] = []
        rest = term
        while isinstance(rest, TAbs):
            own.append(rest.tyvar)
            rest = rest.body
        inner_ctx = TypeContext(
            type_vars=frozenset(own), tycons=ctx.tycons, globals=ctx.globals
        )
        code, rest_ty = self.lower_expr(rest, inner_ctx, frozenset(own))
        lifted = "".join(f + "\n" for f in self.pending)
        self.pending = []
        tmpl = ""
        if own:
            tmpl = "template<" + ", ".join(f"typename {_tv(a)}" for a in own) + ">\n"
        return (
            lifted
            + tmpl
            + f"inline {self.cxx(rest_ty)} {mangle(name)}() {{\n"
            + f"    return {code};\n"
            + f"}}\n"
        )


def lower_program(p: SourceProgram) -> LoweredProgram:
    return _Lowerer(p).lower()
