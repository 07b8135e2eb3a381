"""Syntax trees and shared operations for the closure-typed calculus.

Terms, types, scope records, schemes, runtime values and contexts, plus
the structural operations (free variables, substitution, canonicalization,
well-formedness) that every other module builds on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple, Union

Pos = Tuple[int, int]  # (line, col), 1-based


class SfcError(Exception):
    pass


class MalformedScopeError(SfcError):
    """Duplicate field name in a scope record literal."""


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TyVar:
    name: str


@dataclass(frozen=True)
class TyInt:
    pass


@dataclass(frozen=True)
class ClosArrow:
    """Function type carrying its capture type: domain - scope -> codomain."""

    domain: "Ty"
    scope: "Ty"  # TyVar or Scope, enforced by wf_type
    codomain: "Ty"


@dataclass(frozen=True)
class PlainArrow:
    """Non-closure function type; used for bare function pointers in codegen."""

    domain: "Ty"
    codomain: "Ty"


@dataclass(frozen=True)
class Scope:
    """A lexical scope record type: captured names mapped to their types.

    Entries are kept in canonical (lexicographic) order; construction
    canonicalizes and rejects duplicate names.
    """

    entries: Tuple[Tuple[str, "Ty"], ...]

    def __post_init__(self) -> None:
        names = [n for n, _ in self.entries]
        if len(set(names)) != len(names):
            dup = sorted(n for n in names if names.count(n) > 1)[0]
            raise MalformedScopeError(f"duplicate scope field '{dup}'")
        object.__setattr__(self, "entries", tuple(sorted(self.entries)))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def get(self, name: str) -> Optional["Ty"]:
        for n, t in self.entries:
            if n == name:
                return t
        return None


EMPTY_SCOPE = Scope(())


@dataclass(frozen=True)
class TyCon:
    """Application of an opaque declared type constructor, e.g. 'a list."""

    name: str
    args: Tuple["Ty", ...]


Ty = Union[TyVar, TyInt, ClosArrow, PlainArrow, Scope, TyCon]


@dataclass(frozen=True)
class TypeScheme:
    """Prenex quantification over a type: forall a0 ... an. body."""

    quantified: Tuple[str, ...]
    body: Ty

    def __post_init__(self) -> None:
        if len(set(self.quantified)) != len(self.quantified):
            raise SfcError(f"repeated quantifier in scheme: {self.quantified}")


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Abs:
    param: str
    param_ty: Ty
    body: "Term"
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class TAbs:
    tyvar: str
    body: "Term"
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class TApp:
    fun: "Term"
    ty_arg: Ty
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class PrimAdd:
    left: "Term"
    right: "Term"
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)


Term = Union[Var, Abs, App, TAbs, TApp, IntLit, PrimAdd]


def is_pure(t: Term) -> bool:
    """True when the term stays inside the base calculus (no int plumbing)."""
    match t:
        case Var():
            return True
        case Abs(_, _, body):
            return is_pure(body)
        case App(f, a):
            return is_pure(f) and is_pure(a)
        case TAbs(_, body):
            return is_pure(body)
        case TApp(f, _):
            return is_pure(f)
        case IntLit() | PrimAdd():
            return False
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Runtime values and environments


@dataclass(frozen=True)
class Closure:
    """A lambda paired with the snapshot of its captured bindings."""

    param: str
    body: Term
    captured: "Env"


@dataclass(frozen=True)
class TypeClosure:
    """A type abstraction value; the type binder is erased."""

    body: Term


@dataclass(frozen=True)
class IntVal:
    value: int


Value = Union[Closure, TypeClosure, IntVal]


class Env:
    """Immutable name -> Value map with innermost-binding-wins extension."""

    __slots__ = ("_items",)

    def __init__(self, items: Optional[Mapping[str, Value]] = None) -> None:
        self._items: dict = dict(items) if items else {}

    def lookup(self, name: str) -> Optional[Value]:
        return self._items.get(name)

    def extend(self, name: str, value: Value) -> "Env":
        new = Env(self._items)
        new._items[name] = value
        return new

    def restrict(self, names) -> "Env":
        return Env({n: v for n, v in self._items.items() if n in names})

    def domain(self) -> frozenset:
        return frozenset(self._items)

    def __contains__(self, name: str) -> bool:
        return name in self._items

    def __repr__(self) -> str:
        return f"Env({sorted(self._items)})"


# ---------------------------------------------------------------------------
# Typing contexts


@dataclass(frozen=True)
class TypeContext:
    """Type variables in scope plus term bindings (innermost-wins).

    `tycons` records declared opaque constructors (name -> arity) and
    `globals` holds the types of earlier top-level bindings, which are
    consulted by variable lookup but never captured into scope records.
    """

    type_vars: frozenset = frozenset()
    term_vars: Tuple[Tuple[str, Ty], ...] = ()
    tycons: Mapping[str, int] = field(default_factory=dict)
    globals: Mapping[str, Union[Ty, TypeScheme]] = field(default_factory=dict)

    def with_tyvar(self, name: str) -> "TypeContext":
        return TypeContext(self.type_vars | {name}, self.term_vars, self.tycons, self.globals)

    def bind(self, name: str, ty: Ty) -> "TypeContext":
        return TypeContext(self.type_vars, self.term_vars + ((name, ty),), self.tycons, self.globals)

    def lookup_term(self, name: str) -> Optional[Ty]:
        for n, t in reversed(self.term_vars):
            if n == name:
                return t
        return None

    def lookup(self, name: str) -> Optional[Union[Ty, TypeScheme]]:
        local = self.lookup_term(name)
        if local is not None:
            return local
        return self.globals.get(name)


# ---------------------------------------------------------------------------
# Free variables


def free_vars(t: Term) -> frozenset:
    """Free term variables of t. Type annotations contribute nothing."""
    match t:
        case Var(name):
            return frozenset({name})
        case Abs(param, _, body):
            return free_vars(body) - {param}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case TAbs(_, body):
            return free_vars(body)
        case TApp(f, _):
            return free_vars(f)
        case IntLit(_):
            return frozenset()
        case PrimAdd(l, r):
            return free_vars(l) | free_vars(r)
    raise TypeError(t)


def free_type_vars(x: Union[Ty, TypeScheme]) -> frozenset:
    if isinstance(x, TypeScheme):
        return free_type_vars(x.body) - set(x.quantified)
    match x:
        case TyVar(name):
            return frozenset({name})
        case TyInt():
            return frozenset()
        case ClosArrow(d, s, c):
            return free_type_vars(d) | free_type_vars(s) | free_type_vars(c)
        case PlainArrow(d, c):
            return free_type_vars(d) | free_type_vars(c)
        case Scope(entries):
            out: frozenset = frozenset()
            for _, t in entries:
                out |= free_type_vars(t)
            return out
        case TyCon(_, args):
            out = frozenset()
            for t in args:
                out |= free_type_vars(t)
            return out
    raise TypeError(x)


# ---------------------------------------------------------------------------
# Substitution


def fresh_name(base: str, avoid) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def subst_ty(x: Union[Ty, TypeScheme], var: str, replacement: Ty) -> Union[Ty, TypeScheme]:
    """Capture-avoiding type substitution x[var := replacement].

    Types themselves contain no binders (prenex), so only the scheme case
    has to alpha-rename quantifiers that would capture free variables of
    the replacement.
    """
    if isinstance(x, TypeScheme):
        if var in x.quantified:
            return x
        if var not in free_type_vars(x.body):
            return x
        repl_ftv = free_type_vars(replacement)
        quantified = list(x.quantified)
        body = x.body
        avoid = repl_ftv | free_type_vars(body) | {var}
        for i, q in enumerate(quantified):
            if q in repl_ftv:
                q2 = fresh_name(q, avoid)
                avoid = avoid | {q2}
                body = _subst_ty_plain(body, q, TyVar(q2))
                quantified[i] = q2
        return TypeScheme(tuple(quantified), _subst_ty_plain(body, var, replacement))
    return _subst_ty_plain(x, var, replacement)


def _subst_ty_plain(ty: Ty, var: str, replacement: Ty) -> Ty:
    match ty:
        case TyVar(name):
            return replacement if name == var else ty
        case TyInt():
            return ty
        case ClosArrow(d, s, c):
            return ClosArrow(
                _subst_ty_plain(d, var, replacement),
                _subst_ty_plain(s, var, replacement),
                _subst_ty_plain(c, var, replacement),
            )
        case PlainArrow(d, c):
            return PlainArrow(_subst_ty_plain(d, var, replacement), _subst_ty_plain(c, var, replacement))
        case Scope(entries):
            return Scope(tuple((n, _subst_ty_plain(t, var, replacement)) for n, t in entries))
        case TyCon(name, args):
            return TyCon(name, tuple(_subst_ty_plain(t, var, replacement) for t in args))
    raise TypeError(ty)


# ---------------------------------------------------------------------------
# Equality and canonicalization


def ty_equal(a: Ty, b: Ty) -> bool:
    """Structural equality; scope records compare as canonical name->type maps."""
    return a == b


def scheme_equal(a: Union[Ty, TypeScheme], b: Union[Ty, TypeScheme]) -> bool:
    """Equality of schemes up to alpha-renaming of their quantifiers."""
    if isinstance(a, TypeScheme) != isinstance(b, TypeScheme):
        return False
    if not isinstance(a, TypeScheme):
        return ty_equal(a, b)
    if len(a.quantified) != len(b.quantified):
        return False
    return _alpha_normal(a) == _alpha_normal(b)


def _alpha_normal(s: TypeScheme) -> TypeScheme:
    body = s.body
    fresh = tuple(f"%{i}" for i in range(len(s.quantified)))
    for q, f in zip(s.quantified, fresh):
        body = _subst_ty_plain(body, q, TyVar(f))
    return TypeScheme(fresh, body)


def canonicalize_scope(s: Scope) -> Scope:
    """Identity on already-canonical scopes; Scope construction sorts entries."""
    return Scope(s.entries)


# ---------------------------------------------------------------------------
# Well-formedness


class IllFormedTypeError(SfcError):
    def __init__(self, message: str, pos: Optional[Pos] = None) -> None:
        super().__init__(message)
        self.message = message
        self.pos = pos


def wf_type(ctx: TypeContext, x: Union[Ty, TypeScheme]) -> None:
    """Check a type against the grammar: raises IllFormedTypeError on failure.

    Enforces that type variables are in scope, that the scope slot of a
    closure arrow is a type variable or a scope record, and that declared
    constructors are applied at their declared arity.
    """
    if isinstance(x, TypeScheme):
        inner = ctx
        for q in x.quantified:
            inner = inner.with_tyvar(q)
        wf_type(inner, x.body)
        return
    match x:
        case TyVar(name):
            if name not in ctx.type_vars:
                raise IllFormedTypeError(f"unbound type variable '{name}'")
        case TyInt():
            pass
        case ClosArrow(d, s, c):
            wf_type(ctx, d)
            if not isinstance(s, (TyVar, Scope)):
                raise IllFormedTypeError(
                    "scope position of a closure arrow must be a type variable or a scope record"
                )
            wf_type(ctx, s)
            wf_type(ctx, c)
        case PlainArrow(d, c):
            wf_type(ctx, d)
            wf_type(ctx, c)
        case Scope(entries):
            for _, t in entries:
                wf_type(ctx, t)
        case TyCon(name, args):
            arity = ctx.tycons.get(name)
            if arity is None:
                raise IllFormedTypeError(f"undeclared type constructor '{name}'")
            if arity != len(args):
                raise IllFormedTypeError(
                    f"type constructor '{name}' expects {arity} argument(s), got {len(args)}"
                )
            for t in args:
                wf_type(ctx, t)
        case _:
            raise TypeError(x)
