"""Lexer and recursive-descent parser for the surface syntax (.sfc files).

Surface forms: `\\x: T. e` for lambdas, `/\\'a. e` for type abstractions,
`e [T]` for type application, `'a` for type variables, `A -{x: B}-> C` or
`A -'d-> C` for closure arrows, `A -> B` for plain arrows, `forall 'a. T`
for schemes, `let name = e` bindings, `type list/1` constructor
declarations, `#` comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .core import (
    Abs,
    App,
    ClosArrow,
    IntLit,
    MalformedScopeError,
    PlainArrow,
    Pos,
    PrimAdd,
    Scope,
    SfcError,
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


class ParseError(SfcError):
    def __init__(self, message: str, pos: Pos, expected: Tuple[str, ...] = ()) -> None:
        line, col = pos
        super().__init__(f"{line}:{col}: parse error: {message}")
        self.message = message
        self.pos = pos
        self.expected = expected


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: Pos


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<tlambda>/\\)
    | (?P<arrow>->)
    | (?P<int>[0-9]+)
    | (?P<tyvar>'[A-Za-z_][A-Za-z0-9_']*)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    | (?P<sym>[\\.:(){}\[\],=+/-])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"let", "type", "forall", "Int"}


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", (line, col))
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and lexeme in _KEYWORDS:
                kind = lexeme
            elif kind == "sym":
                kind = lexeme
            tokens.append(Token(kind, lexeme, (line, col)))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        i = m.end()
    tokens.append(Token("eof", "", (line, col)))
    return tokens


@dataclass(frozen=True)
class SourceProgram:
    """Declared type constructors plus ordered non-recursive bindings."""

    tycons: Dict[str, int] = field(default_factory=dict)
    bindings: Tuple[Tuple[str, Term], ...] = ()

    @property
    def main(self) -> Optional[Term]:
        for name, term in self.bindings:
            if name == "main":
                return term
        return None


class _Parser:
    def __init__(self, tokens: List[Token]) -> None:
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.cur
        self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        if self.cur.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {self.cur.text or 'end of input'!r}",
                self.cur.pos,
                expected=(kind,),
            )
        return self.advance()

    def at(self, *kinds: str) -> bool:
        return self.cur.kind in kinds

    # -- programs -----------------------------------------------------------

    def program(self) -> SourceProgram:
        tycons: Dict[str, int] = {}
        bindings: List[Tuple[str, Term]] = []
        seen = set()
        while not self.at("eof"):
            if self.at("type"):
                self.advance()
                name = self.expect("ident").text
                self.expect("/")
                arity = int(self.expect("int").text)
                if name in tycons:
                    raise ParseError(f"duplicate type constructor '{name}'", self.cur.pos)
                tycons[name] = arity
            elif self.at("let"):
                self.advance()
                tok = self.expect("ident")
                if tok.text in seen:
                    raise ParseError(f"duplicate binding '{tok.text}'", tok.pos)
                seen.add(tok.text)
                self.expect("=")
                bindings.append((tok.text, self.term()))
            else:
                raise ParseError(
                    f"expected 'let' or 'type', found {self.cur.text!r}",
                    self.cur.pos,
                    expected=("let", "type"),
                )
        return SourceProgram(tycons, tuple(bindings))

    # -- terms --------------------------------------------------------------

    def term(self) -> Term:
        if self.at("\\"):
            pos = self.advance().pos
            param = self.expect("ident").text
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            return Abs(param, ty, self.term(), pos=pos)
        if self.at("tlambda"):
            pos = self.advance().pos
            tv = self.expect("tyvar").text[1:]
            self.expect(".")
            return TAbs(tv, self.term(), pos=pos)
        return self.add_expr()

    def add_expr(self) -> Term:
        left = self.app_expr()
        while self.at("+"):
            pos = self.advance().pos
            left = PrimAdd(left, self.app_expr(), pos=pos)
        return left

    def app_expr(self) -> Term:
        t = self.atom()
        while True:
            if self.at("ident", "int", "("):
                t = App(t, self.atom(), pos=t.pos)
            elif self.at("["):
                self.advance()
                ty = self.type_()
                self.expect("]")
                t = TApp(t, ty, pos=t.pos)
            else:
                return t

    def atom(self) -> Term:
        tok = self.cur
        if self.at("ident"):
            self.advance()
            return Var(tok.text, pos=tok.pos)
        if self.at("int"):
            self.advance()
            return IntLit(int(tok.text), pos=tok.pos)
        if self.at("("):
            self.advance()
            t = self.term()
            self.expect(")")
            return t
        raise ParseError(
            f"expected a term, found {tok.text or 'end of input'!r}",
            tok.pos,
            expected=("ident", "int", "("),
        )

    # -- types --------------------------------------------------------------

    def scheme(self) -> Union[Ty, TypeScheme]:
        quantified: List[str] = []
        while self.at("forall"):
            self.advance()
            quantified.append(self.expect("tyvar").text[1:])
            self.expect(".")
        body = self.type_()
        return TypeScheme(tuple(quantified), body) if quantified else body

    def type_(self) -> Ty:
        left = self.ty_postfix()
        if self.at("arrow"):
            self.advance()
            return PlainArrow(left, self.type_())
        if self.at("-"):
            self.advance()
            scope = self.scope_atom()
            self.expect("arrow")
            return ClosArrow(left, scope, self.type_())
        return left

    def scope_atom(self) -> Ty:
        if self.at("tyvar"):
            return TyVar(self.advance().text[1:])
        if self.at("{"):
            return self.scope_record()
        raise ParseError(
            f"expected a scope (type variable or record), found {self.cur.text!r}",
            self.cur.pos,
            expected=("tyvar", "{"),
        )

    def scope_record(self) -> Scope:
        open_tok = self.expect("{")
        entries: List[Tuple[str, Ty]] = []
        if not self.at("}"):
            while True:
                name = self.expect("ident").text
                self.expect(":")
                entries.append((name, self.type_()))
                if self.at(","):
                    self.advance()
                else:
                    break
        self.expect("}")
        try:
            return Scope(tuple(entries))
        except MalformedScopeError as e:
            raise ParseError(str(e), open_tok.pos) from e

    def ty_postfix(self) -> Ty:
        args = self.ty_atom_group()
        while self.at("ident"):
            name = self.advance().text
            args = [TyCon(name, tuple(args))]
        if len(args) != 1:
            raise ParseError(
                "type tuple must be followed by a type constructor name",
                self.cur.pos,
                expected=("ident",),
            )
        return args[0]

    def ty_atom_group(self) -> List[Ty]:
        if self.at("("):
            self.advance()
            tys = [self.type_()]
            while self.at(","):
                self.advance()
                tys.append(self.type_())
            self.expect(")")
            return tys
        return [self.ty_atom()]

    def ty_atom(self) -> Ty:
        tok = self.cur
        if self.at("tyvar"):
            self.advance()
            return TyVar(tok.text[1:])
        if self.at("Int"):
            self.advance()
            return TyInt()
        if self.at("{"):
            return self.scope_record()
        raise ParseError(
            f"expected a type, found {tok.text or 'end of input'!r}",
            tok.pos,
            expected=("tyvar", "Int", "{", "("),
        )


def _finish(p: _Parser, result):
    if not p.at("eof"):
        raise ParseError(f"unexpected trailing input {p.cur.text!r}", p.cur.pos)
    return result


def parse_program(text: str) -> SourceProgram:
    p = _Parser(tokenize(text))
    return _finish(p, p.program())


def parse_term(text: str) -> Term:
    p = _Parser(tokenize(text))
    return _finish(p, p.term())


def parse_type(text: str) -> Ty:
    p = _Parser(tokenize(text))
    return _finish(p, p.type_())


def parse_scheme(text: str) -> Union[Ty, TypeScheme]:
    p = _Parser(tokenize(text))
    return _finish(p, p.scheme())
