"""Tokenizer and recursive-descent parser for programs, fact files and delta files.

Grammar::

    rule    := atom ":-" body "." | atom "."
    body    := conj (";" conj)*
    conj    := literal ("," literal)*
    literal := atom | "!" literal | "(" body ")" | "true" | "false"
    atom    := ident "(" term ("," term)* ")"
    term    := Variable | integer | lowercase-ident

``%`` starts a comment that runs to the end of the line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .formula import BOTTOM, TOP, And, Atom, Not, Or, Var

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<if>:-)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[.,;!()+\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def is_variable_name(name: str) -> bool:
    return name[0].isupper() or name[0] == "_"


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.anon = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message, tok=None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{message}, found {found!r}", tok.line, tok.column)

    def accept(self, text) -> Token | None:
        if self.tok.text == text and self.tok.kind != "eof":
            tok = self.tok
            self.pos += 1
            return tok
        return None

    def expect(self, text) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise self.error(f"expected {text!r}")
        return tok

    def at_eof(self) -> bool:
        return self.tok.kind == "eof"

    def term(self, ground: bool):
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return int(tok.text)
        if tok.kind == "ident":
            self.pos += 1
            if is_variable_name(tok.text):
                if ground:
                    raise self.error("facts must be ground", tok)
                if tok.text == "_":
                    self.anon += 1
                    return Var(f"_{self.anon}")
                return Var(tok.text)
            return tok.text
        raise self.error("expected a variable or constant")

    def atom(self, ground: bool = False) -> tuple:
        tok = self.tok
        if tok.kind != "ident" or is_variable_name(tok.text):
            raise self.error("expected a predicate name")
        self.pos += 1
        self.expect("(")
        args = [self.term(ground)]
        while self.accept(","):
            args.append(self.term(ground))
        self.expect(")")
        return Atom(tok.text, args), tok

    def body(self):
        out = self.conj()
        while self.accept(";"):
            out = Or(out, self.conj())
        return out

    def conj(self):
        out = self.literal()
        while self.accept(","):
            out = And(out, self.literal())
        return out

    def literal(self):
        if self.accept("!"):
            return Not(self.literal())
        if self.accept("("):
            inner = self.body()
            self.expect(")")
            return inner
        tok = self.tok
        if tok.kind == "ident" and tok.text in ("true", "false"):
            nxt = self.tokens[self.pos + 1]
            if nxt.text != "(":
                self.pos += 1
                return TOP if tok.text == "true" else BOTTOM
        atom, _ = self.atom()
        return atom


@dataclass(frozen=True)
class SurfaceRule:
    """A rule as written: head atom, body without quantifiers (``None`` for facts)."""

    head: Atom
    body: object
    line: int
    column: int


def parse_rules(text: str) -> list:
    p = _Parser(text)
    rules = []
    while not p.at_eof():
        head, tok = p.atom()
        body = None
        if p.accept(":-"):
            body = p.body()
        p.expect(".")
        rules.append(SurfaceRule(head, body, tok.line, tok.column))
    return rules


def parse_facts(text: str) -> list:
    """Ground atoms ``pred(c1,...,cn).``, returned as ``(pred, args, line)``."""
    p = _Parser(text)
    out = []
    while not p.at_eof():
        atom, tok = p.atom(ground=True)
        p.expect(".")
        out.append((atom.pred, atom.args, tok.line))
    return out


def parse_delta(text: str) -> list:
    """Signed ground atoms ``+pred(...).`` / ``-pred(...).``: ``(sign, pred, args, line)``."""
    p = _Parser(text)
    out = []
    while not p.at_eof():
        sign_tok = p.tok
        if p.accept("+"):
            sign = "+"
        elif p.accept("-"):
            sign = "-"
        else:
            raise p.error("expected '+' or '-'")
        atom, _ = p.atom(ground=True)
        p.expect(".")
        out.append((sign, atom.pred, atom.args, sign_tok.line))
    return out
