"""Expression grammar: tokenizer, precedence-climbing parser and printer."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

import sympy as sp

from ..const import IMAGINARY_UNIT, LOG_FUNCTION
from ..exceptions import (
    ExpressionParseError,
    UnknownVariableError,
    ZeroDenominatorError,
)
from .expr import FULL_CTX

if TYPE_CHECKING:
    from ..models import VarCtx

LOGGER = logging.getLogger(__name__)

# Operator groups in increasing binding power.
OPERATORS = [
    [("+", "left"), ("-", "left")],
    [("*", "left"), ("/", "left")],
    [("^", "right")],
]
OPERATOR_PREC = {
    name: idx for idx, group in enumerate(OPERATORS) for name, _ in group
}
OPERATOR_ASSOC = {name: assoc for group in OPERATORS for name, assoc in group}
POWER_PREC = OPERATOR_PREC["^"]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    """Lexical token with its source offset."""

    kind: str
    value: str
    position: int


def tokenize(text: str) -> list[Token]:
    """Split expression text into tokens."""
    tokens: list[Token] = []
    position = 0
    while position < len(text):
        if text[position:].isspace():
            break
        match = _TOKEN_RE.match(text, position)
        if match is None:
            offset = position + len(text[position:]) - len(text[position:].lstrip())
            msg = f"unexpected character {text[offset]!r}"
            raise ExpressionParseError(msg, text, offset)
        kind = match.lastgroup or ""
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    return tokens


class _Parser:
    """Precedence climbing over a token list."""

    def __init__(self, text: str, ctx: VarCtx) -> None:
        self._text = text
        self._tokens = tokenize(text)
        self._index = 0
        self._symbols = {name: sp.Symbol(name) for name in ctx.names}

    def parse(self) -> sp.Expr:
        if not self._tokens:
            raise ExpressionParseError("empty expression", self._text, 0)
        result = self._climb(0)
        if self._index < len(self._tokens):
            token = self._tokens[self._index]
            msg = f"unexpected token {token.value!r}"
            raise ExpressionParseError(msg, self._text, token.position)
        return result

    def _peek(self) -> Token | None:
        if self._index < len(self._tokens):
            return self._tokens[self._index]
        return None

    def _next(self) -> Token:
        token = self._peek()
        if token is None:
            msg = "unexpected end of input"
            raise ExpressionParseError(msg, self._text, len(self._text))
        self._index += 1
        return token

    def _expect(self, value: str) -> None:
        token = self._next()
        if token.value != value:
            msg = f"expected {value!r}, found {token.value!r}"
            raise ExpressionParseError(msg, self._text, token.position)

    def _climb(self, min_prec: int) -> sp.Expr:
        lhs = self._atom()
        while (token := self._peek()) is not None and token.value in OPERATOR_PREC:
            prec = OPERATOR_PREC[token.value]
            if prec < min_prec:
                break
            self._next()
            next_prec = prec + 1 if OPERATOR_ASSOC[token.value] == "left" else prec
            rhs = self._climb(next_prec)
            lhs = self._apply(token, lhs, rhs)
        return lhs

    def _apply(self, token: Token, lhs: sp.Expr, rhs: sp.Expr) -> sp.Expr:
        if token.value == "+":
            return lhs + rhs
        if token.value == "-":
            return lhs - rhs
        if token.value == "*":
            return lhs * rhs
        if token.value == "/":
            if rhs == 0:
                msg = "division by zero"
                raise ZeroDenominatorError(msg)
            return lhs / rhs
        if not rhs.is_Integer:
            msg = "exponent must be an integer"
            raise ExpressionParseError(msg, self._text, token.position)
        if lhs == 0 and rhs < 0:
            msg = "zero to a negative power"
            raise ZeroDenominatorError(msg)
        return lhs**rhs

    def _atom(self) -> sp.Expr:
        token = self._next()
        if token.value == "-":
            return -self._climb(POWER_PREC)
        if token.value == "(":
            inner = self._climb(0)
            self._expect(")")
            return inner
        if token.kind == "num":
            return sp.Integer(token.value)
        if token.kind == "name":
            return self._name(token)
        msg = f"unexpected token {token.value!r}"
        raise ExpressionParseError(msg, self._text, token.position)

    def _name(self, token: Token) -> sp.Expr:
        following = self._peek()
        if following is not None and following.value == "(":
            if token.value != LOG_FUNCTION:
                msg = f"unknown function {token.value!r}"
                raise ExpressionParseError(msg, self._text, token.position)
            self._next()
            argument = self._climb(0)
            self._expect(")")
            return sp.log(argument, evaluate=False)
        if token.value == IMAGINARY_UNIT:
            return sp.I
        if token.value in self._symbols:
            return self._symbols[token.value]
        msg = f"unknown variable {token.value!r}"
        raise UnknownVariableError(msg, self._text, token.position)


def parse(text: str, ctx: VarCtx = FULL_CTX) -> sp.Expr:
    """
    Parse expression text under a variable context.

    >>> parse("qd^2/2")
    qd**2/2
    >>> parse("i*x^2/2 - t/2")
    I*x**2/2 - t/2
    """
    LOGGER.debug("Parsing %s", text)
    return _Parser(text, ctx).parse()


def to_text(e: sp.Expr) -> str:
    """Render an expression in the input grammar."""
    rendered = sp.sstr(e, order="grlex")
    rendered = rendered.replace("**", "^")
    return re.sub(r"\bI\b", IMAGINARY_UNIT, rendered)
