"""Parsed expression language for filter and derive steps.

The language is deliberately closed: literals, column references,
arithmetic, comparisons, boolean connectives, and a fixed set of
functions. Expressions are type-checked against the pipeline schema when
a spec binds, so evaluation never raises type errors. Null propagates
through arithmetic and comparisons (SQL-style three-valued logic for the
connectives); ``is_valid`` is the only null-observing function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from .errors import ExpressionError
from .tabular import AttributeType, temporal_year

# Static expression types assigned at bind time.
NUM = "number"
STR = "string"
BOOL = "boolean"
DATE = "date"

# Name -> (arity, aggregate-only). Aggregate functions are parsed here for
# completeness but are only legal inside rollup aggregates, which the
# pipeline represents structurally, so binding rejects them in row context.
FUNCTIONS: dict[str, tuple[int, bool]] = {
    "count": (0, True),
    "sum": (1, True),
    "mean": (1, True),
    "min": (1, True),
    "max": (1, True),
    "rank": (0, False),
    "year": (1, False),
    "isValid": (1, False),
}


@dataclass(frozen=True)
class Literal:
    value: Any  # int | float | str | bool


@dataclass(frozen=True)
class Column:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "!"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Literal | Column | Unary | Binary | Call


# ---------------------------------------------------------------------------
# Tokenizer

_TWO_CHAR = ("==", "!=", "<=", ">=", "&&", "||")
_ONE_CHAR = "+-*/<>!(),"


@dataclass(frozen=True)
class _Token:
    kind: str  # num | str | ident | backtick | op | punct | eof
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if source[i : i + 2] in _TWO_CHAR:
            tokens.append(_Token("op", source[i : i + 2], i))
            i += 2
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                seen_dot = seen_dot or source[j] == "."
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            tokens.append(_Token("num", source[i:j], i))
            i = j
            continue
        if c in "'\"":
            j = i + 1
            buf = []
            while j < n and source[j] != c:
                if source[j] == "\\" and j + 1 < n:
                    buf.append(source[j + 1])
                    j += 2
                else:
                    buf.append(source[j])
                    j += 1
            if j >= n:
                raise ExpressionError("unterminated string literal", i)
            tokens.append(_Token("str", "".join(buf), i))
            i = j + 1
            continue
        if c == "`":
            j = source.find("`", i + 1)
            if j < 0:
                raise ExpressionError("unterminated backtick name", i)
            name = source[i + 1 : j]
            if not name:
                raise ExpressionError("empty backtick name", i)
            tokens.append(_Token("backtick", name, i))
            i = j + 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], i))
            i = j
            continue
        if c in _ONE_CHAR:
            kind = "punct" if c in "()," else "op"
            tokens.append(_Token(kind, c, i))
            i += 1
            continue
        raise ExpressionError(f"unexpected character {c!r}", i)
    tokens.append(_Token("eof", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser: precedence climbing; higher binds tighter.

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.advance()
        if tok.text != text:
            raise ExpressionError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.offset)

    def parse(self) -> Expr:
        expr = self.parse_binary(1)
        tok = self.peek()
        if tok.kind != "eof":
            raise ExpressionError(f"unexpected trailing input {tok.text!r}", tok.offset)
        return expr

    def parse_binary(self, min_prec: int) -> Expr:
        left = self.parse_unary()
        while True:
            tok = self.peek()
            prec = _PRECEDENCE.get(tok.text) if tok.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.parse_binary(prec + 1)  # all binaries left-associative
            left = Binary(tok.text, left, right)

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("!", "-"):
            self.advance()
            return Unary(tok.text, self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            text = tok.text
            if "." in text or "e" in text or "E" in text:
                return Literal(float(text))
            return Literal(int(text))
        if tok.kind == "str":
            return Literal(tok.text)
        if tok.kind == "backtick":
            return Column(tok.text)
        if tok.kind == "punct" and tok.text == "(":
            inner = self.parse_binary(1)
            self.expect(")")
            return inner
        if tok.kind == "ident":
            if tok.text == "true":
                return Literal(True)
            if tok.text == "false":
                return Literal(False)
            if self.peek().text == "(":
                return self.parse_call(tok)
            return Column(tok.text)
        raise ExpressionError(f"unexpected token {tok.text or 'end of input'!r}", tok.offset)

    def parse_call(self, name_tok: _Token) -> Expr:
        if name_tok.text not in FUNCTIONS:
            raise ExpressionError(f"unknown function {name_tok.text!r}", name_tok.offset)
        self.expect("(")
        args: list[Expr] = []
        if self.peek().text != ")":
            args.append(self.parse_binary(1))
            while self.peek().text == ",":
                self.advance()
                args.append(self.parse_binary(1))
        self.expect(")")
        arity = FUNCTIONS[name_tok.text][0]
        if len(args) != arity:
            raise ExpressionError(
                f"{name_tok.text} takes {arity} argument(s), got {len(args)}", name_tok.offset
            )
        return Call(name_tok.text, tuple(args))


def parse_expression(source: str) -> Expr:
    """Parse source text into an expression tree.

    Precedence, loosest to tightest: || < && < comparisons < + - < * / <
    unary. Column references are bare identifiers or backtick-quoted names.
    """
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Binder

_ATTR_STATIC = {
    AttributeType.QUANTITATIVE: NUM,
    AttributeType.NOMINAL: STR,
    AttributeType.ORDINAL: STR,
    AttributeType.TEMPORAL: DATE,
}

_COMPARABLE = {NUM, STR, DATE}


def bind_expression(expr: Expr, schema: Mapping[str, AttributeType], *, rank_ok: bool = False) -> str:
    """Type-check ``expr`` against the attribute types in scope.

    Returns the expression's static type. ``rank_ok`` marks a filter step
    that follows an orderby, the only place rank() is legal.
    """
    if isinstance(expr, Literal):
        if isinstance(expr.value, bool):
            return BOOL
        return NUM if isinstance(expr.value, (int, float)) else STR
    if isinstance(expr, Column):
        if expr.name not in schema:
            raise ExpressionError(f"unknown attribute {expr.name!r}")
        return _ATTR_STATIC[schema[expr.name]]
    if isinstance(expr, Unary):
        inner = bind_expression(expr.operand, schema, rank_ok=rank_ok)
        if expr.op == "-":
            if inner != NUM:
                raise ExpressionError(f"unary - needs a number, got {inner}")
            return NUM
        if inner != BOOL:
            raise ExpressionError(f"! needs a boolean, got {inner}")
        return BOOL
    if isinstance(expr, Binary):
        left = bind_expression(expr.left, schema, rank_ok=rank_ok)
        right = bind_expression(expr.right, schema, rank_ok=rank_ok)
        op = expr.op
        if op in ("+", "-", "*", "/"):
            if left != NUM or right != NUM:
                raise ExpressionError(f"{op} needs numbers, got {left} and {right}")
            return NUM
        if op in ("&&", "||"):
            if left != BOOL or right != BOOL:
                raise ExpressionError(f"{op} needs booleans, got {left} and {right}")
            return BOOL
        # comparisons
        if left != right:
            raise ExpressionError(f"{op} compares mixed types {left} and {right}")
        if op in ("==", "!="):
            return BOOL
        if left not in _COMPARABLE:
            raise ExpressionError(f"{op} cannot order {left} values")
        return BOOL
    if isinstance(expr, Call):
        _, aggregate_only = FUNCTIONS[expr.name]
        if aggregate_only:
            raise ExpressionError(f"{expr.name}() is an aggregate and only legal in a rollup step")
        if expr.name == "rank":
            if not rank_ok:
                raise ExpressionError("rank() is only legal in a filter step that follows an orderby")
            return NUM
        if expr.name == "year":
            if bind_expression(expr.args[0], schema, rank_ok=rank_ok) != DATE:
                raise ExpressionError("year() needs a temporal argument")
            return NUM
        # isValid accepts any operand type and observes nullness directly
        bind_expression(expr.args[0], schema, rank_ok=rank_ok)
        return BOOL
    raise ExpressionError(f"unexpected node {expr!r}")


# ---------------------------------------------------------------------------
# Evaluator

@dataclass(frozen=True)
class EvalContext:
    """Per-row evaluation context; ``rank`` is the 1-based position of the
    row in the post-orderby order, available only inside such filters."""

    rank: int | None = None


def eval_expression(expr: Expr, row: Mapping[str, Any], context: EvalContext | None = None) -> Any:
    """Evaluate a bound expression against one row. Pure.

    Null propagates through arithmetic and comparisons; && and || follow
    three-valued logic; division by zero yields null.
    """
    ctx = context or EvalContext()
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Column):
        return row.get(expr.name)
    if isinstance(expr, Unary):
        v = eval_expression(expr.operand, row, ctx)
        if v is None:
            return None
        return -v if expr.op == "-" else (not v)
    if isinstance(expr, Binary):
        op = expr.op
        left = eval_expression(expr.left, row, ctx)
        if op == "&&":
            right = eval_expression(expr.right, row, ctx)
            if left is False or right is False:
                return False
            if left is None or right is None:
                return None
            return True
        if op == "||":
            right = eval_expression(expr.right, row, ctx)
            if left is True or right is True:
                return True
            if left is None or right is None:
                return None
            return False
        right = eval_expression(expr.right, row, ctx)
        if left is None or right is None:
            return None
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            return None if right == 0 else left / right
        return _COMPARE[op](left, right)
    if isinstance(expr, Call):
        if expr.name == "rank":
            return ctx.rank
        if expr.name == "isValid":
            return eval_expression(expr.args[0], row, ctx) is not None
        if expr.name == "year":
            v = eval_expression(expr.args[0], row, ctx)
            return None if v is None else temporal_year(v)
        raise ExpressionError(f"{expr.name}() cannot be evaluated per row")
    raise ExpressionError(f"unexpected node {expr!r}")


_COMPARE: dict[str, Callable[[Any, Any], bool]] = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


# ---------------------------------------------------------------------------
# Unparser: canonical text form used by the JSON interchange format.

_IDENT_OK = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def format_expression(expr: Expr) -> str:
    """Render an expression back to parseable source text.

    parse(format(e)) reproduces the tree exactly; parentheses are inserted
    only where precedence requires them.
    """
    return _format(expr, 0)


def _format(expr: Expr, parent_prec: int) -> str:
    if isinstance(expr, Literal):
        if isinstance(expr.value, bool):
            return "true" if expr.value else "false"
        if isinstance(expr.value, str):
            escaped = expr.value.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return repr(expr.value)
    if isinstance(expr, Column):
        if _IDENT_OK.match(expr.name) and expr.name not in ("true", "false") and expr.name not in FUNCTIONS:
            return expr.name
        return f"`{expr.name}`"
    if isinstance(expr, Unary):
        text = f"{expr.op}{_format(expr.operand, 6)}"
        return text
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        left = _format(expr.left, prec)
        right = _format(expr.right, prec + 1)
        text = f"{left} {expr.op} {right}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(expr, Call):
        args = ", ".join(_format(a, 0) for a in expr.args)
        return f"{expr.name}({args})"
    raise ExpressionError(f"unexpected node {expr!r}")


def referenced_columns(expr: Expr) -> set[str]:
    """All column names the expression reads."""
    if isinstance(expr, Column):
        return {expr.name}
    if isinstance(expr, Unary):
        return referenced_columns(expr.operand)
    if isinstance(expr, Binary):
        return referenced_columns(expr.left) | referenced_columns(expr.right)
    if isinstance(expr, Call):
        out: set[str] = set()
        for a in expr.args:
            out |= referenced_columns(a)
        return out
    return set()
