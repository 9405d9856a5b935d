"""Expression and system-file parsing.

Expression grammar (recursive descent, first error aborts with position):

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)?          # binds tighter than unary '-'
    exponent := ['-'] INT | '(' ['-'] INT ')'
    atom     := INT | IDENT | '(' expr ')' | 'log' '(' expr ')'

Implicit multiplication is rejected; ``log`` is accepted only where a
log-combination integral is expected.  System files are UTF-8 and
line-oriented: one ``key: value`` pair per line, ``#`` starts a comment.

    name: <string>
    variables: <id>, <id>, <id>
    v: <expr>; <expr>; <expr>
    u: <expr>; <expr>; <expr>          # optional
    w: <expr>; <expr>; <expr>          # optional
    integral <name>: <sum of c*log(f) and rational terms>   # optional, repeatable
    multiplier: <expr>                 # optional
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import DEFAULT_CHART, RationalFunction
from .calculus import LogIntegral


class ParseError(Exception):
    """Lexical or syntactic failure, carrying a 1-based position."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Log:
    argument: "Expr"


Expr = Num | Var | Neg | BinOp | Pow | Log


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_OPERATORS = set("+-*/^();,:")


@dataclass(frozen=True)
class _Token:
    kind: str  # "int" | "ident" | "op" | "end"
    text: str
    line: int
    column: int


def _tokenize(text: str, line_offset: int = 1) -> list[_Token]:
    tokens: list[_Token] = []
    line, column = line_offset, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
            continue
        if ch.isspace():
            column += 1
            i += 1
            continue
        if ch.isdigit():
            start = i
            start_col = column
            while i < len(text) and text[i].isdigit():
                i += 1
                column += 1
            tokens.append(_Token("int", text[start:i], line, start_col))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            start_col = column
            while i < len(text) and (text[i].isalnum() or text[i] == "_"):
                i += 1
                column += 1
            tokens.append(_Token("ident", text[start:i], line, start_col))
            continue
        if ch in _OPERATORS:
            tokens.append(_Token("op", ch, line, column))
            i += 1
            column += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, column)
    tokens.append(_Token("end", "", line, column))
    return tokens


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token], variables: Sequence[str], allow_log: bool):
        self.tokens = tokens
        self.pos = 0
        self.variables = tuple(variables)
        self.allow_log = allow_log

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> _Token:
        token = self.peek()
        if token.kind == "op" and token.text == text:
            return self.advance()
        raise ParseError(f"expected {text!r}, found {token.text or 'end of input'}",
                         token.line, token.column)

    def at_op(self, *symbols: str) -> bool:
        token = self.peek()
        return token.kind == "op" and token.text in symbols

    # grammar rules ----------------------------------------------------

    def expr(self) -> Expr:
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        token = self.peek()
        if self.at_op("("):
            self.advance()
            value = self.exponent()
            self.expect(")")
            return value
        sign = 1
        if self.at_op("-"):
            self.advance()
            sign = -1
        token = self.peek()
        if token.kind != "int":
            raise ParseError(
                f"exponent must be an integer, found {token.text or 'end of input'}",
                token.line, token.column)
        self.advance()
        return sign * int(token.text)

    def atom(self) -> Expr:
        token = self.peek()
        if token.kind == "int":
            self.advance()
            return Num(int(token.text))
        if token.kind == "ident":
            self.advance()
            if token.text == "log":
                if not self.allow_log:
                    raise ParseError("log is only allowed in integral expressions",
                                     token.line, token.column)
                if not self.at_op("("):
                    raise ParseError("log takes exactly one parenthesised argument",
                                     token.line, token.column)
                self.advance()
                argument = self.expr()
                if self.at_op(","):
                    comma = self.peek()
                    raise ParseError("log takes exactly one argument",
                                     comma.line, comma.column)
                self.expect(")")
                return Log(argument)
            if token.text not in self.variables:
                raise ParseError(
                    f"unknown identifier {token.text!r}; variables are "
                    f"{', '.join(self.variables)}",
                    token.line, token.column)
            return Var(token.text)
        if self.at_op("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"expected an expression, found {token.text or 'end of input'}",
                         token.line, token.column)


def _parse_tokens(tokens: list[_Token], variables: Sequence[str], allow_log: bool) -> Expr:
    parser = _Parser(tokens, variables, allow_log)
    node = parser.expr()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ParseError(f"unexpected trailing input {trailing.text!r}",
                         trailing.line, trailing.column)
    return node


def parse_expr(text: str, variables: Sequence[str] = DEFAULT_CHART,
               allow_log: bool = False, line_offset: int = 1) -> Expr:
    if not text.strip():
        raise ParseError("empty expression", line_offset, 1)
    return _parse_tokens(_tokenize(text, line_offset), variables, allow_log)


# ---------------------------------------------------------------------------
# AST -> values
# ---------------------------------------------------------------------------


def to_rational(node: Expr, variables: Sequence[str] = DEFAULT_CHART) -> RationalFunction:
    variables = tuple(variables)
    if isinstance(node, Num):
        return RationalFunction.const(node.value, variables)
    if isinstance(node, Var):
        return RationalFunction.var(node.name, variables)
    if isinstance(node, Neg):
        return -to_rational(node.operand, variables)
    if isinstance(node, Pow):
        return to_rational(node.base, variables) ** node.exponent
    if isinstance(node, BinOp):
        left = to_rational(node.left, variables)
        right = to_rational(node.right, variables)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        return left / right
    raise ParseError("log is only allowed in integral expressions")


def parse_rational(text: str, variables: Sequence[str] = DEFAULT_CHART) -> RationalFunction:
    return to_rational(parse_expr(text, variables), variables)


def _contains_log(node: Expr) -> bool:
    if isinstance(node, Log):
        return True
    if isinstance(node, Neg):
        return _contains_log(node.operand)
    if isinstance(node, Pow):
        return _contains_log(node.base)
    if isinstance(node, BinOp):
        return _contains_log(node.left) or _contains_log(node.right)
    return False


def to_log_integral(node: Expr, variables: Sequence[str] = DEFAULT_CHART) -> LogIntegral:
    """Interpret an AST as rational part plus constant multiples of logs."""
    variables = tuple(variables)
    rational = RationalFunction.const(0, variables)
    logs: list[tuple[Fraction, RationalFunction]] = []

    def collect(n: Expr, scale: Fraction) -> None:
        nonlocal rational
        if not _contains_log(n):
            rational = rational + to_rational(n, variables) * scale
            return
        if isinstance(n, Log):
            logs.append((scale, to_rational(n.argument, variables)))
            return
        if isinstance(n, Neg):
            collect(n.operand, -scale)
            return
        if isinstance(n, BinOp) and n.op in "+-":
            collect(n.left, scale)
            collect(n.right, scale if n.op == "+" else -scale)
            return
        if isinstance(n, BinOp) and n.op == "*":
            for constant, logish in ((n.left, n.right), (n.right, n.left)):
                if not _contains_log(constant):
                    value = to_rational(constant, variables)
                    if value.is_constant():
                        collect(logish, scale * value.constant_value())
                        return
            raise ParseError("log may only be scaled by rational constants")
        if isinstance(n, BinOp) and n.op == "/" and not _contains_log(n.right):
            value = to_rational(n.right, variables)
            if value.is_constant() and value.constant_value() != 0:
                collect(n.left, scale / value.constant_value())
                return
            raise ParseError("log may only be divided by nonzero constants")
        raise ParseError("log terms must enter linearly, as c*log(f)")

    collect(node, Fraction(1))
    merged: dict[RationalFunction, Fraction] = {}
    order: list[RationalFunction] = []
    for coeff, argument in logs:
        if argument not in merged:
            merged[argument] = Fraction(0)
            order.append(argument)
        merged[argument] += coeff
    return LogIntegral(rational, [(merged[a], a) for a in order if merged[a] != 0])


def parse_integral(text: str, variables: Sequence[str] = DEFAULT_CHART) -> LogIntegral:
    return to_log_integral(parse_expr(text, variables, allow_log=True), variables)


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 2, "pow": 4, "atom": 5}


def _format(node: Expr) -> tuple[str, int]:
    if isinstance(node, Num):
        return str(node.value), _PREC["atom"]
    if isinstance(node, Var):
        return node.name, _PREC["atom"]
    if isinstance(node, Neg):
        body, prec = _format(node.operand)
        if prec < _PREC["neg"]:
            body = f"({body})"
        return f"-{body}", _PREC["neg"]
    if isinstance(node, Pow):
        base, prec = _format(node.base)
        if prec < _PREC["atom"]:
            base = f"({base})"
        exponent = node.exponent if node.exponent >= 0 else f"(-{-node.exponent})"
        return f"{base}^{exponent}", _PREC["pow"]
    if isinstance(node, Log):
        body, _ = _format(node.argument)
        return f"log({body})", _PREC["atom"]
    left, lp = _format(node.left)
    right, rp = _format(node.right)
    prec = _PREC[node.op]
    if lp < prec:
        left = f"({left})"
    # '-' and '/' are left-associative: parenthesise an equal-precedence rhs
    if rp < prec or (rp == prec and node.op in "-/"):
        right = f"({right})"
    return f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}", prec


def format_expr(node: Expr) -> str:
    return _format(node)[0]


# ---------------------------------------------------------------------------
# system files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SystemSpec:
    """Fully resolved content of a system file."""

    name: str
    variables: tuple[str, str, str]
    v: tuple[RationalFunction, RationalFunction, RationalFunction]
    u: Optional[tuple[RationalFunction, RationalFunction, RationalFunction]] = None
    w: Optional[tuple[RationalFunction, RationalFunction, RationalFunction]] = None
    integrals: tuple[tuple[str, LogIntegral], ...] = ()
    multiplier_hint: Optional[RationalFunction] = None

    def integral(self, name: str) -> LogIntegral:
        for key, value in self.integrals:
            if key == name:
                return value
        raise KeyError(name)


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def _parse_components(value: str, variables, line_no: int) -> tuple:
    parts = value.split(";")
    if len(parts) != 3:
        raise ParseError(f"expected 3 ';'-separated components, got {len(parts)}", line_no)
    return tuple(
        to_rational(parse_expr(part, variables, line_offset=line_no), variables)
        for part in parts
    )


def parse_system(source: str) -> SystemSpec:
    """Parse a system document; the first error aborts with its line."""
    seen: dict[str, int] = {}
    raw: dict[str, tuple[int, str]] = {}
    integrals: list[tuple[str, int, str]] = []
    for line_no, line in enumerate(source.splitlines(), start=1):
        body = _strip_comment(line).strip()
        if not body:
            continue
        key, sep, value = body.partition(":")
        if not sep:
            raise ParseError("expected 'key: value'", line_no)
        key = key.strip()
        value = value.strip()
        if key.startswith("integral"):
            integral_name = key[len("integral"):].strip()
            if not integral_name:
                raise ParseError("integral lines read 'integral <name>: <expr>'", line_no)
            if any(existing == integral_name for existing, _, _ in integrals):
                raise ParseError(f"duplicate integral {integral_name!r}", line_no)
            integrals.append((integral_name, line_no, value))
            continue
        if key not in ("name", "variables", "v", "u", "w", "multiplier"):
            raise ParseError(f"unknown key {key!r}", line_no)
        if key in seen:
            raise ParseError(f"duplicate key {key!r} (first on line {seen[key]})", line_no)
        seen[key] = line_no
        raw[key] = (line_no, value)

    for required in ("name", "variables", "v"):
        if required not in raw:
            raise ParseError(f"missing required key {required!r}")

    name = raw["name"][1]
    if not name:
        raise ParseError("empty system name", raw["name"][0])

    vars_line, vars_value = raw["variables"]
    names = tuple(part.strip() for part in vars_value.split(","))
    if len(names) != 3 or len(set(names)) != 3 or not all(
        n and (n[0].isalpha() or n[0] == "_") and n.isidentifier() for n in names
    ):
        raise ParseError("variables must be 3 distinct identifiers", vars_line)

    v = _parse_components(raw["v"][1], names, raw["v"][0])
    u = _parse_components(raw["u"][1], names, raw["u"][0]) if "u" in raw else None
    w = _parse_components(raw["w"][1], names, raw["w"][0]) if "w" in raw else None
    multiplier = None
    if "multiplier" in raw:
        m_line, m_value = raw["multiplier"]
        multiplier = to_rational(parse_expr(m_value, names, line_offset=m_line), names)
    resolved = tuple(
        (
            integral_name,
            to_log_integral(
                parse_expr(value, names, allow_log=True, line_offset=line_no), names
            ),
        )
        for integral_name, line_no, value in integrals
    )
    return SystemSpec(name, names, v, u, w, resolved, multiplier)


def _format_log_integral(h: LogIntegral) -> str:
    return str(h)


def serialize_system(spec: SystemSpec) -> str:
    """Canonical text that parse_system maps back to an equal SystemSpec."""
    lines = [
        f"name: {spec.name}",
        f"variables: {', '.join(spec.variables)}",
        "v: " + "; ".join(str(c) for c in spec.v),
    ]
    if spec.u is not None:
        lines.append("u: " + "; ".join(str(c) for c in spec.u))
    if spec.w is not None:
        lines.append("w: " + "; ".join(str(c) for c in spec.w))
    for name, integral in spec.integrals:
        lines.append(f"integral {name}: {_format_log_integral(integral)}")
    if spec.multiplier_hint is not None:
        lines.append(f"multiplier: {spec.multiplier_hint}")
    return "\n".join(lines) + "\n"
