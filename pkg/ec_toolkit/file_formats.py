# file_formats.py
"""Text formats for varieties, derivation witnesses and Ax-Schanuel witnesses.

Expressions follow the grammar

    expr   := ["+" | "-"] term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | factor
    factor := atom ("^" nat)?
    atom   := int | ident | "(" expr ")"
    ident  := [A-Za-z][A-Za-z0-9]*

and evaluate to rational functions over the registry of the enclosing file.
Files are line oriented; "#" starts a comment, blank lines are ignored, and
every error carries its 1-based line and column.

Variety file:

    variety
    model=J|j|exp
    n=<int>
    base=Q | Q(t1,...,tm)
    constants=a b c d            (optional)
    assume_prime=true|false
    poly <expr>                  (one per generator)

Witness file (read against a variety):

    witness
    base=Q | Q(t1,...,tm)
    derivations=<m>
    host_poly <expr>             (optional extra generators of the host ideal)
    delta <k> <coordinate> = <expr>
    lambda <k> = <expr>[, <expr> ...]
    flag <name>=<bool>

Ax-Schanuel witness file:

    aswitness
    model=J|exp
    vars=t e
    constants=...                (optional)
    derivations=<m>
    poly <expr>                  (optional host ideal generators)
    tuple <i> = <expr>, <expr>[, ...]
    table <k> <var> = <expr>
"""

import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .ax_schanuel import ASWitness
from .derivations import BaseDiffField, CoordField, DerivationWitness, host_field
from .errors import ParseError, ToolkitError
from .polynomials import MPoly, RatFunc, VariableRegistry
from .varieties import CoordinateModel, Variety

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z][A-Za-z0-9]*)|(?P<op>[-+*/^()]))")
_BOOLEANS = {"true": True, "false": False}


# --- Expressions ---

@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> List[_Token]:
    """Splits an expression into tokens; columns are absolute within the line."""
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character '{text[offset]}'", line, column + offset)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), column + start))
        pos = m.end()
    tokens.append(_Token("end", "", column + len(text)))
    return tokens


class _ExpressionParser:
    """Recursive descent over the token list, producing RatFunc values."""

    def __init__(self, tokens: List[_Token], registry: VariableRegistry, line: int):
        self.tokens = tokens
        self.registry = registry
        self.line = line
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, message: str, token: Optional[_Token] = None) -> ParseError:
        token = token or self.peek()
        return ParseError(message, self.line, token.column)

    def expect_op(self, op: str):
        token = self.take()
        if token.kind != "op" or token.text != op:
            raise self.error(f"expected '{op}'", token)

    def parse(self) -> RatFunc:
        value = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected '{self.peek().text}'")
        return value

    def expr(self) -> RatFunc:
        token = self.peek()
        negate = False
        if token.kind == "op" and token.text in "+-":
            self.take()
            negate = token.text == "-"
        value = self.term()
        if negate:
            value = -value
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RatFunc:
        value = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take()
            rhs = self.unary()
            if op.text == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise self.error("division by zero", op)
                value = value / rhs
        return value

    def unary(self) -> RatFunc:
        token = self.peek()
        if token.kind == "op" and token.text == "-":
            self.take()
            return -self.unary()
        return self.factor()

    def factor(self) -> RatFunc:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            token = self.take()
            if token.kind != "int":
                raise self.error("exponent must be a natural number", token)
            return base ** int(token.text)
        return base

    def atom(self) -> RatFunc:
        token = self.take()
        if token.kind == "int":
            return RatFunc.constant(self.registry, int(token.text))
        if token.kind == "ident":
            if token.text not in self.registry:
                raise self.error(f"unknown variable '{token.text}'", token)
            return RatFunc.variable(self.registry, token.text)
        if token.kind == "op" and token.text == "(":
            value = self.expr()
            self.expect_op(")")
            return value
        raise self.error("expected a number, a variable or '('", token)


def parse_expression(text: str, registry: VariableRegistry, line: int = 1, column: int = 1) -> RatFunc:
    """Parses an expression into a normalized rational function."""
    return _ExpressionParser(tokenize(text, line, column), registry, line).parse()


def parse_polynomial(text: str, registry: VariableRegistry, line: int = 1, column: int = 1) -> MPoly:
    """Parses an expression that must be a polynomial (constant denominators only)."""
    value = parse_expression(text, registry, line, column)
    if not value.den.is_constant():
        raise ParseError("polynomial expected, found a non-constant denominator", line, column)
    return value.num / value.den.constant_value()


# --- Line handling ---

@dataclass(frozen=True)
class _Line:
    number: int
    text: str
    column: int  # column of the first non-blank character


def _content_lines(text: str) -> List[_Line]:
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            column = len(body) - len(body.lstrip()) + 1
            out.append(_Line(number, body.strip(), column))
    return out


def _header(line: _Line) -> Tuple[str, str]:
    if "=" not in line.text:
        raise ParseError(f"expected key=value, got '{line.text}'", line.number, line.column)
    key, value = line.text.split("=", 1)
    return key.strip(), value.strip()


def _int_value(line: _Line, value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{key} must be an integer", line.number, line.column) from None


def _bool_value(line: _Line, value: str, key: str) -> bool:
    if value.lower() not in _BOOLEANS:
        raise ParseError(f"{key} must be true or false", line.number, line.column)
    return _BOOLEANS[value.lower()]


def parse_base(descriptor: str, line: Optional[_Line] = None) -> Tuple[str, ...]:
    """"Q" -> (); "Q(t)" or "Q(t1,t2)" or "Q(t1..t3)" -> parameter names."""
    text = descriptor.replace(" ", "")
    if text == "Q":
        return ()
    m = re.fullmatch(r"Q\((.*)\)", text)
    where = (line.number, line.column) if line else (0, 0)
    if m is None or not m.group(1):
        raise ParseError(f"base must be Q or Q(t1,...), got '{descriptor}'", *where)
    inner = m.group(1)
    ranged = re.fullmatch(r"([A-Za-z]+)(\d+)\.\.\1?(\d+)", inner)
    if ranged:
        prefix, lo, hi = ranged.group(1), int(ranged.group(2)), int(ranged.group(3))
        return tuple(f"{prefix}{i}" for i in range(lo, hi + 1))
    names = tuple(inner.split(","))
    for name in names:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", name):
            raise ParseError(f"bad parameter name '{name}'", *where)
    return names


def format_base(params: Sequence[str]) -> str:
    return f"Q({','.join(params)})" if params else "Q"


def _after_keyword(line: _Line, keyword: str) -> Tuple[str, int]:
    rest = line.text[len(keyword):]
    stripped = rest.lstrip()
    return stripped, line.column + len(keyword) + (len(rest) - len(stripped))


# --- Varieties ---

def parse_variety(text: str) -> Variety:
    """Parses a variety file.

    Raises:
        ParseError: On grammar violations, unknown variables or missing headers.
    """
    lines = _content_lines(text)
    if not lines or lines[0].text != "variety":
        where = (lines[0].number, lines[0].column) if lines else (1, 1)
        raise ParseError("a variety file starts with 'variety'", *where)
    headers: Dict[str, Tuple[str, _Line]] = {}
    polys: List[_Line] = []
    for line in lines[1:]:
        if line.text.split(" ", 1)[0] == "poly":
            polys.append(line)
            continue
        key, value = _header(line)
        if key not in ("model", "n", "base", "constants", "assume_prime"):
            raise ParseError(f"unknown header '{key}'", line.number, line.column)
        headers[key] = (value, line)
    for required in ("model", "n"):
        if required not in headers:
            raise ParseError(f"missing header '{required}'", lines[0].number, 1)
    n_text, n_line = headers["n"]
    try:
        model = CoordinateModel(headers["model"][0], _int_value(n_line, n_text, "n"))
    except ValueError as e:
        raise ParseError(str(e), n_line.number, n_line.column) from None
    base = parse_base(*headers["base"]) if "base" in headers else ()
    constants = tuple(headers["constants"][0].split()) if "constants" in headers else ()
    assume_prime = True
    if "assume_prime" in headers:
        value, line = headers["assume_prime"]
        assume_prime = _bool_value(line, value, "assume_prime")
    try:
        shell = Variety(model, (), assume_prime, base, constants)
    except ValueError as e:
        raise ParseError(str(e), lines[0].number, 1) from None
    gens = []
    for line in polys:
        body, column = _after_keyword(line, "poly")
        if not body:
            raise ParseError("empty poly line", line.number, line.column)
        gens.append(parse_polynomial(body, shell.registry, line.number, column))
    variety = shell.with_generators(gens)
    logger.debug(f"parsed variety: {variety.describe()}")
    return variety


def serialize_variety(variety: Variety) -> str:
    out = ["variety", f"model={variety.model.tag}", f"n={variety.n}", f"base={format_base(variety.base_params)}"]
    if variety.constant_params:
        out.append("constants=" + " ".join(variety.constant_params))
    out.append(f"assume_prime={str(variety.assume_prime).lower()}")
    out.extend(f"poly {g.to_expr()}" for g in variety.generators)
    return "\n".join(out) + "\n"


# --- Derivation witnesses ---

_DELTA = re.compile(r"delta\s+(\d+)\s+([A-Za-z][A-Za-z0-9]*)\s*=\s*(.*)$")
_LAMBDA = re.compile(r"lambda\s+(\d+)\s*=\s*(.*)$")
_FLAG = re.compile(r"flag\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S+)$")


def _expr_column(line: _Line, match: "re.Match", group: int) -> int:
    return line.column + match.start(group)


def parse_witness(text: str, variety: Variety) -> DerivationWitness:
    """Parses a witness file against the variety it claims a point of.

    Values not listed default to 0. The witness is not verified here.
    """
    lines = _content_lines(text)
    if not lines or lines[0].text != "witness":
        where = (lines[0].number, lines[0].column) if lines else (1, 1)
        raise ParseError("a witness file starts with 'witness'", *where)
    registry = variety.registry
    m = 1
    extra: List[MPoly] = []
    raw_deltas: List[Tuple[int, str, RatFunc, _Line]] = []
    raw_lambdas: List[Tuple[int, List[RatFunc], _Line]] = []
    flags: Dict[str, bool] = {}
    for line in lines[1:]:
        text_ = line.text
        if text_.startswith("host_poly"):
            body, column = _after_keyword(line, "host_poly")
            extra.append(parse_polynomial(body, registry, line.number, column))
        elif text_.startswith("delta"):
            match = _DELTA.match(text_)
            if match is None:
                raise ParseError("expected 'delta <k> <coordinate> = <expr>'", line.number, line.column)
            name = match.group(2)
            if name not in variety.coordinates():
                raise ParseError(f"unknown coordinate '{name}'", line.number, _expr_column(line, match, 2))
            value = parse_expression(match.group(3), registry, line.number, _expr_column(line, match, 3))
            raw_deltas.append((int(match.group(1)), name, value, line))
        elif text_.startswith("lambda"):
            match = _LAMBDA.match(text_)
            if match is None:
                raise ParseError("expected 'lambda <k> = <expr>'", line.number, line.column)
            start = _expr_column(line, match, 2)
            values = []
            for piece, offset in _split_commas(match.group(2)):
                values.append(parse_expression(piece, registry, line.number, start + offset))
            raw_lambdas.append((int(match.group(1)), values, line))
        elif text_.startswith("flag"):
            match = _FLAG.match(text_)
            if match is None:
                raise ParseError("expected 'flag <name>=<bool>'", line.number, line.column)
            flags[match.group(1)] = _bool_value(line, match.group(2), match.group(1))
        else:
            key, value = _header(line)
            if key == "base":
                if parse_base(value, line) != variety.base_params:
                    raise ParseError(f"base {value} does not match the variety's base", line.number, line.column)
            elif key == "derivations":
                m = _int_value(line, value, key)
                if m < 1:
                    raise ParseError("derivations must be positive", line.number, line.column)
            else:
                raise ParseError(f"unknown header '{key}'", line.number, line.column)

    try:
        host = host_field(variety, extra)
    except ToolkitError as e:
        raise ParseError(f"host field: {e}", lines[0].number, 1) from e
    width = BaseDiffField.of(variety).derivation_count
    deltas = [{v: host.zero() for v in variety.coordinates()} for _ in range(m)]
    lambdas = [tuple(host.zero() for _ in range(width)) for _ in range(m)]
    for k, name, value, line in raw_deltas:
        if not 1 <= k <= m:
            raise ParseError(f"derivation index {k} outside 1..{m}", line.number, line.column)
        deltas[k - 1][name] = host.coerce(value)
    for k, values, line in raw_lambdas:
        if not 1 <= k <= m:
            raise ParseError(f"derivation index {k} outside 1..{m}", line.number, line.column)
        if len(values) != width:
            raise ParseError(f"lambda needs {width} entries, got {len(values)}", line.number, line.column)
        lambdas[k - 1] = tuple(host.coerce(v) for v in values)
    return DerivationWitness(variety, host, deltas, lambdas, tuple(extra), flags)


def _split_commas(text: str) -> List[Tuple[str, int]]:
    """Top-level comma split, returning each piece with its offset."""
    pieces, depth, start = [], 0, 0
    for pos, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            pieces.append((text[start:pos], start))
            start = pos + 1
    pieces.append((text[start:], start))
    return pieces


def serialize_witness(witness: DerivationWitness) -> str:
    variety = witness.variety
    out = ["witness", f"base={format_base(variety.base_params)}", f"derivations={witness.derivation_count}"]
    out.extend(f"host_poly {p.to_expr()}" for p in witness.host_extra)
    for k in range(witness.derivation_count):
        for v in variety.coordinates():
            out.append(f"delta {k + 1} {v} = {witness.deltas[k][v].to_expr()}")
        out.append(f"lambda {k + 1} = " + ", ".join(x.to_expr() for x in witness.lambdas[k]))
    for name in sorted(witness.flags):
        out.append(f"flag {name}={str(witness.flags[name]).lower()}")
    return "\n".join(out) + "\n"


# --- Ax-Schanuel witnesses ---

_TUPLE = re.compile(r"tuple\s+(\d+)\s*=\s*(.*)$")
_TABLE = re.compile(r"table\s+(\d+)\s+([A-Za-z][A-Za-z0-9]*)\s*=\s*(.*)$")


def parse_as_witness(text: str) -> ASWitness:
    lines = _content_lines(text)
    if not lines or lines[0].text != "aswitness":
        where = (lines[0].number, lines[0].column) if lines else (1, 1)
        raise ParseError("an Ax-Schanuel witness file starts with 'aswitness'", *where)
    headers: Dict[str, Tuple[str, _Line]] = {}
    body: List[_Line] = []
    for line in lines[1:]:
        if line.text.split(" ", 1)[0] in ("poly", "tuple", "table"):
            body.append(line)
        else:
            key, value = _header(line)
            if key not in ("model", "vars", "constants", "derivations"):
                raise ParseError(f"unknown header '{key}'", line.number, line.column)
            headers[key] = (value, line)
    if "model" not in headers or "vars" not in headers:
        raise ParseError("missing header 'model' or 'vars'", lines[0].number, 1)
    model, model_line = headers["model"]
    if model not in ("J", "exp"):
        raise ParseError(f"model must be J or exp, got '{model}'", model_line.number, model_line.column)
    names = tuple(headers["vars"][0].split())
    constants = tuple(headers.get("constants", ("", None))[0].split())
    try:
        registry = VariableRegistry(names)
    except ValueError as e:
        vars_line = headers["vars"][1]
        raise ParseError(str(e), vars_line.number, vars_line.column) from None
    for c in constants:
        if c not in registry:
            line = headers["constants"][1]
            raise ParseError(f"constant '{c}' is not a declared variable", line.number, line.column)
    m = 1
    if "derivations" in headers:
        value, line = headers["derivations"]
        m = _int_value(line, value, "derivations")
    gens, raw_tuples, raw_tables = [], {}, []
    for line in body:
        if line.text.startswith("poly"):
            expr, column = _after_keyword(line, "poly")
            gens.append(parse_polynomial(expr, registry, line.number, column))
        elif line.text.startswith("tuple"):
            match = _TUPLE.match(line.text)
            if match is None:
                raise ParseError("expected 'tuple <i> = <expr>, ...'", line.number, line.column)
            start = _expr_column(line, match, 2)
            raw_tuples[int(match.group(1))] = (
                [parse_expression(p, registry, line.number, start + off) for p, off in _split_commas(match.group(2))],
                line)
        else:
            match = _TABLE.match(line.text)
            if match is None:
                raise ParseError("expected 'table <k> <var> = <expr>'", line.number, line.column)
            if match.group(2) not in registry:
                raise ParseError(f"unknown variable '{match.group(2)}'", line.number, _expr_column(line, match, 2))
            value = parse_expression(match.group(3), registry, line.number, _expr_column(line, match, 3))
            raw_tables.append((int(match.group(1)), match.group(2), value, line))
    derivation_params = tuple(n for n in names if n not in constants)
    try:
        host = CoordField(registry, gens, BaseDiffField(derivation_params, constants))
    except ToolkitError as e:
        raise ParseError(f"host field: {e}", lines[0].number, 1) from e
    arity = 4 if model == "J" else 2
    tuples = []
    for i in sorted(raw_tuples):
        values, line = raw_tuples[i]
        if len(values) != arity:
            raise ParseError(f"model {model} tuples have {arity} entries, got {len(values)}", line.number, line.column)
        tuples.append(tuple(host.coerce(v) for v in values))
    if sorted(raw_tuples) != list(range(1, len(raw_tuples) + 1)):
        raise ParseError("tuple indices must be 1..n without gaps", lines[0].number, 1)
    tables = [{name: host.zero() for name in names} for _ in range(m)]
    for k, name, value, line in raw_tables:
        if not 1 <= k <= m:
            raise ParseError(f"derivation index {k} outside 1..{m}", line.number, line.column)
        tables[k - 1][name] = host.coerce(value)
    return ASWitness(model, host, tuples, tables, constants)


def serialize_as_witness(witness: ASWitness) -> str:
    K = witness.host
    out = ["aswitness", f"model={witness.model}", "vars=" + " ".join(K.registry.names)]
    if witness.constants:
        out.append("constants=" + " ".join(witness.constants))
    out.append(f"derivations={len(witness.tables)}")
    out.extend(f"poly {g.to_expr()}" for g in K.basis.generators)
    for i, t in enumerate(witness.tuples, start=1):
        out.append(f"tuple {i} = " + ", ".join(x.to_expr() for x in t))
    for k, table in enumerate(witness.tables, start=1):
        for name in K.registry.names:
            out.append(f"table {k} {name} = {table[name].to_expr()}")
    return "\n".join(out) + "\n"


# --- Dispatch ---

def parse_inputs(text: str, variety: Optional[Variety] = None) -> Union[Variety, DerivationWitness, ASWitness]:
    """Parses any of the three file kinds, dispatching on the first line."""
    lines = _content_lines(text)
    if not lines:
        raise ParseError("empty input", 1, 1)
    kind = lines[0].text
    if kind == "variety":
        return parse_variety(text)
    if kind == "aswitness":
        return parse_as_witness(text)
    if kind == "witness":
        if variety is None:
            raise ParseError("a witness file is read against a variety", lines[0].number, lines[0].column)
        return parse_witness(text, variety)
    raise ParseError(f"unknown file kind '{kind}'", lines[0].number, lines[0].column)


# Comments:
# - Serializers write exactly the grammar the parsers read; output is canonical once parsed.
