# polynomials.py
"""Exact multivariate polynomials and rational functions over the rationals.

`MPoly` values are immutable: every operation returns a new polynomial whose
terms are kept in a dict keyed by exponent tuples, with zero coefficients
never stored. The public `terms` view is sorted by the active monomial order,
so two polynomials are equal exactly when their sorted term lists agree.

`RatFunc` keeps numerator and denominator coprime (multivariate gcd by
content/primitive-part recursion with a subresultant remainder sequence at
the base), integral with coprime coefficients overall, and with a denominator
whose leading coefficient is positive.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import RegistryMismatch, ZeroDenominator

logger = logging.getLogger(__name__)

Exps = Tuple[int, ...]
Scalar = Union[int, Fraction]


# --- Registries and orders ---

@dataclass(frozen=True)
class VariableRegistry:
    """Ordered list of variable names shared by a family of polynomials."""
    names: Tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in registry: {self.names}")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable '{name}'") from None

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def extended(self, extra: Iterable[str]) -> "VariableRegistry":
        """Returns a registry with `extra` names appended (existing names are kept once)."""
        names = list(self.names)
        for name in extra:
            if name not in names:
                names.append(name)
        return VariableRegistry(tuple(names))


def _grevlex_key(exps: Exps) -> Tuple:
    return (sum(exps), tuple(-e for e in reversed(exps)))


@dataclass(frozen=True)
class MonomialOrder:
    """A monomial order on exponent tuples.

    Attributes:
        name (str): "grevlex", "lex" or "block".
        eliminate (FrozenSet[int]): For "block", the variable positions forming
            the first (eliminated) block; both blocks are ordered by grevlex.
    """
    name: str = "grevlex"
    eliminate: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.name not in ("grevlex", "lex", "block"):
            raise ValueError(f"unknown monomial order '{self.name}'")

    @classmethod
    def block(cls, eliminate: Iterable[int]) -> "MonomialOrder":
        return cls("block", frozenset(eliminate))

    def key(self, exps: Exps) -> Tuple:
        if self.name == "grevlex":
            return _grevlex_key(exps)
        if self.name == "lex":
            return exps
        first = tuple(e for i, e in enumerate(exps) if i in self.eliminate)
        rest = tuple(e for i, e in enumerate(exps) if i not in self.eliminate)
        return (_grevlex_key(first), _grevlex_key(rest))


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


# --- Polynomials ---

def _as_fraction(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class MPoly:
    """Multivariate polynomial with Fraction coefficients.

    Attributes:
        registry (VariableRegistry): The variables the exponent tuples refer to.
        order (MonomialOrder): The active monomial order (leading terms, term listing).
    """
    __slots__ = ("registry", "order", "_terms", "_hash", "_sorted")

    def __init__(self, registry: VariableRegistry, terms: Optional[Mapping[Exps, Scalar]] = None,
                 order: MonomialOrder = GREVLEX):
        self.registry = registry
        self.order = order
        clean: Dict[Exps, Fraction] = {}
        nvars = len(registry)
        for exps, coeff in (terms or {}).items():
            if len(exps) != nvars:
                raise ValueError(f"exponent tuple {exps} does not match registry of {nvars} variables")
            c = _as_fraction(coeff)
            if c:
                clean[tuple(exps)] = c
        self._terms = clean
        self._hash: Optional[int] = None
        self._sorted: Optional[Tuple[Tuple[Exps, Fraction], ...]] = None

    @classmethod
    def _raw(cls, registry: VariableRegistry, terms: Dict[Exps, Fraction], order: MonomialOrder) -> "MPoly":
        poly = cls.__new__(cls)
        poly.registry = registry
        poly.order = order
        poly._terms = terms
        poly._hash = None
        poly._sorted = None
        return poly

    # --- constructors ---

    @classmethod
    def zero(cls, registry: VariableRegistry, order: MonomialOrder = GREVLEX) -> "MPoly":
        return cls._raw(registry, {}, order)

    @classmethod
    def constant(cls, registry: VariableRegistry, value: Scalar, order: MonomialOrder = GREVLEX) -> "MPoly":
        c = _as_fraction(value)
        return cls._raw(registry, {(0,) * len(registry): c} if c else {}, order)

    @classmethod
    def one(cls, registry: VariableRegistry, order: MonomialOrder = GREVLEX) -> "MPoly":
        return cls.constant(registry, 1, order)

    @classmethod
    def variable(cls, registry: VariableRegistry, name: str, order: MonomialOrder = GREVLEX) -> "MPoly":
        exps = [0] * len(registry)
        exps[registry.index(name)] = 1
        return cls._raw(registry, {tuple(exps): Fraction(1)}, order)

    @classmethod
    def monomial(cls, registry: VariableRegistry, exps: Exps, coeff: Scalar = 1,
                 order: MonomialOrder = GREVLEX) -> "MPoly":
        return cls(registry, {tuple(exps): coeff}, order)

    # --- inspection ---

    @property
    def terms(self) -> Tuple[Tuple[Exps, Fraction], ...]:
        """Terms sorted strictly descending under the active order."""
        if self._sorted is None:
            key = self.order.key
            self._sorted = tuple(sorted(self._terms.items(), key=lambda t: key(t[0]), reverse=True))
        return self._sorted

    def term_dict(self) -> Dict[Exps, Fraction]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and not any(next(iter(self._terms))))

    def constant_value(self) -> Fraction:
        """Returns the constant coefficient (the value at the origin)."""
        return self._terms.get((0,) * len(self.registry), Fraction(0))

    def leading_term(self) -> Tuple[Exps, Fraction]:
        if not self._terms:
            raise ValueError("the zero polynomial has no leading term")
        key = self.order.key
        exps = max(self._terms, key=key)
        return exps, self._terms[exps]

    def lm(self) -> Exps:
        return self.leading_term()[0]

    def lc(self) -> Fraction:
        return self.leading_term()[1]

    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def degree(self, name: str) -> int:
        idx = self.registry.index(name)
        return max((e[idx] for e in self._terms), default=-1)

    def used_indices(self) -> FrozenSet[int]:
        return frozenset(i for exps in self._terms for i, e in enumerate(exps) if e)

    def used_names(self) -> Tuple[str, ...]:
        used = self.used_indices()
        return tuple(n for i, n in enumerate(self.registry.names) if i in used)

    def coefficients(self) -> List[Fraction]:
        return [c for _, c in self.terms]

    def with_order(self, order: MonomialOrder) -> "MPoly":
        if order == self.order:
            return self
        return MPoly._raw(self.registry, self._terms, order)

    # --- arithmetic ---

    def _coerce(self, other: Any) -> "MPoly":
        if isinstance(other, MPoly):
            if other.registry != self.registry:
                raise RegistryMismatch(f"registries differ: {self.registry.names} vs {other.registry.names}")
            return other
        if isinstance(other, (int, Fraction)):
            return MPoly.constant(self.registry, other, self.order)
        return NotImplemented

    def __add__(self, other: Any) -> "MPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        result = dict(self._terms)
        for exps, c in other._terms.items():
            s = result.get(exps, 0) + c
            if s:
                result[exps] = s
            else:
                result.pop(exps, None)
        return MPoly._raw(self.registry, result, self.order)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly._raw(self.registry, {e: -c for e, c in self._terms.items()}, self.order)

    def __sub__(self, other: Any) -> "MPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "MPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def scale(self, factor: Scalar) -> "MPoly":
        f = _as_fraction(factor)
        if not f:
            return MPoly.zero(self.registry, self.order)
        return MPoly._raw(self.registry, {e: c * f for e, c in self._terms.items()}, self.order)

    def mul_term(self, exps: Exps, coeff: Fraction) -> "MPoly":
        if not coeff:
            return MPoly.zero(self.registry, self.order)
        return MPoly._raw(
            self.registry,
            {tuple(a + b for a, b in zip(e, exps)): c * coeff for e, c in self._terms.items()},
            self.order,
        )

    def __mul__(self, other: Any) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if len(self._terms) < len(other._terms):
            small, big = self, other
        else:
            small, big = other, self
        result: Dict[Exps, Fraction] = {}
        for e1, c1 in small._terms.items():
            for e2, c2 in big._terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                s = result.get(exps, 0) + c1 * c2
                if s:
                    result[exps] = s
                else:
                    result.pop(exps, None)
        return MPoly._raw(self.registry, result, self.order)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "MPoly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f"polynomial exponent must be a non-negative integer, got {exponent}")
        result = MPoly.one(self.registry, self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __truediv__(self, other: Any) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDenominator("division of a polynomial by zero")
            return self.scale(Fraction(1) / _as_fraction(other))
        if isinstance(other, MPoly) and other.is_constant():
            return self / other.constant_value()
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        if isinstance(other, MPoly):
            return self.registry == other.registry and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.registry.names, frozenset(self._terms.items())))
        return self._hash

    # --- calculus and substitution ---

    def partial(self, name: str) -> "MPoly":
        """Partial derivative with respect to the named variable."""
        idx = self.registry.index(name)
        result: Dict[Exps, Fraction] = {}
        for exps, c in self._terms.items():
            e = exps[idx]
            if e:
                new = list(exps)
                new[idx] = e - 1
                result[tuple(new)] = c * e
        return MPoly._raw(self.registry, result, self.order)

    def coefficients_in(self, name: str) -> Dict[int, "MPoly"]:
        """Decomposes the polynomial as sum_k c_k * name^k with c_k free of `name`."""
        idx = self.registry.index(name)
        parts: Dict[int, Dict[Exps, Fraction]] = {}
        for exps, c in self._terms.items():
            k = exps[idx]
            stripped = exps[:idx] + (0,) + exps[idx + 1:]
            parts.setdefault(k, {})[stripped] = c
        return {k: MPoly._raw(self.registry, terms, self.order) for k, terms in parts.items()}

    def substitute(self, name: str, value: Union["MPoly", Scalar]) -> "MPoly":
        """Replaces a variable by a polynomial (or constant) over the same registry."""
        if not isinstance(value, MPoly):
            value = MPoly.constant(self.registry, value, self.order)
        else:
            value = self._coerce(value)
        result = MPoly.zero(self.registry, self.order)
        powers: Dict[int, MPoly] = {0: MPoly.one(self.registry, self.order)}
        for k, coeff in self.coefficients_in(name).items():
            if k not in powers:
                powers[k] = value ** k
            result = result + coeff * powers[k]
        return result

    def substitute_many(self, values: Mapping[str, Union["MPoly", Scalar]]) -> "MPoly":
        """Simultaneous substitution into a polynomial over the same registry."""
        one = MPoly.one(self.registry, self.order)
        cache: Dict[Tuple[int, int], MPoly] = {}
        lifted: Dict[int, MPoly] = {}
        for name, value in values.items():
            idx = self.registry.index(name)
            lifted[idx] = value if isinstance(value, MPoly) else MPoly.constant(self.registry, value, self.order)
        result = MPoly.zero(self.registry, self.order)
        for exps, c in self._terms.items():
            kept = list(exps)
            term = one
            for idx, sub in lifted.items():
                e = exps[idx]
                if e:
                    kept[idx] = 0
                    if (idx, e) not in cache:
                        cache[(idx, e)] = sub ** e
                    term = term * cache[(idx, e)]
            result = result + term.mul_term(tuple(kept), c)
        return result

    def evaluate(self, values: Mapping[str, Any], zero: Any = 0) -> Any:
        """Evaluates the polynomial on elements of any commutative ring.

        Args:
            values: Value for every variable occurring in the polynomial.
            zero: The ring's zero, returned for the zero polynomial.

        Returns:
            The value, built with the elements' own + and * operators.
        """
        names = self.registry.names
        power_cache: Dict[Tuple[int, int], Any] = {}
        total = zero
        for exps, c in self.terms:
            term: Any = c
            for idx, e in enumerate(exps):
                if e:
                    if (idx, e) not in power_cache:
                        power_cache[(idx, e)] = values[names[idx]] ** e
                    term = term * power_cache[(idx, e)]
            total = total + term
        return total

    def embed(self, registry: VariableRegistry, renaming: Optional[Mapping[str, str]] = None,
              order: Optional[MonomialOrder] = None) -> "MPoly":
        """Moves the polynomial into another registry, optionally renaming variables."""
        renaming = renaming or {}
        positions = []
        for i, name in enumerate(self.registry.names):
            target = renaming.get(name, name)
            positions.append(registry.index(target) if target in registry else None)
        width = len(registry)
        result: Dict[Exps, Fraction] = {}
        for exps, c in self._terms.items():
            new = [0] * width
            for i, e in enumerate(exps):
                if e:
                    pos = positions[i]
                    if pos is None:
                        raise RegistryMismatch(
                            f"variable '{self.registry.names[i]}' has no counterpart in {registry.names}")
                    new[pos] += e
            key = tuple(new)
            s = result.get(key, 0) + c
            if s:
                result[key] = s
            else:
                result.pop(key, None)
        return MPoly._raw(registry, result, order or self.order)

    # --- presentation ---

    def to_expr(self) -> str:
        """Renders the polynomial in the toolkit's expression grammar."""
        if not self._terms:
            return "0"
        pieces: List[str] = []
        names = self.registry.names
        for k, (exps, c) in enumerate(self.terms):
            factors = []
            for idx, e in enumerate(exps):
                if e == 1:
                    factors.append(names[idx])
                elif e:
                    factors.append(f"{names[idx]}^{e}")
            mag = abs(c)
            if not factors:
                body = _format_rational(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _format_rational(mag) + "*" + "*".join(factors)
            if k == 0:
                pieces.append(("-" if c < 0 else "") + body)
            else:
                pieces.append((" - " if c < 0 else " + ") + body)
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"MPoly({self.to_expr()})"

    __str__ = to_expr


def _format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def mpoly_arith(kind: str, *operands: Any) -> MPoly:
    """Dispatches the polynomial operations by name.

    Args:
        kind: One of "add", "mul", "pow", "partial", "substitute".
        operands: add/mul take polynomials; pow takes (p, exponent); partial
            takes (p, variable name); substitute takes (p, variable name, value).

    Returns:
        MPoly: The canonical result.
    """
    if kind == "add":
        return reduce(lambda a, b: a + b, operands)
    if kind == "mul":
        return reduce(lambda a, b: a * b, operands)
    if kind == "pow":
        poly, exponent = operands
        return poly ** exponent
    if kind == "partial":
        poly, name = operands
        return poly.partial(name)
    if kind == "substitute":
        poly, name, value = operands
        return poly.substitute(name, value)
    raise ValueError(f"unknown polynomial operation '{kind}'")


# --- Exact division and gcd ---

def divide_exact(a: MPoly, b: MPoly) -> MPoly:
    """Returns q with a = q*b, raising ArithmeticError when b does not divide a."""
    if b.is_zero():
        raise ZeroDenominator("exact division by the zero polynomial")
    if b.is_constant():
        return a / b.constant_value()
    order = a.order
    key = order.key
    lead_b, lc_b = b.leading_term()
    rest: Dict[Exps, Fraction] = dict(a._terms)
    quotient: Dict[Exps, Fraction] = {}
    b_terms = list(b._terms.items())
    while rest:
        lead = max(rest, key=key)
        if any(x < y for x, y in zip(lead, lead_b)):
            raise ArithmeticError("polynomial division is not exact")
        q_exps = tuple(x - y for x, y in zip(lead, lead_b))
        q_coeff = rest[lead] / lc_b
        quotient[q_exps] = quotient.get(q_exps, 0) + q_coeff
        for e, c in b_terms:
            m = tuple(x + y for x, y in zip(e, q_exps))
            s = rest.get(m, 0) - c * q_coeff
            if s:
                rest[m] = s
            else:
                rest.pop(m, None)
    return MPoly._raw(a.registry, {e: c for e, c in quotient.items() if c}, a.order)


def integer_normalize(poly: MPoly) -> MPoly:
    """Scales to coprime integer coefficients with a positive leading coefficient."""
    if poly.is_zero():
        return poly
    coeffs = poly._terms.values()
    den = reduce(lambda x, y: x * y // gcd(x, y), (c.denominator for c in coeffs), 1)
    num = reduce(gcd, (abs(c.numerator) for c in coeffs), 0)
    factor = Fraction(den, num)
    if poly.lc() < 0:
        factor = -factor
    return poly.scale(factor)


def _degree_at(poly: MPoly, idx: int) -> int:
    return max((e[idx] for e in poly._terms), default=-1)


def _lead_coeff_in(poly: MPoly, idx: int) -> MPoly:
    d = _degree_at(poly, idx)
    terms = {e[:idx] + (0,) + e[idx + 1:]: c for e, c in poly._terms.items() if e[idx] == d}
    return MPoly._raw(poly.registry, terms, poly.order)


def _var_power(poly: MPoly, idx: int, power: int) -> Exps:
    exps = [0] * len(poly.registry)
    exps[idx] = power
    return tuple(exps)


def _pseudo_remainder(a: MPoly, b: MPoly, idx: int) -> MPoly:
    db = _degree_at(b, idx)
    lcb = _lead_coeff_in(b, idx)
    r = a
    e = _degree_at(a, idx) - db + 1
    while not r.is_zero() and _degree_at(r, idx) >= db:
        shift = _degree_at(r, idx) - db
        lr = _lead_coeff_in(r, idx)
        r = r * lcb - (lr * b).mul_term(_var_power(b, idx, shift), Fraction(1))
        e -= 1
    return r * (lcb ** e)


def content_in(poly: MPoly, idx: int) -> MPoly:
    """Gcd of the coefficients of `poly` viewed as a polynomial in variable `idx`."""
    parts = poly.coefficients_in(poly.registry.names[idx]).values()
    return reduce(poly_gcd, parts, MPoly.zero(poly.registry, poly.order))


def _subresultant_gcd(a: MPoly, b: MPoly, idx: int) -> MPoly:
    """Gcd of two polynomials primitive in variable `idx` (subresultant PRS)."""
    if _degree_at(a, idx) < _degree_at(b, idx):
        a, b = b, a
    if _degree_at(b, idx) <= 0:
        return MPoly.one(a.registry, a.order)
    g = MPoly.one(a.registry, a.order)
    h = MPoly.one(a.registry, a.order)
    while True:
        delta = _degree_at(a, idx) - _degree_at(b, idx)
        r = _pseudo_remainder(a, b, idx)
        if r.is_zero():
            break
        if _degree_at(r, idx) == 0:
            return MPoly.one(a.registry, a.order)
        a, b = b, divide_exact(r, g * h ** delta)
        g = _lead_coeff_in(a, idx)
        if delta:
            h = divide_exact(g ** delta, h ** (delta - 1))
    return divide_exact(b, content_in(b, idx))


def poly_gcd(a: MPoly, b: MPoly) -> MPoly:
    """Greatest common divisor, normalized by `integer_normalize`.

    Recurses on the lowest-index variable present: splits off contents,
    takes the subresultant gcd of the primitive parts, multiplies back the
    gcd of the contents.
    """
    if a.registry != b.registry:
        raise RegistryMismatch("gcd of polynomials over different registries")
    if a.is_zero():
        return integer_normalize(b)
    if b.is_zero():
        return integer_normalize(a)
    if a.is_constant() or b.is_constant():
        return MPoly.one(a.registry, a.order)
    used = a.used_indices() | b.used_indices()
    idx = min(used)
    if idx not in a.used_indices() or idx not in b.used_indices():
        # The variable only occurs on one side: gcd divides every coefficient there.
        carrier, other = (a, b) if idx in a.used_indices() else (b, a)
        return integer_normalize(poly_gcd(content_in(carrier, idx), other))
    ca = content_in(a, idx)
    cb = content_in(b, idx)
    c = poly_gcd(ca, cb)
    g = _subresultant_gcd(divide_exact(a, ca), divide_exact(b, cb), idx)
    return integer_normalize(c * g)


# --- Rational functions ---

class RatFunc:
    """Normalized quotient of two polynomials over a common registry."""
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: MPoly, den: Optional[MPoly] = None):
        normalized = ratfunc_normalize(num, den if den is not None else MPoly.one(num.registry, num.order))
        self.num = normalized[0]
        self.den = normalized[1]
        self._hash: Optional[int] = None

    @classmethod
    def _trusted(cls, num: MPoly, den: MPoly) -> "RatFunc":
        rf = cls.__new__(cls)
        rf.num = num
        rf.den = den
        rf._hash = None
        return rf

    @classmethod
    def from_poly(cls, poly: MPoly) -> "RatFunc":
        return cls(poly)

    @classmethod
    def constant(cls, registry: VariableRegistry, value: Scalar) -> "RatFunc":
        return cls(MPoly.constant(registry, value))

    @classmethod
    def variable(cls, registry: VariableRegistry, name: str) -> "RatFunc":
        return cls._trusted(MPoly.variable(registry, name), MPoly.one(registry))

    @property
    def registry(self) -> VariableRegistry:
        return self.num.registry

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("rational function is not constant")
        return self.num.constant_value() / self.den.constant_value()

    def _coerce(self, other: Any) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.registry != self.registry:
                raise RegistryMismatch("rational functions over different registries")
            return other
        if isinstance(other, MPoly):
            return RatFunc(other)
        if isinstance(other, (int, Fraction)):
            return RatFunc.constant(self.registry, other)
        return NotImplemented

    def __add__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc._trusted(-self.num, self.den)

    def __sub__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDenominator("inverse of the zero rational function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDenominator("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, exponent: int) -> "RatFunc":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return RatFunc._trusted_normalized(self.num ** exponent, self.den ** exponent)

    @classmethod
    def _trusted_normalized(cls, num: MPoly, den: MPoly) -> "RatFunc":
        # powers of coprime pairs stay coprime; only the scalar normalization is redone
        return cls._trusted(*_scalar_normalize(num, den))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        if isinstance(other, MPoly):
            return self == RatFunc(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def partial(self, name: str) -> "RatFunc":
        """Quotient rule."""
        return RatFunc(self.num.partial(name) * self.den - self.num * self.den.partial(name), self.den * self.den)

    def substitute(self, name: str, value: Union[MPoly, Scalar]) -> "RatFunc":
        return RatFunc(self.num.substitute(name, value), self.den.substitute(name, value))

    def evaluate(self, values: Mapping[str, Any], zero: Any = 0) -> Any:
        den = self.den.evaluate(values, zero)
        if den == 0:
            raise ZeroDenominator(f"denominator {self.den.to_expr()} vanishes at the evaluation point")
        return self.num.evaluate(values, zero) / den

    def embed(self, registry: VariableRegistry, renaming: Optional[Mapping[str, str]] = None) -> "RatFunc":
        return RatFunc(self.num.embed(registry, renaming), self.den.embed(registry, renaming))

    def to_expr(self) -> str:
        num = self.num.to_expr()
        if self.den == 1:
            return num
        den = self.den.to_expr()
        if len(self.num) > 1:
            num = f"({num})"
        if len(self.den) > 1 or "*" in den or "^" in den or "/" in den:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RatFunc({self.to_expr()})"

    __str__ = to_expr


def _scalar_normalize(num: MPoly, den: MPoly) -> Tuple[MPoly, MPoly]:
    coeffs = list(num._terms.values()) + list(den._terms.values())
    lcm_den = reduce(lambda x, y: x * y // gcd(x, y), (c.denominator for c in coeffs), 1)
    g = reduce(gcd, (abs(c.numerator) for c in coeffs), 0)
    factor = Fraction(lcm_den, g)
    if den.lc() < 0:
        factor = -factor
    return num.scale(factor), den.scale(factor)


def ratfunc_normalize(num: MPoly, den: MPoly) -> Tuple[MPoly, MPoly]:
    """Normalizes a numerator/denominator pair.

    Args:
        num: Numerator.
        den: Denominator, nonzero.

    Returns:
        (num, den) coprime, with integer coefficients that are coprime overall
        and a positive leading coefficient of den under its order.

    Raises:
        ZeroDenominator: If den is zero.
        RegistryMismatch: If the registries differ.
    """
    if num.registry != den.registry:
        raise RegistryMismatch("numerator and denominator over different registries")
    if den.is_zero():
        raise ZeroDenominator("rational function with zero denominator")
    if num.is_zero():
        return num, MPoly.one(num.registry, den.order)
    if not num.is_constant() and not den.is_constant():
        g = poly_gcd(num, den)
        if not g.is_constant():
            num = divide_exact(num, g)
            den = divide_exact(den, g)
    return _scalar_normalize(num, den)


def make_ratfunc(num: MPoly, den: MPoly) -> RatFunc:
    """The normalizing constructor, exposed under its operation name."""
    return RatFunc(num, den)


def polynomial_ring(names: Sequence[str], order: MonomialOrder = GREVLEX) -> Tuple[VariableRegistry, Tuple[MPoly, ...]]:
    """Convenience: a registry and its generator polynomials."""
    registry = VariableRegistry(tuple(names))
    return registry, tuple(MPoly.variable(registry, n, order) for n in names)


# Comments:
# - Coefficients are fractions.Fraction throughout; no floating point is ever produced.
# - Orders only influence leading terms and listing; equality ignores the order.
# - RatFunc equality is syntactic because normalization is canonical.
