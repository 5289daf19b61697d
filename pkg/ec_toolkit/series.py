# series.py
"""Truncated exact Laurent series in q, on an integral or half-integral grid.

A series on grid denominator d stores the coefficients of q^(k/d) for
valuation <= k < prec (grid units); everything from q^(prec/d) on is unknown.
Sums are known up to the smaller precision of the operands; products up to
min(v_a + prec_b, v_b + prec_a), which equals the smaller precision for power
series and is honest for poles.
"""

import logging
from fractions import Fraction
from math import floor
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import InsufficientOrder, SeriesInversionError

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


class LaurentSeries:
    """Immutable truncated Laurent series with Fraction coefficients.

    Attributes:
        denom (int): Exponent-grid denominator, 1 or 2.
        val (int): Lowest stored exponent in grid units.
        prec (int): Exclusive precision bound in grid units.
        coeffs (Tuple[Fraction, ...]): Coefficients for grid exponents val..prec-1.
    """
    __slots__ = ("denom", "val", "prec", "coeffs")

    def __init__(self, coeffs: Sequence[Scalar], val: int = 0, prec: Optional[int] = None, denom: int = 1):
        if denom not in (1, 2):
            raise ValueError(f"exponent grid denominator must be 1 or 2, got {denom}")
        values = [Fraction(c) for c in coeffs]
        if prec is None:
            prec = val + len(values)
        if prec < val + len(values):
            values = values[:max(prec - val, 0)]
        values.extend([Fraction(0)] * (prec - val - len(values)))
        start = 0
        while start < len(values) and not values[start]:
            start += 1
        self.denom = denom
        self.val = val + start if start < len(values) else prec
        self.prec = prec
        self.coeffs = tuple(values[start:])

    # --- constructors ---

    @classmethod
    def from_terms(cls, terms: Mapping[Any, Scalar], order: Any, denom: int = 1) -> "LaurentSeries":
        """Builds a series from {exponent: coefficient}, known through q^order."""
        prec = floor(Fraction(order) * denom) + 1
        if not terms:
            return cls([], prec, prec, denom)
        grid = {int(Fraction(e) * denom): Fraction(c) for e, c in terms.items()}
        low = min(grid)
        coeffs = [grid.get(k, Fraction(0)) for k in range(low, prec)]
        return cls(coeffs, low, prec, denom)

    @classmethod
    def one(cls, order: int) -> "LaurentSeries":
        return cls.from_terms({0: 1}, order)

    @classmethod
    def monomial(cls, exponent: Any, order: Any, coeff: Scalar = 1, denom: int = 1) -> "LaurentSeries":
        return cls.from_terms({exponent: coeff}, order, denom)

    # --- inspection ---

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def valuation(self) -> Fraction:
        return Fraction(self.val, self.denom)

    @property
    def order(self) -> Fraction:
        """Highest exponent whose coefficient is known."""
        return Fraction(self.prec - 1, self.denom)

    def leading_coefficient(self) -> Fraction:
        if not self.coeffs:
            raise SeriesInversionError("zero series has no leading coefficient")
        return self.coeffs[0]

    def coefficient(self, exponent: Any) -> Fraction:
        """Coefficient of q^exponent; raises InsufficientOrder beyond the precision."""
        k = Fraction(exponent) * self.denom
        if k.denominator != 1:
            return Fraction(0)
        k = int(k)
        if k >= self.prec:
            raise InsufficientOrder(f"coefficient of q^{exponent} is beyond the known order {self.order}")
        if k < self.val:
            return Fraction(0)
        return self.coeffs[k - self.val]

    def items(self) -> Iterator[Tuple[Fraction, Fraction]]:
        """Nonzero (exponent, coefficient) pairs in increasing exponent order."""
        for offset, c in enumerate(self.coeffs):
            if c:
                yield Fraction(self.val + offset, self.denom), c

    def on_integral_grid(self) -> bool:
        return self.denom == 1 or all(e.denominator == 1 for e, _ in self.items())

    # --- grid handling ---

    def regrid(self, denom: int) -> "LaurentSeries":
        """Re-expresses the series on another grid (coarsening only when exact)."""
        if denom == self.denom:
            return self
        if denom == 2 and self.denom == 1:
            coeffs: List[Fraction] = []
            for c in self.coeffs:
                coeffs.extend((c, Fraction(0)))
            return LaurentSeries(coeffs, 2 * self.val, 2 * self.prec, 2)
        if denom == 1 and self.denom == 2:
            if not self.on_integral_grid():
                raise ValueError("series has half-integral exponents and cannot move to the integral grid")
            low = -(-self.val // 2)
            prec = -(-self.prec // 2)
            return LaurentSeries([self.coefficient(k) for k in range(low, prec)], low, prec, 1)
        raise ValueError(f"unsupported grid denominator {denom}")

    def _aligned(self, other: "LaurentSeries") -> Tuple["LaurentSeries", "LaurentSeries"]:
        d = max(self.denom, other.denom)
        return self.regrid(d), other.regrid(d)

    def _coerce(self, other: Any) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            return other
        if isinstance(other, (int, Fraction)):
            # constants are exact: give them the precision of self (never the limiting factor)
            prec = max(self.prec, 1)
            return LaurentSeries([other], 0, prec, self.denom)
        return NotImplemented

    # --- arithmetic ---

    def __add__(self, other: Any) -> "LaurentSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._aligned(other)
        low = min(a.val, b.val)
        prec = min(a.prec, b.prec)
        coeffs = []
        for k in range(low, prec):
            ca = a.coeffs[k - a.val] if a.val <= k < a.prec else Fraction(0)
            cb = b.coeffs[k - b.val] if b.val <= k < b.prec else Fraction(0)
            coeffs.append(ca + cb)
        return LaurentSeries(coeffs, low, prec, a.denom)

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries([-c for c in self.coeffs], self.val, self.prec, self.denom)

    def __sub__(self, other: Any) -> "LaurentSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "LaurentSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def scale(self, factor: Scalar) -> "LaurentSeries":
        f = Fraction(factor)
        return LaurentSeries([c * f for c in self.coeffs], self.val, self.prec, self.denom)

    def __mul__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._aligned(other)
        prec = min(a.val + b.prec, b.val + a.prec)
        low = a.val + b.val
        count = prec - low
        if count <= 0:
            return LaurentSeries([], prec, prec, a.denom)
        ac, bc = a.coeffs, b.coeffs
        coeffs = []
        for n in range(count):
            total = Fraction(0)
            for i in range(max(0, n - len(bc) + 1), min(n, len(ac) - 1) + 1):
                total += ac[i] * bc[n - i]
            coeffs.append(total)
        return LaurentSeries(coeffs, low, prec, a.denom)

    __rmul__ = __mul__

    def invert(self) -> "LaurentSeries":
        """Multiplicative inverse; raises SeriesInversionError for the zero series."""
        if not self.coeffs:
            raise SeriesInversionError("inversion of a zero series")
        u = self.coeffs
        count = len(u)
        u0 = u[0]
        w = [Fraction(1) / u0]
        for n in range(1, count):
            total = Fraction(0)
            for i in range(1, n + 1):
                total += u[i] * w[n - i]
            w.append(-total / u0)
        return LaurentSeries(w, -self.val, -self.val + count, self.denom)

    def __truediv__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, (int, Fraction)):
            if not other:
                raise SeriesInversionError("division of a series by zero")
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, LaurentSeries):
            return self * other.invert()
        return NotImplemented

    def __rtruediv__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, (int, Fraction)):
            return self.invert().scale(other)
        return NotImplemented

    def __pow__(self, exponent: int) -> "LaurentSeries":
        if exponent < 0:
            return self.invert() ** (-exponent)
        result = LaurentSeries([1], 0, max(self.prec - self.val, 1), self.denom)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def theta(self) -> "LaurentSeries":
        """The derivation q d/dq: c at q^e becomes e*c."""
        return LaurentSeries(
            [c * Fraction(self.val + i, self.denom) for i, c in enumerate(self.coeffs)],
            self.val, self.prec, self.denom,
        )

    def truncate(self, order: Any) -> "LaurentSeries":
        """Forgets everything above q^order."""
        prec = min(self.prec, floor(Fraction(order) * self.denom) + 1)
        if prec <= self.val:
            return LaurentSeries([], prec, prec, self.denom)
        return LaurentSeries(self.coeffs[:prec - self.val], self.val, prec, self.denom)

    def substitute_power(self, m: int) -> "LaurentSeries":
        """q -> q^m for a positive integer m."""
        if m < 1:
            raise ValueError("substitution exponent must be positive")
        coeffs: List[Fraction] = []
        for c in self.coeffs:
            coeffs.append(c)
            coeffs.extend([Fraction(0)] * (m - 1))
        return LaurentSeries(coeffs, self.val * m, self.prec * m, self.denom)

    def root_grid(self) -> "LaurentSeries":
        """q -> q^(1/2): the same coefficient list read on the half-integral grid."""
        if self.denom != 1:
            raise ValueError("only integral-grid series can be moved to the q^(1/2) grid")
        return LaurentSeries(self.coeffs, self.val, self.prec, 2)

    def twist(self) -> "LaurentSeries":
        """q^(1/2) -> -q^(1/2): negates the half-integral coefficients."""
        if self.denom != 2:
            return self
        return LaurentSeries(
            [-c if (self.val + i) % 2 else c for i, c in enumerate(self.coeffs)],
            self.val, self.prec, 2,
        )

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LaurentSeries):
            a, b = self._aligned(other)
            return (a.val, a.prec, a.coeffs) == (b.val, b.prec, b.coeffs)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.denom, self.val, self.prec, self.coeffs))

    def to_terms(self) -> Dict[Fraction, Fraction]:
        return dict(self.items())

    def __repr__(self) -> str:
        shown = [f"{c}*q^{e}" for e, c in list(self.items())[:6]]
        body = " + ".join(shown) if shown else "0"
        return f"LaurentSeries({body} + O(q^{Fraction(self.prec, self.denom)}))"


def series_ops(kind: str, operands: Sequence[Any], order: Any) -> LaurentSeries:
    """Named series operations, truncated to known terms through q^order.

    Args:
        kind: "add", "mul", "invert" or "theta".
        operands: Two series for add/mul, one for invert/theta.
        order: The result is truncated after q^order.

    Returns:
        LaurentSeries: Exact coefficients up to the truncation.

    Raises:
        SeriesInversionError: Inverting the zero series.
    """
    if kind == "add":
        result = operands[0] + operands[1]
    elif kind == "mul":
        result = operands[0] * operands[1]
    elif kind == "invert":
        result = operands[0].invert()
    elif kind == "theta":
        result = operands[0].theta()
    else:
        raise ValueError(f"unknown series operation '{kind}'")
    return result.truncate(order)
