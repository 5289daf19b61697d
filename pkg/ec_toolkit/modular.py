# modular.py
"""q-expansions of E4, E6, Delta and j; the differential equation of j;
modular polynomials for levels 1..5.

The third-order equation of j is checked in theta-form. With d/dz = 2*pi*i*theta
every term of j''' j' - (3/2) j''^2 + R(j) j'^4 carries the same factor
(2*pi*i)^4, so the identity is equivalent to

    theta^3 j * theta j - (3/2) (theta^2 j)^2 + R(j) (theta j)^4 = 0,

verified after clearing the denominator 2 j^2 (j - 1728)^2 of R.

Modular polynomials are computed, never vendored: Phi_N spans the kernel of
F -> F(j(q), j(q^N)) on polynomials of bidegree at most psi(N). Level 2 can
also be built from the three degree-2 transforms j(q^2), j(q^(1/2)) and
j(-q^(1/2)) on the half-integral grid.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .constants import (
    DELTA_POWER, E4_FACTOR, E6_FACTOR, J_SPECIAL_VALUE, MAX_MODULAR_LEVEL,
    R_NUMERATOR_COEFFS, THREE_HALVES,
)
from .errors import InsufficientOrder, ModularDataUnavailable, ParseError, PoleError
from .linear_algebra import RATIONALS, FieldMatrix, solve_affine_system
from .polynomials import MPoly, VariableRegistry
from .series import LaurentSeries

logger = logging.getLogger(__name__)

XY_REGISTRY = VariableRegistry(("X", "Y"))
LEMMA_REGISTRY = VariableRegistry(("z", "c", "d", "e"))

# Entries loaded from a cache file after re-verification; consulted before computing.
_VERIFIED_CACHE: Dict[int, "ModularPolynomial"] = {}


# --- q-expansions ---

def divisor_sum(n: int, power: int) -> int:
    return sum(d ** power for d in range(1, n + 1) if n % d == 0)


@dataclass(frozen=True)
class JExpansion:
    """E4, E6, Delta and j, all known through q^order."""
    order: int
    e4: LaurentSeries
    e6: LaurentSeries
    delta: LaurentSeries
    j: LaurentSeries


def _eisenstein(factor: int, power: int, order: int) -> LaurentSeries:
    terms = {0: 1}
    for n in range(1, order + 1):
        terms[n] = factor * divisor_sum(n, power)
    return LaurentSeries.from_terms(terms, order)


def euler_product(order: int) -> LaurentSeries:
    """prod (1 - q^n) through q^order, from the pentagonal number theorem."""
    terms: Dict[int, int] = {}
    k = 0
    while True:
        first = k * (3 * k - 1) // 2
        if first > order:
            break
        sign = -1 if k % 2 else 1
        terms[first] = terms.get(first, 0) + sign
        second = k * (3 * k + 1) // 2
        if k and second <= order:
            terms[second] = terms.get(second, 0) + sign
        k += 1
    return LaurentSeries.from_terms(terms, order)


@lru_cache(maxsize=16)
def j_series(order: int) -> JExpansion:
    """Exact q-expansions through q^order.

    Args:
        order: Highest exponent to return, at least 2.

    Returns:
        JExpansion: E4 = 1 + 240 sum sigma_3(n) q^n, E6 = 1 - 504 sum sigma_5(n) q^n,
        Delta = q prod (1 - q^n)^24 and j = E4^3 / Delta.
    """
    if order < 2:
        raise InsufficientOrder(f"j_series needs order >= 2, got {order}")
    work = order + 2
    e4 = _eisenstein(E4_FACTOR, 3, work)
    e6 = _eisenstein(E6_FACTOR, 5, work)
    delta = LaurentSeries.monomial(1, work + 1) * euler_product(work) ** DELTA_POWER
    j = e4 ** 3 / delta
    logger.debug(f"j_series: computed through q^{order}")
    return JExpansion(order, e4.truncate(order), e6.truncate(order), delta.truncate(order), j.truncate(order))


def vanishes_through(series: LaurentSeries) -> Optional[Tuple[Fraction, Fraction]]:
    """First (exponent, coefficient) that is nonzero among the known terms, or None."""
    return next(series.items(), None)


def check_expansion_identities(expansion: JExpansion) -> bool:
    """j * Delta = E4^3 and 1728 Delta = E4^3 - E6^2 through the known terms."""
    e4_cubed = expansion.e4 ** 3
    first = expansion.j * expansion.delta - e4_cubed
    second = expansion.delta * J_SPECIAL_VALUE - (e4_cubed - expansion.e6 ** 2)
    return vanishes_through(first) is None and vanishes_through(second) is None


# --- R, eta, Psi over any field ---

def _is_zero(value: Any) -> bool:
    return value == 0


def r_function(y: Any) -> Any:
    """R(y) = (y^2 - 1968 y + 2654208) / (2 y^2 (y - 1728)^2)."""
    if _is_zero(y):
        raise PoleError("y")
    shifted = y - J_SPECIAL_VALUE
    if _is_zero(shifted):
        raise PoleError(f"y - {J_SPECIAL_VALUE}")
    a, b, c = R_NUMERATOR_COEFFS
    return (y * y * a + y * b + c) / (y * y * shifted * shifted * 2)


def eta_function(y0: Any, y1: Any, y2: Any) -> Any:
    """eta = (3/2) y2^2 / y1 - R(y0) y1^3, the value of y''' forced by the equation."""
    if _is_zero(y1):
        raise PoleError("y1")
    return y2 * y2 * THREE_HALVES / y1 - r_function(y0) * y1 * y1 * y1


def psi_function(y0: Any, y1: Any, y2: Any, y3: Any) -> Any:
    """Psi = S(y) + R(y0) y1^2 with the Schwarzian S = y3/y1 - (3/2)(y2/y1)^2."""
    if _is_zero(y1):
        raise PoleError("y1")
    ratio = y2 / y1
    return y3 / y1 - ratio * ratio * THREE_HALVES + r_function(y0) * y1 * y1


def jpoly_suite(kind: str, args: Sequence[Any]) -> Any:
    """Evaluates R, eta or Psi on elements of any field with + - * /.

    Args:
        kind: "R" (one argument), "eta" (three) or "Psi" (four).
        args: Field elements; their == 0 must be a valid zero test.

    Returns:
        The exact field element.

    Raises:
        PoleError: Naming the vanishing denominator ("y", "y - 1728" or "y1").
    """
    if kind == "R":
        return r_function(*args)
    if kind == "eta":
        return eta_function(*args)
    if kind == "Psi":
        return psi_function(*args)
    raise ValueError(f"unknown j-polynomial kind '{kind}'")


# --- The differential equation ---

@dataclass(frozen=True)
class OdeReport:
    """Outcome of the theta-form check of the j equation."""
    order: int
    checked_from: Fraction
    checked_through: Fraction
    violation: Optional[Tuple[Fraction, Fraction]] = None

    @property
    def holds(self) -> bool:
        return self.violation is None

    def lines(self) -> List[str]:
        out = [f"# theta-form differential equation of j, series known through q^{self.order}"]
        out.append(f"checked_exponents={self.checked_from}..{self.checked_through}")
        if self.violation is not None:
            exponent, coeff = self.violation
            out.append(f"violation_exponent={exponent}")
            out.append(f"violation_coefficient={coeff}")
        out.append(f"identity_holds={str(self.holds).lower()}")
        return out


def ode_residual(j: LaurentSeries) -> LaurentSeries:
    """2 j^2 (j-1728)^2 (theta^3 j theta j - (3/2)(theta^2 j)^2) + num(R)(j) (theta j)^4."""
    t1 = j.theta()
    t2 = t1.theta()
    t3 = t2.theta()
    a, b, c = R_NUMERATOR_COEFFS
    shifted = j - J_SPECIAL_VALUE
    clearing = j * j * shifted * shifted
    schwarz_part = (t3 * t1).scale(2) - (t2 * t2).scale(3)
    numerator = j * j * a + j * b + c
    return clearing * schwarz_part + numerator * t1 ** 4


def verify_j_ode(order: int, j: Optional[LaurentSeries] = None) -> OdeReport:
    """Checks every known coefficient of the cleared theta-form equation is 0.

    Args:
        order: Order of the j expansion (at least 5).
        j: Optional explicit series to check instead of j (e.g. a perturbation).

    Returns:
        OdeReport: The checked exponent range and the first violation, if any.
    """
    if order < 5:
        raise InsufficientOrder(f"the differential equation check needs order >= 5, got {order}")
    series = j if j is not None else j_series(order).j
    residual = ode_residual(series.truncate(order))
    violation = vanishes_through(residual)
    # the cleared equation has a pole of order at most six times that of j
    report = OdeReport(order, 6 * series.valuation, residual.order, violation)
    logger.info(f"verify_j_ode(order={order}): holds={report.holds} through q^{report.checked_through}")
    return report


# --- Constant-coordinate lemma ---

def lemma_constant_poly() -> MPoly:
    """Numerator of eta(j, j', j'') for j = (c/2) z^2 + d z + e, j' = c z + d, j'' = c.

    Clearing 2 j^2 (j - 1728)^2 (c z + d) from eta = 0 leaves
    3 c^2 j^2 (j - 1728)^2 - (j^2 - 1968 j + 2654208)(c z + d)^4,
    a polynomial in z over Q[c, d, e] with top coefficient -c^6/16.
    """
    z, c, d, e = (MPoly.variable(LEMMA_REGISTRY, n) for n in LEMMA_REGISTRY.names)
    j = c * z * z * Fraction(1, 2) + d * z + e
    jp = c * z + d
    a, b, k = R_NUMERATOR_COEFFS
    shifted = j - J_SPECIAL_VALUE
    poly = c * c * j * j * shifted * shifted * 3 - (j * j * a + j * b + k) * jp ** 4
    top = lemma_leading_coefficient(poly)
    if top.is_zero():
        raise ArithmeticError("the lemma polynomial degenerated to zero")
    logger.debug(f"lemma polynomial has z-degree {poly.degree('z')}, top coefficient {top.to_expr()}")
    return poly


def lemma_leading_coefficient(poly: MPoly) -> MPoly:
    parts = poly.coefficients_in("z")
    return parts[max(parts)] if parts else MPoly.zero(poly.registry)


def specialize_lemma_poly(c: Any, d: Any, e: Any) -> MPoly:
    """The lemma polynomial at numeric constants; a polynomial in z alone."""
    return lemma_constant_poly().substitute_many({"c": c, "d": d, "e": e})


# --- Modular polynomials ---

@dataclass(frozen=True)
class ModularPolynomial:
    """Phi_N as an integer polynomial in X, Y."""
    level: int
    poly: MPoly

    def is_symmetric(self) -> bool:
        swapped = self.poly.embed(XY_REGISTRY, {"X": "Y", "Y": "X"})
        return swapped == self.poly

    def coefficient(self, a: int, b: int) -> Fraction:
        return self.poly.term_dict().get((a, b), Fraction(0))

    def degree_x(self) -> int:
        return self.poly.degree("X")


def psi(level: int) -> int:
    """Index of Gamma_0(N): N * prod over primes p | N of (1 + 1/p)."""
    result = Fraction(level)
    m, p = level, 2
    while m > 1:
        if m % p == 0:
            result *= Fraction(p + 1, p)
            while m % p == 0:
                m //= p
        p += 1
    return int(result)


def _check_level(level: int):
    if not 1 <= level <= MAX_MODULAR_LEVEL:
        raise ModularDataUnavailable(f"modular polynomials are available for levels 1..{MAX_MODULAR_LEVEL}, not {level}")


def matching_requirements(level: int) -> Tuple[int, int, int]:
    """(lowest exponent, highest matched exponent, j order needed) for coefficient matching.

    A nonzero F(j(tau), j(N tau)) of bidegree <= psi has at most 2 psi^2 poles
    on X_0(N), so vanishing through q^(2 psi^2) forces F = 0 there.
    """
    deg = psi(level)
    low = -(level + 1) * deg
    high = 2 * deg * deg
    return low, high, high + (level + 1) * deg + 1


def _powers(series: LaurentSeries, top: int) -> List[LaurentSeries]:
    out = [LaurentSeries.one(series.order)]
    for _ in range(top):
        out.append(out[-1] * series)
    return out


def _integral_poly(coeffs: Dict[Tuple[int, int], Fraction], level: int) -> ModularPolynomial:
    for (a, b), c in coeffs.items():
        if c.denominator != 1:
            raise ArithmeticError(f"non-integral coefficient {c} at X^{a} Y^{b} for level {level}")
    return ModularPolynomial(level, MPoly(XY_REGISTRY, coeffs))


def modular_polynomial_by_matching(level: int, order: Optional[int] = None) -> ModularPolynomial:
    """Phi_N as the normalized kernel of F -> F(j(q), j(q^N)).

    Raises:
        InsufficientOrder: If `order` is below what the matching needs.
        ModularDataUnavailable: For levels outside 1..5.
    """
    _check_level(level)
    deg = psi(level)
    low, high, needed = matching_requirements(level)
    if order is None:
        order = needed
    if order < needed:
        raise InsufficientOrder(f"level {level} needs j through q^{needed}, got order {order}")
    j = j_series(order).j
    jx = _powers(j, deg)
    jy = _powers(j.substitute_power(level), deg)
    monomials = [(a, b) for a in range(deg + 1) for b in range(deg + 1)]
    columns = []
    for a, b in monomials:
        product_series = jx[a] * jy[b]
        columns.append([product_series.coefficient(e) for e in range(low, high + 1)])
    rows = [[col[r] for col in columns] for r in range(high - low + 1)]
    matrix = FieldMatrix.build(RATIONALS, rows)
    solution = solve_affine_system(matrix, [Fraction(0)] * matrix.nrows)
    if solution.dimension != 1:
        raise InsufficientOrder(f"level {level}: kernel of dimension {solution.dimension}, expected 1")
    vec = solution.kernel[0]
    lead = vec[monomials.index((deg, 0))]
    if lead == 0:
        raise ArithmeticError(f"level {level}: kernel vector has no X^{deg} term")
    coeffs = {m: c / lead for m, c in zip(monomials, vec) if c}
    logger.info(f"modular polynomial of level {level} computed by matching ({len(coeffs)} terms)")
    return _integral_poly(coeffs, level)


def polynomial_in_j(series: LaurentSeries, j: LaurentSeries) -> Dict[int, Fraction]:
    """Writes a q-series with integral exponents as a polynomial in j by peeling poles.

    Raises:
        ArithmeticError: If the remainder after removing poles and the constant is nonzero.
    """
    rest = series.regrid(1)
    result: Dict[int, Fraction] = {}
    powers: Dict[int, LaurentSeries] = {}
    while not rest.is_zero() and rest.val < 0:
        m = -rest.val
        if m not in powers:
            powers[m] = j ** m
        c = rest.leading_coefficient()
        result[m] = c
        rest = rest - powers[m].scale(c)
    constant = rest.coefficient(0) if rest.prec > 0 else Fraction(0)
    if constant:
        result[0] = constant
    rest = rest - constant
    if vanishes_through(rest) is not None:
        raise ArithmeticError("series is not a polynomial in j through the known terms")
    return result


def modular_polynomial_by_product(order: int = 24) -> ModularPolynomial:
    """Phi_2 = prod (X - f) over f in {j(q^2), j(q^(1/2)), j(-q^(1/2))}.

    The elementary symmetric functions of the three transforms are twist
    invariant, so they live on the integral grid; each is then rewritten as a
    polynomial in Y = j(q).
    """
    j = j_series(order).j
    roots = [j.substitute_power(2).regrid(2), j.root_grid(), j.root_grid().twist()]
    e1 = roots[0] + roots[1] + roots[2]
    e2 = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2]
    e3 = roots[0] * roots[1] * roots[2]
    coeffs: Dict[Tuple[int, int], Fraction] = {(3, 0): Fraction(1)}
    for x_power, sign, sym in ((2, -1, e1), (1, 1, e2), (0, -1, e3)):
        if not sym.on_integral_grid():
            raise ArithmeticError("symmetric function left the integral grid")
        for y_power, c in polynomial_in_j(sym, j).items():
            coeffs[(x_power, y_power)] = coeffs.get((x_power, y_power), Fraction(0)) + sign * c
    logger.info("modular polynomial of level 2 computed from the degree-2 transforms")
    return _integral_poly({m: c for m, c in coeffs.items() if c}, 2)


@lru_cache(maxsize=None)
def _computed_modular_polynomial(level: int) -> ModularPolynomial:
    return modular_polynomial_by_matching(level)


def modular_polynomial(level: int, order: Optional[int] = None) -> ModularPolynomial:
    """Phi_N for 1 <= N <= 5.

    Args:
        level: N.
        order: Optional j order for the matching; must meet the requirement.

    Returns:
        ModularPolynomial: Integer coefficients, normalized so X^psi(N) has coefficient 1.
    """
    _check_level(level)
    if order is not None:
        return modular_polynomial_by_matching(level, order)
    if level in _VERIFIED_CACHE:
        return _VERIFIED_CACHE[level]
    return _computed_modular_polynomial(level)


def verify_modular_polynomial(phi: ModularPolynomial, order: int) -> Optional[Tuple[Fraction, Fraction]]:
    """Evaluates Phi_N(j(q), j(q^N)) through q^order; returns the first nonzero term or None."""
    deg = max(phi.degree_x(), phi.poly.degree("Y"), 1)
    work = order + (phi.level + 1) * deg + 1
    j = j_series(work).j
    value = phi.poly.evaluate({"X": j, "Y": j.substitute_power(phi.level)},
                              zero=LaurentSeries.from_terms({}, work))
    value = value.truncate(order)
    if value.order < order:
        raise InsufficientOrder(f"substitution known only through q^{value.order}")
    return vanishes_through(value)


def modular_relation(phi: ModularPolynomial, registry: VariableRegistry, first: str, second: str) -> MPoly:
    """Phi_N(first, second) as a polynomial over `registry`."""
    values = {"X": MPoly.variable(registry, first), "Y": MPoly.variable(registry, second)}
    return phi.poly.evaluate(values, zero=MPoly.zero(registry))


def evaluate_modular_polynomial(phi: ModularPolynomial, first: Any, second: Any, zero: Any = 0) -> Any:
    """Phi_N on field elements."""
    return phi.poly.evaluate({"X": first, "Y": second}, zero=zero)


# --- Cache file ---

def save_modular_polynomial_cache(path: str, polynomials: Iterable[ModularPolynomial]):
    """Writes "level N" blocks followed by "monomial a b coeff" lines."""
    with open(path, "w", encoding="utf-8") as f:
        for phi in sorted(polynomials, key=lambda p: p.level):
            f.write(f"level {phi.level}\n")
            for (a, b), c in sorted(phi.poly.term_dict().items(), reverse=True):
                f.write(f"monomial {a} {b} {c.numerator}\n")
    logger.info(f"wrote modular polynomial cache to {path}")


def parse_modular_polynomial_cache(text: str) -> Dict[int, ModularPolynomial]:
    blocks: Dict[int, Dict[Tuple[int, int], int]] = {}
    current: Optional[int] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "level" and len(parts) == 2:
                current = int(parts[1])
                blocks[current] = {}
            elif parts[0] == "monomial" and len(parts) == 4 and current is not None:
                blocks[current][(int(parts[1]), int(parts[2]))] = int(parts[3])
            else:
                raise ParseError(f"unexpected cache line '{line}'", lineno, 1)
        except ValueError:
            raise ParseError(f"malformed integer in '{line}'", lineno, 1) from None
    return {level: ModularPolynomial(level, MPoly(XY_REGISTRY, terms)) for level, terms in blocks.items()}


def load_modular_polynomial_cache(path: str, verify_order: int = 20) -> Dict[int, ModularPolynomial]:
    """Loads cached Phi_N and keeps only entries passing Phi_N(j(q), j(q^N)) = 0."""
    with open(path, "r", encoding="utf-8") as f:
        entries = parse_modular_polynomial_cache(f.read())
    trusted = {}
    for level, phi in entries.items():
        if not 1 <= level <= MAX_MODULAR_LEVEL:
            logger.warning(f"cache entry for unsupported level {level} ignored")
            continue
        if verify_modular_polynomial(phi, verify_order) is None:
            trusted[level] = phi
            _VERIFIED_CACHE[level] = phi
        else:
            logger.warning(f"cache entry for level {level} fails the substitution check; ignored")
    logger.info(f"loaded {len(trusted)} verified modular polynomials from {path}")
    return trusted


# Comments:
# - Every coefficient is an exact Fraction; the cache stores integers only.
# - The matching kernel is one-dimensional by the pole count, which is checked rather than assumed.
