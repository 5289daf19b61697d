# derivations.py
"""Coordinate fields of prime varieties and derivation witnesses.

The coordinate field K = Frac(Q[v, t, c] / P) of a variety (coordinates v,
derivation parameters t, constant parameters c) is presented by a grevlex
Gröbner basis of P. Elements are quotients whose numerator and denominator are
kept in normal form; since P is prime by contract, an element is zero exactly
when its numerator reduces to zero.

A derivation delta of K extending sum_k lambda_k D_k (D_k = d/dt_k) is the same
as a vector (delta v, lambda) killing the prolongation of every generator g:

    sum_v dg/dv * delta(v) + sum_k lambda_k * dg/dt_k = 0.

E_J membership adds, per index block, delta(j) = jp delta(z),
delta(jp) = jpp delta(z) and delta(jpp) = eta(j, jp, jpp) delta(z);
the exponential model adds delta(y) = y delta(x). Every witness is found by
solving this linear system over K.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .constants import DEFAULT_NMAX, DEFAULT_NONCONSTANT_SEARCH_LIMIT, DEFAULT_STEP_BUDGET
from .errors import (
    ConstantForced, NotPrimeAssumed, PoleError, RegistryMismatch,
    ResourceLimit, SingularLocus, UnitIdeal, UnsupportedInput, ZeroDenominator,
)
from .groebner import GroebnerBasis, groebner_of, ideal_dimension, normal_form
from .linear_algebra import FieldMatrix, FieldOps, solve_affine_system
from .modular import jpoly_suite
from .polynomials import GREVLEX, MPoly, RatFunc, VariableRegistry, ratfunc_normalize
from .varieties import Variety, check_broadness, check_freeness, singular_locus_check

logger = logging.getLogger(__name__)


# --- Base differential fields ---

@dataclass(frozen=True)
class BaseDiffField:
    """Q(t_1..t_m, c_1..c_r) with D_k = d/dt_k; the c's are constants.

    With no t the base is a field of constants and carries a single zero
    derivation, so a witness still has one derivation index.
    """
    derivation_params: Tuple[str, ...] = ()
    constant_params: Tuple[str, ...] = ()

    @classmethod
    def of(cls, variety: Variety) -> "BaseDiffField":
        return cls(variety.base_params, variety.constant_params)

    @property
    def constants_only(self) -> bool:
        return not self.derivation_params

    @property
    def derivation_count(self) -> int:
        return max(1, len(self.derivation_params))

    def describe(self) -> str:
        if self.constants_only:
            return "Q"
        return f"Q({','.join(self.derivation_params)})"


# --- Coordinate fields ---

class CoordElement:
    """Element num/den of a coordinate field, both in normal form modulo P."""
    __slots__ = ("field", "num", "den")
    __hash__ = None  # representatives are not canonical

    def __init__(self, field: "CoordField", num: MPoly, den: MPoly):
        self.field = field
        self.num = num
        self.den = den

    def _coerce(self, other: Any) -> "CoordElement":
        if isinstance(other, CoordElement):
            if other.field is not self.field and other.field.basis != self.field.basis:
                raise RegistryMismatch("elements of different coordinate fields")
            return other
        if isinstance(other, (int, Fraction, MPoly, RatFunc)):
            return self.field.coerce(other)
        return NotImplemented

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other: Any) -> "CoordElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return self.field.make(self.num + other.num, self.den)
        return self.field.make(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "CoordElement":
        return CoordElement(self.field, -self.num, self.den)

    def __sub__(self, other: Any) -> "CoordElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "CoordElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other: Any) -> "CoordElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.field.make(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "CoordElement":
        if self.is_zero():
            raise ZeroDenominator("inverse of zero in a coordinate field")
        return self.field.make(self.den, self.num)

    def __truediv__(self, other: Any) -> "CoordElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Any) -> "CoordElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, exponent: int) -> "CoordElement":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return self.field.make(self.num ** exponent, self.den ** exponent)

    def __eq__(self, other: object) -> bool:
        coerced = self._coerce(other)
        if coerced is NotImplemented:
            return NotImplemented
        return (self - coerced).is_zero()

    def partial(self, name: str) -> "CoordElement":
        """Derivative of this representative; only meaningful modulo the Jacobian of P."""
        return self.field.make(self.num.partial(name) * self.den - self.num * self.den.partial(name),
                               self.den * self.den)

    def to_expr(self) -> str:
        return RatFunc._trusted(self.num, self.den).to_expr()

    def __repr__(self) -> str:
        return f"CoordElement({self.to_expr()})"

    __str__ = to_expr


class CoordField(FieldOps):
    """Fraction field of Q[registry] / P for a prime ideal P.

    Attributes:
        registry (VariableRegistry): Coordinates followed by base and constant parameters.
        basis (GroebnerBasis): Grevlex basis of P.
        base (BaseDiffField): Which registry variables are parameters.
    """

    def __init__(self, registry: VariableRegistry, generators: Sequence[MPoly], base: BaseDiffField,
                 step_budget: int = DEFAULT_STEP_BUDGET):
        self.registry = registry
        self.base = base
        self.step_budget = step_budget
        self.basis: GroebnerBasis = groebner_of(registry, list(generators), GREVLEX, step_budget)
        if self.basis.is_unit():
            raise UnitIdeal("the generators define the empty variety")

    # --- FieldOps ---

    def zero(self) -> CoordElement:
        return CoordElement(self, MPoly.zero(self.registry), MPoly.one(self.registry))

    def one(self) -> CoordElement:
        return CoordElement(self, MPoly.one(self.registry), MPoly.one(self.registry))

    def coerce(self, value: Any) -> CoordElement:
        if isinstance(value, CoordElement):
            return value
        if isinstance(value, (int, Fraction)):
            return CoordElement(self, MPoly.constant(self.registry, value), MPoly.one(self.registry))
        if isinstance(value, MPoly):
            return self.make(value, MPoly.one(self.registry))
        if isinstance(value, RatFunc):
            return self.make(value.num, value.den)
        raise TypeError(f"cannot coerce {type(value).__name__} into a coordinate field")

    def is_zero(self, value: Any) -> bool:
        return self.coerce(value).is_zero()

    def describe(self) -> str:
        return f"Frac(Q[{', '.join(self.registry.names)}]/P), {len(self.basis)} basis elements"

    # --- construction ---

    def reduce(self, poly: MPoly) -> MPoly:
        return normal_form(poly, self.basis, self.step_budget).with_order(GREVLEX)

    def make(self, num: MPoly, den: MPoly) -> CoordElement:
        """Normalized element num/den; ZeroDenominator if den vanishes on the variety."""
        den = self.reduce(den)
        if den.is_zero():
            raise ZeroDenominator("denominator vanishes on the variety")
        num = self.reduce(num)
        if num.is_zero():
            return self.zero()
        num, den = ratfunc_normalize(num, den)
        return CoordElement(self, self.reduce(num), self.reduce(den))

    def var(self, name: str) -> CoordElement:
        return self.coerce(MPoly.variable(self.registry, name))

    def poly(self, poly: MPoly) -> CoordElement:
        return self.coerce(poly)

    def evaluate(self, poly: MPoly) -> CoordElement:
        """Image of a polynomial over the same registry."""
        if poly.registry != self.registry:
            raise RegistryMismatch("polynomial over a different registry")
        return self.coerce(poly)

    def transcendence_degree(self) -> int:
        """Transcendence degree of K over the base Q(parameters)."""
        params = len(self.base.derivation_params) + len(self.base.constant_params)
        return ideal_dimension(self.basis) - params


def coordinate_field(variety: Variety, base: Optional[BaseDiffField] = None,
                     step_budget: int = DEFAULT_STEP_BUDGET) -> CoordField:
    """The field of rational functions on a prime variety.

    Raises:
        NotPrimeAssumed: If the variety does not declare its ideal prime.
        UnitIdeal: If the variety is empty.
    """
    if not variety.assume_prime:
        raise NotPrimeAssumed("coordinate fields need assume_prime=true")
    base = base or BaseDiffField.of(variety)
    if base.derivation_params != variety.base_params or base.constant_params != variety.constant_params:
        raise ValueError(f"base {base.describe()} does not match the variety's parameters {variety.params}")
    return CoordField(variety.registry, variety.generators, base, step_budget)


# --- Constraint systems ---

@dataclass(frozen=True)
class ConstraintSystem:
    """Linear conditions on (delta v_1, ..., delta v_N, lambda_1, ..., lambda_m).

    Attributes:
        field (CoordField): Where the entries live.
        matrix (FieldMatrix): One row per generator prolongation and model relation.
        unknowns (Tuple[str, ...]): Column labels, "d(v)" then "lambda_k".
        provenance (Tuple[str, ...]): Row labels.
        coordinates (Tuple[str, ...]): Coordinate names, in column order.
        generator_rows (int): The first rows are generator prolongations.
    """
    field: CoordField
    matrix: FieldMatrix
    unknowns: Tuple[str, ...]
    provenance: Tuple[str, ...]
    coordinates: Tuple[str, ...]
    generator_rows: int

    @property
    def lambda_count(self) -> int:
        return len(self.unknowns) - len(self.coordinates)

    def coordinate_block(self, rows: Optional[Sequence[int]] = None) -> FieldMatrix:
        width = len(self.coordinates)
        picked = self.matrix.rows if rows is None else tuple(self.matrix.rows[r] for r in rows)
        return FieldMatrix(self.field, tuple(row[:width] for row in picked), width)

    def lambda_column(self, k: int) -> Tuple[CoordElement, ...]:
        return self.matrix.column(len(self.coordinates) + k)


def model_relations(variety: Variety, K: CoordField, i: int) -> List[Tuple[str, Dict[str, CoordElement]]]:
    """The model rows of block i as (label, {coordinate: coefficient})."""
    tag = variety.model.tag
    one = K.one()
    if tag == "J":
        z, j, jp, jpp = variety.model.block(i)
        vj, vjp, vjpp = K.var(j), K.var(jp), K.var(jpp)
        try:
            eta = jpoly_suite("eta", (vj, vjp, vjpp))
        except PoleError as e:
            raise SingularLocus(f"eta is undefined on block {i}: {e}") from e
        return [
            (f"d{j} = {jp}*d{z}", {j: one, z: -vjp}),
            (f"d{jp} = {jpp}*d{z}", {jp: one, z: -vjpp}),
            (f"d{jpp} = eta*d{z}", {jpp: one, z: -eta}),
        ]
    if tag == "exp":
        x, y = variety.model.block(i)
        return [(f"d{y} = {y}*d{x}", {y: one, x: -K.var(y)})]
    raise UnsupportedInput("model j carries no derivative coordinates; lift it to model J first")


def assemble_constraints(K: CoordField, variety: Variety) -> ConstraintSystem:
    """Generator prolongations followed by the model relations of every block.

    Raises:
        SingularLocus: If eta has a pole on the variety.
    """
    coords = variety.coordinates()
    t_params = K.base.derivation_params
    m = K.base.derivation_count
    rows: List[List[CoordElement]] = []
    provenance: List[str] = []
    for g_index, g in enumerate(variety.generators, start=1):
        row = [K.evaluate(g.partial(v)) for v in coords]
        for k in range(m):
            row.append(K.evaluate(g.partial(t_params[k])) if k < len(t_params) else K.zero())
        rows.append(row)
        provenance.append(f"generator {g_index}: {g.to_expr()}")
    for i in range(1, variety.n + 1):
        for label, coeffs in model_relations(variety, K, i):
            rows.append([coeffs.get(v, K.zero()) for v in coords] + [K.zero()] * m)
            provenance.append(f"model: {label}")
    unknowns = tuple(f"d({v})" for v in coords) + tuple(f"lambda_{k + 1}" for k in range(m))
    matrix = FieldMatrix(K, tuple(tuple(r) for r in rows), len(unknowns))
    logger.debug(f"constraint system: {matrix.nrows} rows, {len(unknowns)} unknowns")
    return ConstraintSystem(K, matrix, unknowns, tuple(provenance), coords, len(variety.generators))


def lambda_rank(K: CoordField, system: ConstraintSystem) -> int:
    """Rank of the model rows modulo the span of the generator Jacobian rows."""
    jac_rank = system.coordinate_block(range(system.generator_rows)).rank()
    return system.coordinate_block().rank() - jac_rank


def homogeneous_dimension(system: ConstraintSystem) -> int:
    """Dimension of the solutions with lambda = 0."""
    return len(system.coordinates) - system.coordinate_block().rank()


# --- Witnesses ---

@dataclass
class DerivationWitness:
    """Derivations delta_1..delta_m on a host field containing a point of V.

    The host is a coordinate field over the variety's registry whose ideal
    contains I(V); the point is the image of the registry variables (the
    generic point of V when the host ideal is I(V) itself).

    Attributes:
        variety (Variety): The variety the point lies on.
        host (CoordField): Field of the point and the derivation values.
        deltas (List[Dict[str, CoordElement]]): delta_k(v) per coordinate v.
        lambdas (List[Tuple[CoordElement, ...]]): delta_k restricted to the base is sum_l lambda_k[l] D_l.
        host_extra (Tuple[MPoly, ...]): Generators of the host ideal beyond those of V.
        flags (Dict[str, bool]): all_nonconstant and verified.
        commutators (List[Tuple[int, int, str, CoordElement]]): Residues [delta_a, delta_b](v).
    """
    variety: Variety
    host: CoordField
    deltas: List[Dict[str, CoordElement]]
    lambdas: List[Tuple[CoordElement, ...]]
    host_extra: Tuple[MPoly, ...] = ()
    flags: Dict[str, bool] = field(default_factory=dict)
    commutators: List[Tuple[int, int, str, CoordElement]] = field(default_factory=list)

    @property
    def derivation_count(self) -> int:
        return len(self.deltas)

    def delta(self, k: int, name: str) -> CoordElement:
        return self.deltas[k][name]

    def host_derivation(self, k: int) -> Dict[str, CoordElement]:
        """delta_k on every registry variable: coordinates, t's (via lambda) and constants (0)."""
        K = self.host
        table = dict(self.deltas[k])
        for l, t in enumerate(K.base.derivation_params):
            table[t] = self.lambdas[k][l]
        for c in K.base.constant_params:
            table[c] = K.zero()
        return table


def apply_derivation(K: CoordField, table: Mapping[str, CoordElement], element: Any) -> CoordElement:
    """delta(element) by the chain rule on numerator and denominator.

    Args:
        K: The host field.
        table: delta on every registry variable occurring in the element.
        element: A host element (or a polynomial over the host registry).

    Returns:
        CoordElement: (delta(num) den - num delta(den)) / den^2.
    """
    e = K.coerce(element)

    def on_poly(p: MPoly) -> CoordElement:
        total = K.zero()
        for name in p.used_names():
            value = table.get(name)
            if value is None:
                raise KeyError(f"derivation value of '{name}' is unknown")
            value = K.coerce(value)
            if not value.is_zero():
                total = total + K.evaluate(p.partial(name)) * value
        return total

    dnum = on_poly(e.num)
    if e.den.is_constant():
        return dnum / K.coerce(e.den.constant_value())
    dden = on_poly(e.den)
    den = K.coerce(e.den)
    return (dnum * den - K.coerce(e.num) * dden) / (den * den)


@dataclass(frozen=True)
class VerificationReport:
    """Exact checks of a witness; negative outcomes are listed, never raised."""
    failures: Tuple[str, ...]
    all_nonconstant: bool
    third_derivatives: Tuple[str, ...] = ()

    @property
    def verified(self) -> bool:
        return not self.failures

    def lines(self) -> List[str]:
        out = ["# witness verification: generator prolongations and model relations"]
        out.extend(f"failure={f}" for f in self.failures)
        out.extend(f"third_derivative={t}" for t in self.third_derivatives)
        out.append(f"all_nonconstant={str(self.all_nonconstant).lower()}")
        out.append(f"verified={str(self.verified).lower()}")
        return out


def verify_witness(variety: Variety, witness: DerivationWitness) -> VerificationReport:
    """Checks the point, every prolongation and every model relation exactly.

    For model J, when jp_i is nonzero the value y''' = eta(j_i, jp_i, jpp_i)
    is exhibited; when jp_i vanishes the block is accepted only if all its
    derivation values are zero (the all-constant case).
    """
    K = witness.host
    failures: List[str] = []
    coords = variety.coordinates()
    for idx, g in enumerate(variety.generators, start=1):
        if not K.evaluate(g).is_zero():
            failures.append(f"point not on V: generator {idx}")
    thirds: List[str] = []
    for k in range(witness.derivation_count):
        missing = [v for v in coords if v not in witness.deltas[k]]
        if missing:
            failures.append(f"derivation {k + 1} lacks values for {', '.join(missing)}")
            continue
        table = witness.host_derivation(k)
        for idx, g in enumerate(variety.generators, start=1):
            if not apply_derivation(K, table, g).is_zero():
                failures.append(f"derivation {k + 1}: prolongation of generator {idx} is nonzero")
        for i in range(1, variety.n + 1):
            failures.extend(_model_failures(variety, K, witness, k, i, thirds))
    nonconstant = all(any(not witness.deltas[k][v].is_zero() for k in range(witness.derivation_count)
                          if v in witness.deltas[k]) for v in coords)
    report = VerificationReport(tuple(failures), nonconstant, tuple(thirds))
    witness.flags["verified"] = report.verified
    witness.flags["all_nonconstant"] = nonconstant
    logger.info(f"verify_witness: verified={report.verified} all_nonconstant={nonconstant}")
    return report


def _model_failures(variety: Variety, K: CoordField, witness: DerivationWitness, k: int, i: int,
                    thirds: List[str]) -> List[str]:
    d = witness.deltas[k]
    block = variety.model.block(i)
    out = []
    if variety.model.tag == "exp":
        x, y = block
        if not (d[y] - K.var(y) * d[x]).is_zero():
            out.append(f"derivation {k + 1}: d{y} - {y}*d{x} != 0")
        return out
    if variety.model.tag != "J":
        return [f"model {variety.model.tag} has no derivative relations"]
    z, j, jp, jpp = block
    vj, vjp, vjpp = K.var(j), K.var(jp), K.var(jpp)
    if not (d[j] - vjp * d[z]).is_zero():
        out.append(f"derivation {k + 1}: d{j} - {jp}*d{z} != 0")
    if not (d[jp] - vjpp * d[z]).is_zero():
        out.append(f"derivation {k + 1}: d{jp} - {jpp}*d{z} != 0")
    if vjp.is_zero():
        if any(not d[v].is_zero() for v in block):
            out.append(f"derivation {k + 1}: {jp} = 0 but block {i} is not constant")
        return out
    try:
        eta = jpoly_suite("eta", (vj, vjp, vjpp))
    except PoleError as e:
        out.append(f"derivation {k + 1}: eta undefined on block {i} ({e.denominator})")
        return out
    if not (d[jpp] - eta * d[z]).is_zero():
        out.append(f"derivation {k + 1}: d{jpp} - eta*d{z} != 0")
    if k == 0:
        thirds.append(f"{jpp}'={eta.to_expr()}")
    return out


# --- Constructions ---

def _check_singular(variety: Variety, step_budget: int):
    if variety.model.tag == "J":
        report = singular_locus_check(variety, step_budget)
        if not report.passes:
            raise SingularLocus(f"vanishing on V: {', '.join(report.failures)}")


def _solve_for_lambda(system: ConstraintSystem, lam: Sequence[Any], override_first: bool) -> Dict[str, CoordElement]:
    """Coordinate values for a fixed lambda vector, kernel parameters set to 0.

    With `override_first`, delta of the first coordinate is set to 1 whenever
    the solution space allows it.
    """
    K = system.field
    coords = system.coordinates
    block = system.coordinate_block()
    rhs = []
    for r in range(system.matrix.nrows):
        total = K.zero()
        for k, l in enumerate(lam):
            entry = system.matrix.rows[r][len(coords) + k]
            if not K.is_zero(l) and not entry.is_zero():
                total = total + entry * l
        rhs.append(-total)
    solution = solve_affine_system(block, rhs)
    values = list(solution.particular)
    if override_first:
        lead = next((vec for vec in solution.kernel if not vec[0].is_zero()), None)
        if lead is not None:
            scale = (K.one() - values[0]) / lead[0]
            values = [v + scale * w for v, w in zip(values, lead)]
            logger.debug(f"free functional d({coords[0]}) set to 1")
    return dict(zip(coords, values))


def extend_derivation(variety: Variety, base: Optional[BaseDiffField] = None,
                      step_budget: int = DEFAULT_STEP_BUDGET) -> DerivationWitness:
    """A derivation of K extending D with lambda = 1 (the canonical witness).

    Kernel parameters are set to 0 except that d(z_1) (d(x_1) for model exp)
    is set to 1 when that functional is not determined by the system.

    Raises:
        NotPrimeAssumed, UnitIdeal: From the coordinate field.
        SingularLocus: If j_i, j_i - 1728 or jp_i vanishes on V.
        Infeasible: If no derivation extends D.
    """
    base = base or BaseDiffField.of(variety)
    if base.derivation_count != 1:
        raise UnsupportedInput("extend_derivation needs a base with one derivation; use extend_derivations_multi")
    K = coordinate_field(variety, base, step_budget)
    _check_singular(variety, step_budget)
    system = assemble_constraints(K, variety)
    values = _solve_for_lambda(system, [K.one()], override_first=True)
    witness = DerivationWitness(variety, K, [values], [(K.one(),)])
    verify_witness(variety, witness)
    logger.info(f"extend_derivation: witness constructed, flags {witness.flags}")
    return witness


def extend_derivations_multi(variety: Variety, base: Optional[BaseDiffField] = None,
                             step_budget: int = DEFAULT_STEP_BUDGET) -> DerivationWitness:
    """delta_1..delta_m with delta_k extending D_k (lambda = k-th unit vector).

    The d(first coordinate) := 1 policy applies to delta_1 only. Commutator
    residues [delta_a, delta_b](v) are computed on every coordinate and
    recorded, not asserted.
    """
    base = base or BaseDiffField.of(variety)
    if len(base.derivation_params) < 2:
        raise UnsupportedInput("extend_derivations_multi needs at least two base derivations")
    K = coordinate_field(variety, base, step_budget)
    _check_singular(variety, step_budget)
    system = assemble_constraints(K, variety)
    m = base.derivation_count
    deltas, lambdas = [], []
    for k in range(m):
        lam = tuple(K.one() if l == k else K.zero() for l in range(m))
        deltas.append(_solve_for_lambda(system, lam, override_first=(k == 0)))
        lambdas.append(lam)
    witness = DerivationWitness(variety, K, deltas, lambdas)
    witness.commutators = commutator_residues(witness)
    verify_witness(variety, witness)
    nonzero = sum(1 for *_, r in witness.commutators if not r.is_zero())
    logger.info(f"extend_derivations_multi: {m} derivations, {nonzero} nonzero commutator residues")
    return witness


def commutator_residues(witness: DerivationWitness) -> List[Tuple[int, int, str, CoordElement]]:
    K = witness.host
    out = []
    for a in range(witness.derivation_count):
        for b in range(a + 1, witness.derivation_count):
            ta, tb = witness.host_derivation(a), witness.host_derivation(b)
            for v in witness.variety.coordinates():
                residue = apply_derivation(K, ta, tb[v]) - apply_derivation(K, tb, ta[v])
                out.append((a + 1, b + 1, v, residue))
    return out


def extend_derivation_nonconstant(variety: Variety, search_limit: int = DEFAULT_NONCONSTANT_SEARCH_LIMIT,
                                  step_budget: int = DEFAULT_STEP_BUDGET, nmax: int = DEFAULT_NMAX) -> DerivationWitness:
    """A derivation over the constants making every coordinate nonconstant.

    Solves the homogeneous system; a coordinate functional vanishing on the
    whole kernel basis forces that coordinate to be constant. Otherwise
    delta = sum_i c^i k_i for the smallest integer c >= 1 with every
    coordinate value nonzero. In model J, failures of strong broadness or of
    freeness up to level `nmax` are logged as warnings.

    Raises:
        ConstantForced: Naming the coordinates killed by every solution.
        SingularLocus: If eta has a pole on V.
        ResourceLimit: If no c up to `search_limit` works.
    """
    if variety.base_params:
        raise UnsupportedInput("the nonconstant construction works over a base of constants")
    base = BaseDiffField.of(variety)
    K = coordinate_field(variety, base, step_budget)
    _check_singular(variety, step_budget)
    if variety.model.tag == "J":
        broadness = check_broadness(variety, step_budget)
        if not broadness.strongly_broad:
            logger.warning("extend_derivation_nonconstant: variety is not strongly J-broad")
        freeness = check_freeness(variety, nmax, step_budget)
        if not freeness.free:
            logger.warning(f"extend_derivation_nonconstant: variety is not J-free up to level {nmax} "
                           f"(constant: {list(freeness.constant_coordinates)}, relations: {list(freeness.modular_relations)})")
    system = assemble_constraints(K, variety)
    coords = system.coordinates
    solution = solve_affine_system(system.coordinate_block(), [K.zero()] * system.matrix.nrows)
    kernel = solution.kernel
    forced = [v for idx, v in enumerate(coords) if all(vec[idx].is_zero() for vec in kernel)]
    if forced:
        raise ConstantForced(forced)
    for c in range(1, search_limit + 1):
        values = [K.zero()] * len(coords)
        power = Fraction(1)
        for vec in kernel:
            values = [v + w * power for v, w in zip(values, vec)]
            power *= c
        if all(not v.is_zero() for v in values):
            logger.info(f"extend_derivation_nonconstant: c = {c} over a kernel of dimension {len(kernel)}")
            witness = DerivationWitness(variety, K, [dict(zip(coords, values))], [(K.zero(),)])
            verify_witness(variety, witness)
            return witness
    raise ResourceLimit(f"no c <= {search_limit} makes every coordinate nonconstant")


def witness_in_host(variety: Variety, host: CoordField, deltas: List[Dict[str, CoordElement]],
                    lambdas: List[Tuple[CoordElement, ...]], host_extra: Sequence[MPoly] = ()) -> DerivationWitness:
    """Wraps explicit values (e.g. lifted or parsed) as a witness and verifies it."""
    witness = DerivationWitness(variety, host, deltas, lambdas, tuple(host_extra))
    verify_witness(variety, witness)
    return witness


def host_field(variety: Variety, extra: Sequence[MPoly] = (), step_budget: int = DEFAULT_STEP_BUDGET) -> CoordField:
    """Coordinate field of V cut by extra equations (the host of a non-generic point)."""
    if not variety.assume_prime:
        raise NotPrimeAssumed("witness hosts need assume_prime=true")
    return CoordField(variety.registry, list(variety.generators) + list(extra), BaseDiffField.of(variety), step_budget)


# Comments:
# - Witnesses are deterministic: pivoting, kernel scaling and the override are all fixed.
# - The algebraic closure of K never appears; every value lives in K itself.
