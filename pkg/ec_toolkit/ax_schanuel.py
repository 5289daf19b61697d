# ax_schanuel.py
"""Checks of the Ax-Schanuel inequalities on explicit differential fields.

A witness is a finitely generated field K = Frac(Q[x_1..x_r] / P) with
derivations D_1..D_m given by their values on the generators x_1..x_r, and a
field of constants C generated over Q by declared registry variables. By the
Jacobian criterion (characteristic 0, P prime), for elements e_1..e_s of K

    td_C C(e) = rank [de; dP; dC] - rank [dP; dC]

where dP are the differentials of the generators of P and dC those of the
declared constants, all evaluated in K.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .constants import DEFAULT_NMAX
from .derivations import (
    BaseDiffField, CoordElement, CoordField, DerivationWitness, apply_derivation,
)
from .errors import PoleError
from .linear_algebra import RATIONALS, FieldMatrix, solve_affine_system
from .modular import evaluate_modular_polynomial, jpoly_suite, modular_polynomial
from .polynomials import VariableRegistry

logger = logging.getLogger(__name__)


@dataclass
class ASWitness:
    """Points of E_J (or of the exponential graph) in an explicit differential field.

    Attributes:
        model (str): "J" for tuples (z, j, jp, jpp), "exp" for tuples (x, y).
        host (CoordField): The ambient field.
        tuples (List[Tuple[CoordElement, ...]]): One tuple per index.
        tables (List[Dict[str, CoordElement]]): D_k on every generator of the host.
        constants (Tuple[str, ...]): Registry variables generating C over Q.
    """
    model: str
    host: CoordField
    tuples: List[Tuple[CoordElement, ...]]
    tables: List[Dict[str, CoordElement]]
    constants: Tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.tuples)

    def derive(self, k: int, element: CoordElement) -> CoordElement:
        return apply_derivation(self.host, self.tables[k], element)


def rational_function_field(names: Sequence[str]) -> CoordField:
    """Q(names) as a coordinate field with no relations."""
    registry = VariableRegistry(tuple(names))
    return CoordField(registry, [], BaseDiffField(tuple(names)))


def as_witness_from_derivation(witness: DerivationWitness) -> ASWitness:
    """The generic point of a derivation witness, with its derivations as tables."""
    variety = witness.variety
    K = witness.host
    tuples = [tuple(K.var(v) for v in variety.model.block(i)) for i in range(1, variety.n + 1)]
    tables = [witness.host_derivation(k) for k in range(witness.derivation_count)]
    model = "exp" if variety.model.tag == "exp" else "J"
    return ASWitness(model, K, tuples, tables, K.base.constant_params)


# --- Transcendence degree ---

def _differential_rows(K: CoordField, constants: Sequence[str]) -> List[List[CoordElement]]:
    names = K.registry.names
    rows = [[K.evaluate(g.partial(x)) for x in names] for g in K.basis.generators]
    for c in constants:
        rows.append([K.one() if x == c else K.zero() for x in names])
    return rows


def transcendence_degree(elements: Sequence[CoordElement], K: CoordField, constants: Sequence[str] = ()) -> int:
    """td over Q(constants) of the field generated by the elements.

    Args:
        elements: Elements of K.
        K: The ambient field; its registry variables are the differentials' basis.
        constants: Registry variables generating the constant field.

    Returns:
        int: rank [de; dP; dC] - rank [dP; dC].
    """
    names = K.registry.names
    base_rows = _differential_rows(K, constants)
    element_rows = [[K.coerce(e).partial(x) for x in names] for e in elements]
    width = len(names)
    total = FieldMatrix(K, tuple(tuple(r) for r in element_rows + base_rows), width).rank()
    base = FieldMatrix(K, tuple(tuple(r) for r in base_rows), width).rank()
    return total - base


# --- Modular independence ---

@dataclass(frozen=True)
class ModularIndependenceReport:
    """Pairwise Phi_N tests for N <= nmax; the bound is part of every verdict."""
    nmax: int
    relations: Tuple[Tuple[int, int, int], ...]

    @property
    def independent(self) -> bool:
        return not self.relations

    def lines(self) -> List[str]:
        out = [f"dependent=i{i},k{k},N{level}" for i, k, level in self.relations]
        out.append(f"independent_up_to={self.nmax}" if self.independent else "independent=false")
        return out


def modular_independence(j_values: Sequence[CoordElement], K: CoordField,
                         nmax: int = DEFAULT_NMAX) -> ModularIndependenceReport:
    """Evaluates Phi_N(j_i, j_k) for every pair i < k and every N <= nmax."""
    relations: List[Tuple[int, int, int]] = []
    if len(j_values) < 2:
        return ModularIndependenceReport(nmax, ())
    for level in range(1, nmax + 1):
        phi = modular_polynomial(level)
        for i in range(len(j_values)):
            for k in range(i + 1, len(j_values)):
                value = evaluate_modular_polynomial(phi, j_values[i], j_values[k], K.zero())
                if K.coerce(value).is_zero():
                    relations.append((i + 1, k + 1, level))
    return ModularIndependenceReport(nmax, tuple(relations))


# --- Reports ---

@dataclass(frozen=True)
class ASReport:
    """Outcome of an Ax-Schanuel check.

    verdict is "hypotheses-unmet", "inequality-holds" or "VIOLATION"; lhs and
    rhs are always computed.
    """
    model: str
    lhs: int
    rhs: int
    failures: Tuple[str, ...] = ()
    independence: Optional[ModularIndependenceReport] = None

    @property
    def verdict(self) -> str:
        if self.failures:
            return "hypotheses-unmet"
        return "inequality-holds" if self.lhs >= self.rhs else "VIOLATION"

    @property
    def margin(self) -> int:
        return self.lhs - self.rhs

    def lines(self) -> List[str]:
        out = [f"# Ax-Schanuel ({self.model})"]
        out.extend(f"hypothesis_failure={f}" for f in self.failures)
        if self.independence is not None:
            out.extend(self.independence.lines())
        out.append(f"lhs={self.lhs}")
        out.append(f"rhs={self.rhs}")
        out.append(f"margin={self.margin}")
        out.append(f"verdict={self.verdict}")
        return out


def _derivative_rank(w: ASWitness, position: int) -> int:
    rows = tuple(tuple(w.derive(k, t[position]) for t in w.tuples) for k in range(len(w.tables)))
    return FieldMatrix(w.host, rows, w.n).rank()


def _nonconstant_failures(w: ASWitness, names: Sequence[str]) -> List[str]:
    out = []
    for i, t in enumerate(w.tuples, start=1):
        for name, value in zip(names, t):
            if all(w.derive(k, value).is_zero() for k in range(len(w.tables))):
                out.append(f"{name}{i} is constant")
    return out


def check_ax_schanuel_j(w: ASWitness, nmax: int = DEFAULT_NMAX) -> ASReport:
    """td_C C(z, j, jp, jpp) >= 3n + rank(D_k z_i), with the hypotheses checked first."""
    K = w.host
    failures: List[str] = []
    for i, t in enumerate(w.tuples, start=1):
        if len(t) != 4:
            failures.append(f"tuple {i} has {len(t)} entries, expected 4")
    if failures:
        return ASReport("J", 0, 0, tuple(failures))
    for k in range(len(w.tables)):
        for i, (z, j, jp, jpp) in enumerate(w.tuples, start=1):
            dz = w.derive(k, z)
            if not (w.derive(k, j) - jp * dz).is_zero():
                failures.append(f"D{k + 1}: j{i}' != jp{i} z{i}'")
            if not (w.derive(k, jp) - jpp * dz).is_zero():
                failures.append(f"D{k + 1}: jp{i}' != jpp{i} z{i}'")
            try:
                eta = jpoly_suite("eta", (j, jp, jpp))
            except PoleError as e:
                failures.append(f"tuple {i}: eta undefined ({e.denominator})")
                continue
            if not (w.derive(k, jpp) - eta * dz).is_zero():
                failures.append(f"D{k + 1}: jpp{i}' != eta z{i}'")
    failures.extend(_nonconstant_failures(w, ("z", "j", "jp", "jpp")))
    independence = modular_independence([t[1] for t in w.tuples], K, nmax)
    if not independence.independent:
        failures.append("j values are modularly dependent")
    coordinates = [x for t in w.tuples for x in t]
    lhs = transcendence_degree(coordinates, K, w.constants)
    rhs = 3 * w.n + _derivative_rank(w, 0)
    report = ASReport("J", lhs, rhs, tuple(failures), independence)
    if report.verdict == "VIOLATION":
        logger.error(f"Ax-Schanuel violated: lhs {lhs} < rhs {rhs}")
    logger.info(f"check_ax_schanuel_j: {report.verdict} (lhs {lhs}, rhs {rhs})")
    return report


def rational_dependencies(elements: Sequence[CoordElement], K: CoordField) -> List[Tuple[Fraction, ...]]:
    """Basis of the rational vectors q with sum q_i e_i = 0 in K.

    Each element is brought to a common denominator; normal forms are linear
    over Q, so the relation holds exactly when it holds among the
    coefficient vectors of the reduced numerators.
    """
    if not elements:
        return []
    numerators = []
    for idx, e in enumerate(elements):
        product = e.num
        for other, f in enumerate(elements):
            if other != idx:
                product = K.reduce(product * f.den)
        numerators.append(product)
    monomials = sorted({exps for p in numerators for exps, _ in p.terms})
    rows = [[p.term_dict().get(m, Fraction(0)) for p in numerators] for m in monomials]
    matrix = FieldMatrix.build(RATIONALS, rows, len(elements))
    return list(solve_affine_system(matrix, [Fraction(0)] * len(rows)).kernel)


def linear_independence_mod_constants(w: ASWitness) -> List[Tuple[Fraction, ...]]:
    """Rational q != 0 with sum q_i x_i constant, as a basis (empty means independent)."""
    K = w.host
    derived = [[w.derive(k, t[0]) for t in w.tuples] for k in range(len(w.tables))]
    stacked: Optional[List[Tuple[Fraction, ...]]] = None
    for row in derived:
        basis = rational_dependencies(row, K)
        stacked = basis if stacked is None else _intersect(stacked, basis, w.n)
        if not stacked:
            return []
    return stacked or []


def _intersect(first: List[Tuple[Fraction, ...]], second: List[Tuple[Fraction, ...]], n: int) -> List[Tuple[Fraction, ...]]:
    """Basis of span(first) ∩ span(second) in Q^n."""
    if not first or not second:
        return []
    # solve sum a_i f_i - sum b_j s_j = 0
    cols = [list(f) for f in first] + [[-x for x in s] for s in second]
    rows = [[col[r] for col in cols] for r in range(n)]
    kernel = solve_affine_system(FieldMatrix.build(RATIONALS, rows, len(cols)), [Fraction(0)] * n).kernel
    out = []
    for vec in kernel:
        combo = tuple(sum((vec[a] * first[a][r] for a in range(len(first))), Fraction(0)) for r in range(n))
        if any(combo):
            out.append(combo)
    return out


def check_ax_schanuel_exp(w: ASWitness) -> ASReport:
    """td_C C(x, y) >= n + rank(D_k x_i) when D y_i = y_i D x_i and x is Q-independent mod C."""
    K = w.host
    failures: List[str] = []
    for i, t in enumerate(w.tuples, start=1):
        if len(t) != 2:
            failures.append(f"tuple {i} has {len(t)} entries, expected 2")
    if failures:
        return ASReport("exp", 0, 0, tuple(failures))
    for k in range(len(w.tables)):
        for i, (x, y) in enumerate(w.tuples, start=1):
            if not (w.derive(k, y) - y * w.derive(k, x)).is_zero():
                failures.append(f"D{k + 1}: y{i}' != y{i} x{i}'")
    for q in linear_independence_mod_constants(w):
        failures.append("x is Q-linearly dependent mod C: q=" + ",".join(str(c) for c in q))
    coordinates = [x for t in w.tuples for x in t]
    lhs = transcendence_degree(coordinates, K, w.constants)
    rhs = w.n + _derivative_rank(w, 0)
    report = ASReport("exp", lhs, rhs, tuple(failures))
    if report.verdict == "VIOLATION":
        logger.error(f"Ax-Schanuel (exp) violated: lhs {lhs} < rhs {rhs}")
    logger.info(f"check_ax_schanuel_exp: {report.verdict} (lhs {lhs}, rhs {rhs})")
    return report


# Comments:
# - C is the field of constants of the tables; declared constants only enter the transcendence degree.
