# linear_algebra.py
"""Affine linear algebra over any field given by its operations.

A field is presented by a `FieldOps` object: its zero and one, coercion of
rationals, and a zero test. Elements use their own + - * / operators; the
zero test is the only place a field may need more than syntax (coordinate
fields decide it by normal forms modulo a prime ideal).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

from .errors import Infeasible
from .polynomials import MPoly, RatFunc, VariableRegistry

logger = logging.getLogger(__name__)


class FieldOps:
    """Operations of a field whose elements support + - * /.

    Subclasses override `zero`, `one` and `is_zero` when syntactic equality
    is not a valid zero test.
    """

    def zero(self) -> Any:
        return Fraction(0)

    def one(self) -> Any:
        return Fraction(1)

    def coerce(self, value: Any) -> Any:
        return Fraction(value) if isinstance(value, int) else value

    def is_zero(self, value: Any) -> bool:
        return value == 0

    def normalize(self, value: Any) -> Any:
        return value

    def describe(self) -> str:
        return "Q"


class RationalField(FieldOps):
    """The rationals, with Fraction elements."""


RATIONALS = RationalField()


class RatFuncField(FieldOps):
    """Q(v_1, ..., v_n) as normalized RatFunc values over one registry."""

    def __init__(self, registry: VariableRegistry):
        self.registry = registry

    def zero(self) -> RatFunc:
        return RatFunc.constant(self.registry, 0)

    def one(self) -> RatFunc:
        return RatFunc.constant(self.registry, 1)

    def coerce(self, value: Any) -> RatFunc:
        if isinstance(value, RatFunc):
            return value
        if isinstance(value, MPoly):
            return RatFunc(value)
        return RatFunc.constant(self.registry, value)

    def is_zero(self, value: Any) -> bool:
        return self.coerce(value).is_zero()

    def describe(self) -> str:
        return f"Q({', '.join(self.registry.names)})"


@dataclass(frozen=True)
class FieldMatrix:
    """Rectangular matrix with entries in a field.

    Attributes:
        field (FieldOps): The field oracle.
        rows (Tuple[Tuple[Any, ...], ...]): Entries, all normalized.
        ncols (int): Column count (kept explicitly for matrices without rows).
    """
    field: FieldOps
    rows: Tuple[Tuple[Any, ...], ...]
    ncols: int

    @classmethod
    def build(cls, field: FieldOps, rows: Sequence[Sequence[Any]], ncols: Optional[int] = None) -> "FieldMatrix":
        width = ncols if ncols is not None else (len(rows[0]) if rows else 0)
        normalized = []
        for row in rows:
            if len(row) != width:
                raise ValueError(f"matrix is not rectangular: row of length {len(row)}, expected {width}")
            normalized.append(tuple(field.normalize(field.coerce(x)) for x in row))
        return cls(field, tuple(normalized), width)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def stack(self, other: "FieldMatrix") -> "FieldMatrix":
        if other.ncols != self.ncols:
            raise ValueError("stacked matrices must have the same column count")
        return FieldMatrix(self.field, self.rows + other.rows, self.ncols)

    def select_columns(self, columns: Sequence[int]) -> "FieldMatrix":
        return FieldMatrix(self.field, tuple(tuple(row[c] for c in columns) for row in self.rows), len(columns))

    def column(self, index: int) -> Tuple[Any, ...]:
        return tuple(row[index] for row in self.rows)

    def rank(self) -> int:
        return len(_row_reduce(self, [self.field.zero()] * self.nrows)[0])


@dataclass(frozen=True)
class AffineSolution:
    """Solution set particular + span(kernel)."""
    particular: Tuple[Any, ...]
    kernel: Tuple[Tuple[Any, ...], ...]
    pivot_columns: Tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.kernel)


def _row_reduce(matrix: FieldMatrix, rhs: Sequence[Any]):
    """Incremental Gauss-Jordan elimination in row-major order.

    Each incoming row is reduced by the pivots found so far; its first
    nonzero entry becomes a new pivot (scaled to 1) and is cleared from the
    earlier pivot rows. Returns the pivot rows with right-hand sides and the
    index of the first inconsistent row, if any.
    """
    field = matrix.field
    pivots: List[Tuple[List[Any], Any, int]] = []
    inconsistent: Optional[int] = None
    for r, (row, beta) in enumerate(zip(matrix.rows, rhs)):
        vec = list(row)
        b = field.coerce(beta)
        for prow, pb, pc in pivots:
            f = vec[pc]
            if not field.is_zero(f):
                vec = [field.normalize(x - f * y) for x, y in zip(vec, prow)]
                b = field.normalize(b - f * pb)
        col = next((c for c, x in enumerate(vec) if not field.is_zero(x)), None)
        if col is None:
            if not field.is_zero(b) and inconsistent is None:
                inconsistent = r
            continue
        inv = field.one() / vec[col]
        vec = [field.normalize(x * inv) for x in vec]
        b = field.normalize(b * inv)
        updated = []
        for prow, pb, pc in pivots:
            f = prow[col]
            if not field.is_zero(f):
                prow = [field.normalize(x - f * y) for x, y in zip(prow, vec)]
                pb = field.normalize(pb - f * b)
            updated.append((prow, pb, pc))
        updated.append((vec, b, col))
        pivots = updated
        logger.debug(f"row {r}: pivot column {col}")
    return pivots, inconsistent


def solve_affine_system(matrix: FieldMatrix, rhs: Sequence[Any]) -> AffineSolution:
    """Solves M x = b exactly.

    Args:
        matrix: Coefficient matrix over a field oracle.
        rhs: Right-hand side, one entry per row.

    Returns:
        AffineSolution: particular solution (free variables set to 0) and a
        kernel basis with one vector per free column, each scaled so that its
        first nonzero entry is 1.

    Raises:
        Infeasible: If rank(M) < rank(M | b).
    """
    if len(rhs) != matrix.nrows:
        raise ValueError(f"right-hand side has {len(rhs)} entries for {matrix.nrows} rows")
    field = matrix.field
    pivots, inconsistent = _row_reduce(matrix, rhs)
    if inconsistent is not None:
        raise Infeasible(f"row {inconsistent} reduces to 0 = nonzero")
    n = matrix.ncols
    particular = [field.zero()] * n
    for _, b, c in pivots:
        particular[c] = b
    pivot_cols = {c for _, _, c in pivots}
    kernel = []
    for free in range(n):
        if free in pivot_cols:
            continue
        vec = [field.zero()] * n
        vec[free] = field.one()
        for prow, _, c in pivots:
            if not field.is_zero(prow[free]):
                vec[c] = field.normalize(-prow[free])
        lead = next(x for x in vec if not field.is_zero(x))
        inv = field.one() / lead
        kernel.append(tuple(field.normalize(x * inv) for x in vec))
    return AffineSolution(tuple(particular), tuple(kernel), tuple(sorted(pivot_cols)))


def residuals(matrix: FieldMatrix, x: Sequence[Any], rhs: Sequence[Any]) -> List[Any]:
    """M x - b, entrywise."""
    field = matrix.field
    out = []
    for row, b in zip(matrix.rows, rhs):
        total = field.zero()
        for a, v in zip(row, x):
            total = total + a * v
        out.append(field.normalize(total - field.coerce(b)))
    return out


def reduced_row_echelon(matrix: FieldMatrix) -> List[Tuple[Any, ...]]:
    """Nonzero rows of the reduced row echelon form, ordered by pivot column."""
    pivots, _ = _row_reduce(matrix, [matrix.field.zero()] * matrix.nrows)
    return [tuple(vec) for vec, _, _ in sorted(pivots, key=lambda p: p[2])]
