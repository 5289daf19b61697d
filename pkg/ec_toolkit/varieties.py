# varieties.py
"""Varieties in the J, j and exp coordinate models and their geometric predicates.

Coordinates are named per index block: (z_i, j_i, jp_i, jpp_i) for model J,
(z_i, j_i) for model j and (x_i, y_i) for model exp. Base parameters
t_1..t_m and constant parameters (for instance Möbius constants a, b, c, d)
follow the coordinates in the registry. All dimensions are dimensions over
the base field: the ring dimension of the ideal in Q[coordinates, parameters]
minus the number of parameters, which is exact whenever the ideal meets
Q[parameters] only in zero (checked by `proper_over_base`).
"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations, product
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .constants import DEFAULT_NMAX, DEFAULT_ROTUND_BOUND, DEFAULT_STEP_BUDGET, J_SPECIAL_VALUE, MODEL_BLOCKS
from .errors import RegistryMismatch, UnsupportedInput
from .groebner import GroebnerBasis, elimination_ideal, groebner_of, ideal_dimension, ideal_membership
from .linear_algebra import RATIONALS, FieldMatrix, reduced_row_echelon
from .modular import modular_polynomial, modular_relation
from .polynomials import GREVLEX, MPoly, VariableRegistry

logger = logging.getLogger(__name__)


# --- Models and varieties ---

@dataclass(frozen=True)
class CoordinateModel:
    """Coordinate model tag with the number of index blocks."""
    tag: str
    n: int

    def __post_init__(self):
        if self.tag not in MODEL_BLOCKS:
            raise ValueError(f"unknown coordinate model '{self.tag}'")
        if self.n < 1:
            raise ValueError("a variety needs at least one index block")

    @property
    def arity(self) -> int:
        return len(MODEL_BLOCKS[self.tag])

    @property
    def prefixes(self) -> Tuple[str, ...]:
        return MODEL_BLOCKS[self.tag]

    def block(self, i: int) -> Tuple[str, ...]:
        """Coordinate names of block i (1-based)."""
        if not 1 <= i <= self.n:
            raise UnsupportedInput(f"block index {i} outside 1..{self.n}")
        return tuple(f"{p}{i}" for p in self.prefixes)

    def coordinates(self) -> Tuple[str, ...]:
        return tuple(name for i in range(1, self.n + 1) for name in self.block(i))

    def coordinate(self, prefix: str, i: int) -> str:
        if prefix not in self.prefixes:
            raise ValueError(f"model {self.tag} has no coordinate '{prefix}'")
        return self.block(i)[self.prefixes.index(prefix)]


def model_registry(model: CoordinateModel, base_params: Sequence[str] = (),
                   constant_params: Sequence[str] = ()) -> VariableRegistry:
    return VariableRegistry(model.coordinates() + tuple(base_params) + tuple(constant_params))


@dataclass(frozen=True)
class Variety:
    """Affine variety given by generators of its ideal.

    Attributes:
        model (CoordinateModel): Coordinate model and block count.
        generators (Tuple[MPoly, ...]): Generators over `registry`.
        assume_prime (bool): Declared primality of the ideal (not verified).
        base_params (Tuple[str, ...]): Derivation parameters t_1..t_m of the base field.
        constant_params (Tuple[str, ...]): Transcendental constants adjoined to the base.
    """
    model: CoordinateModel
    generators: Tuple[MPoly, ...]
    assume_prime: bool = True
    base_params: Tuple[str, ...] = ()
    constant_params: Tuple[str, ...] = ()
    registry: VariableRegistry = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        registry = model_registry(self.model, self.base_params, self.constant_params)
        object.__setattr__(self, "registry", registry)
        gens = []
        for g in self.generators:
            if g.registry != registry:
                raise RegistryMismatch(f"generator {g.to_expr()} is not over {registry.names}")
            if not g.is_zero():
                gens.append(g.with_order(GREVLEX))
        object.__setattr__(self, "generators", tuple(gens))

    @property
    def params(self) -> Tuple[str, ...]:
        return self.base_params + self.constant_params

    @property
    def n(self) -> int:
        return self.model.n

    def coordinates(self) -> Tuple[str, ...]:
        return self.model.coordinates()

    def var(self, name: str) -> MPoly:
        return MPoly.variable(self.registry, name)

    def ideal(self, step_budget: int = DEFAULT_STEP_BUDGET) -> GroebnerBasis:
        return groebner_of(self.registry, self.generators, GREVLEX, step_budget)

    def with_generators(self, generators: Iterable[MPoly]) -> "Variety":
        return Variety(self.model, tuple(generators), self.assume_prime, self.base_params, self.constant_params)

    def describe(self) -> str:
        base = f"Q({', '.join(self.base_params)})" if self.base_params else "Q"
        return f"model={self.model.tag} n={self.n} base={base} generators={len(self.generators)}"


def full_space(tag: str, n: int, base_params: Sequence[str] = (), constant_params: Sequence[str] = ()) -> Variety:
    """The whole coordinate space of a model (no generators)."""
    return Variety(CoordinateModel(tag, n), (), True, tuple(base_params), tuple(constant_params))


def product_variety(first: Variety, second: Variety) -> Variety:
    """V1 x V2 on n1 + n2 blocks; blocks of V2 are renumbered after those of V1."""
    if first.model.tag != second.model.tag or first.params != second.params:
        raise ValueError("product needs the same model and the same base")
    model = CoordinateModel(first.model.tag, first.n + second.n)
    registry = model_registry(model, first.base_params, first.constant_params)
    renaming = {}
    for i in range(1, second.n + 1):
        for old, new in zip(second.model.block(i), model.block(first.n + i)):
            renaming[old] = new
    gens = [g.embed(registry) for g in first.generators]
    gens += [g.embed(registry, renaming) for g in second.generators]
    return Variety(model, tuple(gens), first.assume_prime and second.assume_prime,
                   first.base_params, first.constant_params)


# --- Dimensions ---

def kept_dimension(variety: Variety, coordinates: Sequence[str], step_budget: int = DEFAULT_STEP_BUDGET) -> int:
    """Dimension over the base of the projection onto the given coordinates (-1 if empty)."""
    basis = variety.ideal(step_budget)
    if basis.is_unit():
        return -1
    keep = tuple(coordinates) + variety.params
    elim = elimination_ideal(basis, keep, step_budget)
    return ideal_dimension(elim, variables=keep) - len(variety.params)


def variety_dimension(variety: Variety, step_budget: int = DEFAULT_STEP_BUDGET) -> int:
    basis = variety.ideal(step_budget)
    if basis.is_unit():
        return -1
    return ideal_dimension(basis) - len(variety.params)


def proper_over_base(variety: Variety, step_budget: int = DEFAULT_STEP_BUDGET) -> bool:
    """True when the ideal is proper and no nonzero relation among the parameters lies in it."""
    basis = variety.ideal(step_budget)
    if basis.is_unit():
        return False
    if not variety.params:
        return True
    return elimination_ideal(basis, variety.params, step_budget).is_zero_ideal()


def projection_dimension(variety: Variety, indices: Sequence[int], step_budget: int = DEFAULT_STEP_BUDGET) -> int:
    """dim of the projection onto the coordinate blocks selected by `indices`.

    Args:
        variety: The variety V.
        indices: Strictly increasing block indices within 1..n.

    Returns:
        int: Dimension over the base (Pr for model J, pi for model j, pairs for exp).
    """
    if list(indices) != sorted(set(indices)) or not indices:
        raise ValueError(f"index tuple {tuple(indices)} must be nonempty and strictly increasing")
    coords = [name for i in indices for name in variety.model.block(i)]
    return kept_dimension(variety, coords, step_budget)


@dataclass(frozen=True)
class ProjectionRecord:
    indices: Tuple[int, ...]
    dimension: int
    threshold: int


@dataclass(frozen=True)
class BroadnessReport:
    """Projection dimensions against the broadness thresholds.

    `broad` requires every dimension to reach its threshold; `strongly_broad`
    requires every dimension to exceed it.
    """
    model: str
    projections: Tuple[ProjectionRecord, ...]
    broad: bool
    strongly_broad: bool

    @property
    def label(self) -> str:
        return {"J": "J_broad", "j": "j_broad", "exp": "exp_broad"}[self.model]

    def failing(self) -> Optional[ProjectionRecord]:
        return next((p for p in self.projections if p.dimension < p.threshold), None)

    def lines(self) -> List[str]:
        out = [f"# broadness of a model-{self.model} variety, {len(self.projections)} projections"]
        for p in self.projections:
            idx = ",".join(str(i) for i in p.indices)
            out.append(f"projection_dim[{idx}]={p.dimension}")
            out.append(f"threshold[{idx}]={p.threshold}")
        out.append(f"{self.label}={str(self.broad).lower()}")
        out.append(f"strongly={str(self.strongly_broad).lower()}")
        return out


def check_broadness(variety: Variety, step_budget: int = DEFAULT_STEP_BUDGET) -> BroadnessReport:
    """Checks every block projection against 3k (model J) or k (models j and exp)."""
    per_block = 3 if variety.model.tag == "J" else 1
    records = []
    for k in range(1, variety.n + 1):
        for indices in combinations(range(1, variety.n + 1), k):
            dim = projection_dimension(variety, indices, step_budget)
            records.append(ProjectionRecord(indices, dim, per_block * k))
            logger.debug(f"projection {indices}: dim {dim}, threshold {per_block * k}")
    broad = all(r.dimension >= r.threshold for r in records)
    strongly = all(r.dimension > r.threshold for r in records)
    logger.info(f"broadness ({variety.model.tag}): broad={broad} strongly={strongly}")
    return BroadnessReport(variety.model.tag, tuple(records), broad, strongly)


# --- Freeness ---

@dataclass(frozen=True)
class FreenessReport:
    """Constant coordinates and modular relations found up to level nmax."""
    nmax: int
    constant_coordinates: Tuple[str, ...]
    modular_relations: Tuple[Tuple[int, int, int], ...]  # (N, i, k)

    @property
    def free(self) -> bool:
        return not self.constant_coordinates and not self.modular_relations

    def lines(self) -> List[str]:
        out = [f"# freeness up to modular level {self.nmax}"]
        for name in self.constant_coordinates:
            out.append(f"constant_coordinate={name}")
        for level, i, k in self.modular_relations:
            out.append(f"modular_relation=Phi{level},{i},{k}")
        out.append(f"nmax={self.nmax}")
        out.append(f"free={str(self.free).lower()}")
        return out


def constant_coordinates(variety: Variety, step_budget: int = DEFAULT_STEP_BUDGET) -> Tuple[str, ...]:
    """Coordinates whose projection is a point over the base."""
    return tuple(name for name in variety.coordinates() if kept_dimension(variety, [name], step_budget) <= 0)


def check_freeness(variety: Variety, nmax: int = DEFAULT_NMAX, step_budget: int = DEFAULT_STEP_BUDGET) -> FreenessReport:
    """Constant-coordinate test plus Phi_N(j_i, j_k) membership for i < k, N <= nmax.

    Raises:
        ModularDataUnavailable: If nmax exceeds the supported levels.
    """
    if variety.model.tag not in ("J", "j"):
        raise UnsupportedInput("freeness is defined for models J and j")
    basis = variety.ideal(step_budget)
    consts = constant_coordinates(variety, step_budget)
    relations = []
    for level in range(1, nmax + 1):
        phi = modular_polynomial(level)
        for i, k in combinations(range(1, variety.n + 1), 2):
            rel = modular_relation(phi, variety.registry, f"j{i}", f"j{k}")
            member, _ = ideal_membership(rel, basis)
            if member:
                relations.append((level, i, k))
                logger.info(f"modular relation Phi_{level}(j{i}, j{k}) holds on V")
    return FreenessReport(nmax, consts, tuple(relations))


# --- Singular locus ---

@dataclass(frozen=True)
class SingularReport:
    """Members of I(V) among j_i, j_i - 1728 and jp_i."""
    failures: Tuple[str, ...]

    @property
    def passes(self) -> bool:
        return not self.failures

    def lines(self) -> List[str]:
        out = ["# singular-locus side condition: j_i, j_i - 1728, jp_i must not vanish on V"]
        out.extend(f"vanishes={f}" for f in self.failures)
        out.append(f"singular_clean={str(self.passes).lower()}")
        return out


def singular_locus_check(variety: Variety, step_budget: int = DEFAULT_STEP_BUDGET) -> SingularReport:
    if variety.model.tag != "J":
        raise UnsupportedInput("the singular-locus check applies to model J")
    basis = variety.ideal(step_budget)
    failures = []
    for i in range(1, variety.n + 1):
        j = variety.var(f"j{i}")
        for label, poly in ((f"j{i}", j), (f"j{i} - {J_SPECIAL_VALUE}", j - J_SPECIAL_VALUE),
                            (f"jp{i}", variety.var(f"jp{i}"))):
            if ideal_membership(poly, basis)[0]:
                failures.append(label)
    return SingularReport(tuple(failures))


# --- Exponential model: monomial images and rotundity ---

def monomial_image_dimension(variety: Variety, matrix: Sequence[Sequence[int]],
                             step_budget: int = DEFAULT_STEP_BUDGET) -> int:
    """dim of the Zariski closure of [M](V) for an integer k x n matrix M.

    Adjoins inverses w_j with y_j*w_j = 1, graph equations u_i = sum m_ij x_j
    and v_i = prod y_j^m_ij (negative powers through w_j), then eliminates
    everything but u, v and the parameters.
    """
    if variety.model.tag != "exp":
        raise UnsupportedInput("monomial images are defined for model exp")
    n = variety.n
    rows = [list(r) for r in matrix]
    if any(len(r) != n for r in rows):
        raise ValueError(f"matrix rows must have {n} entries")
    k = len(rows)
    inv = [f"inv_y{j}" for j in range(1, n + 1)]
    us = [f"img_u{i}" for i in range(1, k + 1)]
    vs = [f"img_v{i}" for i in range(1, k + 1)]
    registry = variety.registry.extended(inv + us + vs)
    var = lambda name: MPoly.variable(registry, name)
    gens = [g.embed(registry) for g in variety.generators]
    for j in range(1, n + 1):
        gens.append(var(f"y{j}") * var(inv[j - 1]) - 1)
    for i, row in enumerate(rows):
        lin = MPoly.zero(registry)
        mono = MPoly.one(registry)
        for j, m in enumerate(row, start=1):
            lin = lin + var(f"x{j}") * m
            if m > 0:
                mono = mono * var(f"y{j}") ** m
            elif m < 0:
                mono = mono * var(inv[j - 1]) ** (-m)
        gens.append(var(us[i]) - lin)
        gens.append(var(vs[i]) - mono)
    basis = groebner_of(registry, gens, GREVLEX, step_budget)
    if basis.is_unit():
        return -1
    keep = tuple(us + vs) + variety.params
    elim = elimination_ideal(basis, keep, step_budget)
    return ideal_dimension(elim, variables=keep) - len(variety.params)


def _rank(rows: Sequence[Sequence[int]]) -> int:
    return FieldMatrix.build(RATIONALS, rows).rank()


def row_space_key(rows: Sequence[Sequence[int]]) -> Tuple[Tuple[int, ...], ...]:
    """Canonical integer basis of the rational row space.

    The reduced row echelon form with every row scaled to coprime integers
    (positive pivot); two matrices share a key iff they span the same space.
    """
    key = []
    for vec in reduced_row_echelon(FieldMatrix.build(RATIONALS, rows)):
        den = reduce(lambda a, b: a * b // gcd(a, b), (x.denominator for x in vec), 1)
        ints = [int(x * den) for x in vec]
        g = reduce(gcd, (abs(x) for x in ints), 0)
        key.append(tuple(x // g for x in ints))
    return tuple(key)


@dataclass(frozen=True)
class RotundReport:
    """Outcome of the bounded rotundity search."""
    bound: int
    spaces_checked: int
    failing_matrix: Optional[Tuple[Tuple[int, ...], ...]] = None
    image_dimension: Optional[int] = None
    broadness: Optional[BroadnessReport] = None

    @property
    def rotund(self) -> bool:
        return self.failing_matrix is None

    def lines(self) -> List[str]:
        out = [f"# rotundity up to entry bound {self.bound} ({self.spaces_checked} row spaces checked)"]
        if self.failing_matrix is not None:
            rows = ";".join(" ".join(str(x) for x in row) for row in self.failing_matrix)
            out.append(f"failing_matrix={rows}")
            out.append(f"image_dim={self.image_dimension}")
            out.append(f"rank={len(self.failing_matrix)}")
        out.append(f"bound={self.bound}")
        out.append(f"rotund={str(self.rotund).lower()}")
        if self.broadness is not None:
            out.append(f"exp_broad={str(self.broadness.broad).lower()}")
        return out


def candidate_row_spaces(n: int, bound: int) -> List[Tuple[Tuple[int, ...], ...]]:
    """One k x n integer matrix with entries in [-B, B] per distinct rational row space.

    Each space is represented by one of the enumerated matrices spanning it,
    not by its echelon form: the one with the smallest largest entry, then
    lexicographically first. Sorted by rank, then largest entry, then
    lexicographically.
    """
    vectors = []
    for vec in product(range(-bound, bound + 1), repeat=n):
        if any(vec):
            lead = next(x for x in vec if x)
            g = reduce(gcd, (abs(x) for x in vec), 0)
            if lead > 0 and g == 1:
                vectors.append(vec)

    def order(rows: Tuple[Tuple[int, ...], ...]):
        return len(rows), max(abs(x) for row in rows for x in row), rows

    chosen: Dict[Tuple[Tuple[int, ...], ...], Tuple[Tuple[int, ...], ...]] = {}
    for k in range(1, n + 1):
        if k == n:
            identity = tuple(tuple(1 if c == r else 0 for c in range(n)) for r in range(n))
            chosen[row_space_key(identity)] = identity
            continue
        for combo in combinations(vectors, k):
            if _rank(combo) == k:
                key = row_space_key(combo)
                if key not in chosen or order(combo) < order(chosen[key]):
                    chosen[key] = combo
    return sorted(chosen.values(), key=order)


def check_rotund(variety: Variety, bound: int = DEFAULT_ROTUND_BOUND,
                 step_budget: int = DEFAULT_STEP_BUDGET) -> RotundReport:
    """Searches for M with dim [M](V) < rank M among matrices with entries in [-B, B]."""
    if bound < 1:
        raise UnsupportedInput("rotundity bound must be at least 1")
    spaces = candidate_row_spaces(variety.n, bound)
    broadness = check_broadness(variety, step_budget)
    for count, rows in enumerate(spaces, start=1):
        dim = monomial_image_dimension(variety, rows, step_budget)
        if dim < len(rows):
            logger.info(f"not rotund: dim [M](V) = {dim} < {len(rows)} for M = {rows}")
            return RotundReport(bound, count, rows, dim, broadness)
    return RotundReport(bound, len(spaces), None, None, broadness)


# Comments:
# - Dimensions over the base rely on the declared primality; nothing here verifies irreducibility.
# - Row spaces are deduplicated over Q: M and A*M with A invertible give images of equal dimension.
