# reductions.py
"""Reduction steps for varieties that are not J-free, and lifting witnesses back.

Three steps are provided, each producing a certificate:

* j-lift: a variety in the (z, j) model is re-read in the J model, with the
  derivative coordinates left unconstrained.
* constant fibre: when a coordinate of block i is constant on V, V is cut by
  a supplied point p = (a, b, b', b'') of block i and the remaining blocks
  form the target W.
* Möbius-modular: when Phi_N(j_i, j_k) lies in I(V), the auxiliary variety S
  ties block i to block k through z_k = (a z_i + b) / (c z_i + d) with fresh
  constants a, b, c, d, and W is V ∩ S with block i eliminated.

The two derivative relations of S come from differentiating
Phi_N(j(z_i), j(M z_i)) = 0 along z_i, with dM/dz = (ad - bc) / (cz + d)^2:

    F1 = Phi_X * jp_i * (c z_i + d)^2 + Phi_Y * jp_k * (ad - bc)
    F2 = (c z_i + d)^2 * (dF1/dz_i + dF1/dj_i jp_i + dF1/djp_i jpp_i)
         + (ad - bc) * (dF1/dz_k + dF1/dj_k jp_k + dF1/djp_k jpp_k)

V ∩ S is saturated by (ad - bc)(c z_i + d) before elimination so that the
degenerate components where the Möbius map is undefined are removed.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .constants import DEFAULT_STEP_BUDGET, J_SPECIAL_VALUE
from .derivations import (
    BaseDiffField, CoordElement, CoordField, DerivationWitness, witness_in_host,
)
from .errors import (
    FiberEmpty, Infeasible, InvalidFiberPoint, LiftSingular, ModularRelationAbsent, NoConstantCoordinate,
    UnsupportedInput,
)
from .groebner import elimination_ideal, groebner_of, ideal_membership
from .linear_algebra import FieldMatrix, solve_affine_system
from .modular import ModularPolynomial, modular_polynomial, modular_relation
from .polynomials import GREVLEX, MPoly, VariableRegistry
from .varieties import BroadnessReport, CoordinateModel, Variety, check_broadness, kept_dimension

logger = logging.getLogger(__name__)

MOBIUS_CONSTANTS = ("a", "b", "c", "d")
SATURATION_VARIABLE = "sat_u"


@dataclass(frozen=True)
class ReductionCertificate:
    """Everything needed to lift a witness of `target` to one of `source`.

    Attributes:
        kind (str): "j-lift", "constant-fiber" or "mobius-modular".
        source (Variety): The variety being reduced.
        target (Variety): W (or the lifted variety for a j-lift).
        block (int): The index block removed (0 for a j-lift).
        partner (int): Block k of the modular pair (Möbius only).
        level (int): N of the modular relation (Möbius only).
        fiber_point (Tuple[Fraction, ...]): p for a constant fibre.
        auxiliary (Optional[Variety]): S, over the registry with a, b, c, d adjoined.
        extended_source (Optional[Variety]): V over that same registry.
        renaming (Tuple[Tuple[str, str], ...]): Target coordinate -> source coordinate.
        target_broadness (Optional[BroadnessReport]): J-broadness of the target.
    """
    kind: str
    source: Variety
    target: Variety
    block: int = 0
    partner: int = 0
    level: int = 0
    fiber_point: Tuple[Fraction, ...] = ()
    auxiliary: Optional[Variety] = None
    extended_source: Optional[Variety] = None
    renaming: Tuple[Tuple[str, str], ...] = ()
    target_broadness: Optional[BroadnessReport] = None

    def lines(self) -> List[str]:
        out = [f"kind={self.kind}"]
        if self.block:
            out.append(f"block={self.block}")
        if self.kind == "constant-fiber":
            out.append("point=" + ",".join(str(x) for x in self.fiber_point))
        if self.kind == "mobius-modular":
            out.append(f"partner={self.partner}")
            out.append(f"level={self.level}")
            out.append("mobius_constants=" + ",".join(MOBIUS_CONSTANTS))
            out.append("nondegenerate=a*d - b*c != 0")
            for idx, g in enumerate(self.auxiliary.generators, start=1):
                out.append(f"S_poly[{idx}]={g.to_expr()}")
        out.append(f"target={self.target.describe()}")
        for idx, g in enumerate(self.target.generators, start=1):
            out.append(f"W_poly[{idx}]={g.to_expr()}")
        if self.target_broadness is not None:
            out.extend(self.target_broadness.lines())
        return out


# --- j-lift ---

def lift_j_to_J(variety: Variety) -> Variety:
    """The same generators read in the J model; jp and jpp stay free."""
    if variety.model.tag != "j":
        raise UnsupportedInput(f"lift_j_to_J needs model j, got model {variety.model.tag}")
    model = CoordinateModel("J", variety.n)
    lifted = Variety(model, (), variety.assume_prime, variety.base_params, variety.constant_params)
    gens = tuple(g.embed(lifted.registry) for g in variety.generators)
    lifted = lifted.with_generators(gens)
    logger.info(f"lift_j_to_J: {variety.describe()} -> {lifted.describe()}")
    return lifted


def j_lift_certificate(variety: Variety, step_budget: int = DEFAULT_STEP_BUDGET) -> ReductionCertificate:
    """Certificate for a j-lift, with J-broadness of the lifted variety."""
    lifted = lift_j_to_J(variety)
    return ReductionCertificate("j-lift", variety, lifted, target_broadness=check_broadness(lifted, step_budget))


# --- Block bookkeeping ---

def _drop_block(variety: Variety, i: int) -> Tuple[CoordinateModel, Dict[str, str]]:
    """Model on the remaining blocks and the renaming source name -> target name."""
    if variety.n < 2:
        raise UnsupportedInput("removing a block needs at least two blocks")
    model = CoordinateModel(variety.model.tag, variety.n - 1)
    renaming: Dict[str, str] = {}
    for l in range(1, variety.n + 1):
        if l == i:
            continue
        target = l if l < i else l - 1
        for old, new in zip(variety.model.block(l), model.block(target)):
            renaming[old] = new
    return model, renaming


def _target_variety(model: CoordinateModel, gens: Sequence[MPoly], renaming: Dict[str, str],
                     source: Variety, constant_params: Tuple[str, ...]) -> Variety:
    shell = Variety(model, (), source.assume_prime, source.base_params, constant_params)
    embedded = []
    for g in gens:
        p = g.embed(shell.registry, renaming, GREVLEX)
        if not p.is_zero():
            embedded.append(p)
    return shell.with_generators(embedded)


# --- Constant fibre ---

def fiber_constant_coordinate(variety: Variety, i: int, point: Sequence[Fraction],
                              step_budget: int = DEFAULT_STEP_BUDGET) -> Tuple[Variety, ReductionCertificate]:
    """The fibre W of V above p = (a, b, b', b'') in block i, on the other blocks.

    Raises:
        NoConstantCoordinate: If no coordinate of block i is constant on V.
        InvalidFiberPoint: If p has the wrong length, b' = 0, or b is 0 or 1728.
        FiberEmpty: If the substitution gives the unit ideal.
    """
    if variety.model.tag != "J":
        raise UnsupportedInput("constant fibres are taken in model J")
    block = variety.model.block(i)
    p = tuple(Fraction(x) for x in point)
    if len(p) != len(block):
        raise InvalidFiberPoint(f"fibre point needs {len(block)} entries, got {len(p)}")
    if p[2] == 0:
        raise InvalidFiberPoint("b' = 0: the fibre point is not an E_J point")
    if p[1] in (0, J_SPECIAL_VALUE):
        raise InvalidFiberPoint(f"b = {p[1]}: eta has a pole at the fibre point")
    constant = [v for v in block if kept_dimension(variety, (v,), step_budget) <= 0]
    if not constant:
        raise NoConstantCoordinate(f"no coordinate of block {i} is constant on V")
    logger.info(f"fiber_constant_coordinate: constant coordinates {constant} in block {i}")

    substituted = [g.substitute_many(dict(zip(block, p))) for g in variety.generators]
    basis = groebner_of(variety.registry, substituted, GREVLEX, step_budget)
    if basis.is_unit():
        raise FiberEmpty(f"point {tuple(str(x) for x in p)} is not on the block {i} projection of V")
    model, renaming = _drop_block(variety, i)
    target = _target_variety(model, basis.generators, renaming, variety, variety.constant_params)
    broadness = check_broadness(target, step_budget)
    logger.info(f"fibre W: {target.describe()}, J_broad={broadness.broad}")
    certificate = ReductionCertificate(
        "constant-fiber", variety, target, block=i, fiber_point=p,
        renaming=tuple((new, old) for old, new in renaming.items()), target_broadness=broadness,
    )
    return target, certificate


# --- Möbius-modular ---

def _with_mobius_constants(variety: Variety) -> Variety:
    clash = set(MOBIUS_CONSTANTS) & set(variety.params)
    if clash:
        raise UnsupportedInput(f"parameter names {sorted(clash)} are reserved for the Möbius constants")
    shell = Variety(variety.model, (), variety.assume_prime, variety.base_params,
                    variety.constant_params + MOBIUS_CONSTANTS)
    return shell.with_generators(g.embed(shell.registry) for g in variety.generators)


def mobius_relations(registry: VariableRegistry, phi: ModularPolynomial, block_i: Sequence[str],
                     block_k: Sequence[str]) -> List[MPoly]:
    """Phi_N(j_i, j_k), the Möbius relation, F1 and F2 over a registry holding a, b, c, d."""
    zi, ji, jpi, jppi = block_i
    zk, jk, jpk, jppk = block_k
    v = {name: MPoly.variable(registry, name) for name in tuple(block_i) + tuple(block_k) + MOBIUS_CONSTANTS}
    a, b, c, d = (v[name] for name in MOBIUS_CONSTANTS)
    det = a * d - b * c
    denom = c * v[zi] + d
    relation = modular_relation(phi, registry, ji, jk)
    phi_x = modular_relation(ModularPolynomial(phi.level, phi.poly.partial("X")), registry, ji, jk)
    phi_y = modular_relation(ModularPolynomial(phi.level, phi.poly.partial("Y")), registry, ji, jk)
    mobius = (a * v[zi] + b) - v[zk] * denom
    f1 = phi_x * v[jpi] * denom ** 2 + phi_y * v[jpk] * det
    along_i = f1.partial(zi) + f1.partial(ji) * v[jpi] + f1.partial(jpi) * v[jppi]
    along_k = f1.partial(zk) + f1.partial(jk) * v[jpk] + f1.partial(jpk) * v[jppk]
    f2 = denom ** 2 * along_i + det * along_k
    return [relation, mobius, f1, f2]


def saturate(registry: VariableRegistry, gens: Sequence[MPoly], h: MPoly,
             step_budget: int = DEFAULT_STEP_BUDGET) -> List[MPoly]:
    """Generators of (gens) : h^infinity, via 1 - u h and elimination of u."""
    extended = registry.extended([SATURATION_VARIABLE])
    lifted = [g.embed(extended) for g in gens]
    u = MPoly.variable(extended, SATURATION_VARIABLE)
    lifted.append(1 - u * h.embed(extended))
    basis = groebner_of(extended, lifted, GREVLEX, step_budget)
    kept = elimination_ideal(basis, registry.names, step_budget)
    return [g.embed(registry, order=GREVLEX) for g in kept.generators]


def mobius_modular_reduction(variety: Variety, pair: Tuple[int, int], level: int,
                             step_budget: int = DEFAULT_STEP_BUDGET) -> Tuple[Variety, Variety, ReductionCertificate]:
    """Builds S and W := projection of V ∩ S away from block i.

    Args:
        variety: V in model J, with Phi_N(j_i, j_k) in I(V).
        pair: (i, k), distinct block indices; block i is removed.
        level: N.

    Returns:
        (S, W, certificate). S and the extended V live over the registry with
        a, b, c, d adjoined as constants; W keeps them as constant parameters.

    Raises:
        ModularRelationAbsent: If Phi_N(j_i, j_k) is not in I(V).
        ModularDataUnavailable: If Phi_N is unavailable.
    """
    if variety.model.tag != "J":
        raise UnsupportedInput("the Möbius-modular reduction works in model J")
    i, k = pair
    if i == k:
        raise UnsupportedInput("the modular pair needs two distinct blocks")
    phi = modular_polynomial(level)
    j_i, j_k = variety.model.coordinate("j", i), variety.model.coordinate("j", k)
    member, _ = ideal_membership(modular_relation(phi, variety.registry, j_i, j_k), variety.ideal(step_budget))
    if not member:
        raise ModularRelationAbsent(f"Phi_{level}({j_i}, {j_k}) is not in I(V)")

    extended = _with_mobius_constants(variety)
    registry = extended.registry
    block_i, block_k = extended.model.block(i), extended.model.block(k)
    s_gens = mobius_relations(registry, phi, block_i, block_k)
    auxiliary = extended.with_generators(s_gens)
    v = {name: MPoly.variable(registry, name) for name in MOBIUS_CONSTANTS + (block_i[0],)}
    h = (v["a"] * v["d"] - v["b"] * v["c"]) * (v["c"] * v[block_i[0]] + v["d"])
    meet = saturate(registry, list(extended.generators) + s_gens, h, step_budget)
    meet_basis = groebner_of(registry, meet, GREVLEX, step_budget)
    if meet_basis.is_unit():
        raise FiberEmpty("V ∩ S is empty away from the degenerate Möbius locus")
    model, renaming = _drop_block(extended, i)
    keep = tuple(renaming) + extended.params
    eliminated = elimination_ideal(meet_basis, keep, step_budget)
    target = _target_variety(model, eliminated.generators, renaming, extended, extended.constant_params)
    broadness = check_broadness(target, step_budget)
    logger.info(f"mobius_modular_reduction: N={level}, pair {pair}, W {target.describe()}, J_broad={broadness.broad}")
    certificate = ReductionCertificate(
        "mobius-modular", variety, target, block=i, partner=k, level=level,
        auxiliary=auxiliary, extended_source=extended.with_generators(meet_basis.generators),
        renaming=tuple((new, old) for old, new in renaming.items()), target_broadness=broadness,
    )
    return auxiliary, target, certificate


# --- Lifting witnesses ---

def transfer(element: CoordElement, host: CoordField, renaming: Dict[str, str]) -> CoordElement:
    """Image of an element of a target field in the host, renaming variables."""
    num = element.num.embed(host.registry, renaming, GREVLEX)
    den = element.den.embed(host.registry, renaming, GREVLEX)
    return host.make(num, den)


def _host(variety: Variety, gens: Sequence[MPoly], step_budget: int) -> CoordField:
    return CoordField(variety.registry, list(gens), BaseDiffField.of(variety), step_budget)


def lift_point(witness: DerivationWitness, certificate: ReductionCertificate,
               step_budget: int = DEFAULT_STEP_BUDGET) -> DerivationWitness:
    """Lifts a verified witness of the target W to a witness of the source.

    For a constant fibre the host is the fibre inside V's registry and block i
    gets zero derivation values. For a Möbius reduction the host is the
    coordinate field of V ∩ S (with a, b, c, d adjoined) and block i values
    are solved from the prolongations of the four S relations; the returned
    witness is checked against V over that registry.

    Raises:
        LiftSingular: If c z_i + d or Phi_X(j_i, j_k) vanishes at the point.
    """
    if not witness.flags.get("verified", False):
        raise UnsupportedInput("only verified witnesses can be lifted")
    if certificate.kind == "j-lift":
        raise UnsupportedInput("a witness of the lifted J variety already is the point; nothing to lift")
    renaming = {target: source for target, source in certificate.renaming}
    if certificate.kind == "constant-fiber":
        source = certificate.source
        block = source.model.block(certificate.block)
        fiber = [MPoly.variable(source.registry, v) - x for v, x in zip(block, certificate.fiber_point)]
        host = _host(source, list(source.generators) + fiber, step_budget)
        deltas, lambdas = _transfer_values(witness, host, renaming)
        for values in deltas:
            for v in block:
                values[v] = host.zero()
        lifted = witness_in_host(source, host, deltas, lambdas, tuple(fiber))
    else:
        source = certificate.extended_source
        host = _host(source, source.generators, step_budget)
        deltas, lambdas = _transfer_values(witness, host, renaming)
        block_i = source.model.block(certificate.block)
        block_k = source.model.block(certificate.partner)
        relations = mobius_relations(source.registry, modular_polynomial(certificate.level), block_i, block_k)
        for values in deltas:
            values.update(_solve_block(host, relations, block_i, block_k, values))
        lifted = witness_in_host(source, host, deltas, lambdas)
    logger.info(f"lift_point ({certificate.kind}): verified={lifted.flags['verified']}")
    return lifted


def _transfer_values(witness: DerivationWitness, host: CoordField, renaming: Dict[str, str]):
    deltas = [{renaming[v]: transfer(x, host, renaming) for v, x in d.items()} for d in witness.deltas]
    lambdas = [tuple(transfer(x, host, renaming) for x in lam) for lam in witness.lambdas]
    return deltas, lambdas


def _solve_block(host: CoordField, relations: Sequence[MPoly], block_i: Sequence[str],
                 block_k: Sequence[str], known: Dict[str, CoordElement]) -> Dict[str, CoordElement]:
    """Block i derivation values killing the prolongations of the S relations."""
    z_i = host.var(block_i[0])
    if (host.var("c") * z_i + host.var("d")).is_zero():
        raise LiftSingular("c*z_i + d vanishes at the point")
    rows, rhs = [], []
    for rel in relations:
        rows.append([host.evaluate(rel.partial(v)) for v in block_i])
        total = host.zero()
        for v in block_k:
            total = total + host.evaluate(rel.partial(v)) * known[v]
        rhs.append(-total)
    try:
        solution = solve_affine_system(FieldMatrix(host, tuple(tuple(r) for r in rows), len(block_i)), rhs)
    except Infeasible as e:
        raise LiftSingular(f"the block relations admit no derivation values: {e}") from e
    if solution.kernel:
        raise LiftSingular("Phi_X vanishes at the point; block values are not determined")
    return dict(zip(block_i, solution.particular))


# Comments:
# - Derivation values of the Möbius constants are zero; they are constants of the base.
# - Lifted Möbius witnesses live over V's registry with a, b, c, d adjoined.
