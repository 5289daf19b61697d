import pytest
from fractions import Fraction

from ec_toolkit.derivations import extend_derivation, verify_witness
from ec_toolkit.errors import (
    FiberEmpty, InvalidFiberPoint, ModularRelationAbsent, NoConstantCoordinate, ResourceLimit,
)
from ec_toolkit.modular import modular_polynomial
from ec_toolkit.polynomials import MPoly, polynomial_ring
from ec_toolkit.reductions import (
    MOBIUS_CONSTANTS, fiber_constant_coordinate, j_lift_certificate, lift_j_to_J, lift_point,
    mobius_modular_reduction, mobius_relations, saturate, transfer,
)
from ec_toolkit.varieties import full_space

POINT = (Fraction(5), Fraction(2), Fraction(1), Fraction(1))
MOBIUS_STEP_BUDGET = 50000


# --- Fixtures ---

@pytest.fixture
def pinned_first_block():
    """Two J blocks with z1 = 5."""
    v = full_space("J", 2)
    return v.with_generators([v.var("z1") - 5])


@pytest.fixture
def diagonal_j():
    """Two J blocks with j1 = j2, i.e. Phi_1(j1, j2) = 0."""
    v = full_space("J", 2)
    return v.with_generators([v.var("j1") - v.var("j2")])


@pytest.fixture
def diagonal_reduction(diagonal_j):
    """Level-1 Möbius reduction of the diagonal under a capped step budget."""
    try:
        return mobius_modular_reduction(diagonal_j, (1, 2), 1, MOBIUS_STEP_BUDGET)
    except ResourceLimit:
        pytest.skip(f"Möbius reduction needs more than {MOBIUS_STEP_BUDGET} Buchberger steps")


# --- Tests for the j-lift ---

def test_j_lift_keeps_generators_and_frees_derivatives():
    v = full_space("j", 1)
    parabola = v.with_generators([v.var("j1") - v.var("z1") ** 2])
    lifted = lift_j_to_J(parabola)
    assert lifted.model.tag == "J"
    assert lifted.generators == (lifted.var("j1") - lifted.var("z1") ** 2,)
    certificate = j_lift_certificate(parabola)
    assert certificate.kind == "j-lift"
    assert certificate.target_broadness.broad
    assert not certificate.target_broadness.strongly_broad


def test_j_lift_needs_model_j():
    with pytest.raises(ValueError):
        lift_j_to_J(full_space("J", 1))


# --- Tests for the constant fibre ---

def test_fiber_of_pinned_block_is_the_full_space(pinned_first_block):
    target, certificate = fiber_constant_coordinate(pinned_first_block, 1, POINT)
    assert target.n == 1
    assert target.generators == ()
    assert certificate.target_broadness.broad
    lines = certificate.lines()
    assert lines[:3] == ["kind=constant-fiber", "block=1", "point=5,2,1,1"]
    assert "J_broad=true" in lines
    assert dict(certificate.renaming)["z1"] == "z2"


@pytest.mark.parametrize("point", [
    (5, 2, 1),
    (5, 2, 0, 1),
    (5, 1728, 1, 1),
    (5, 0, 1, 1),
])
def test_invalid_fiber_points(pinned_first_block, point):
    with pytest.raises(InvalidFiberPoint):
        fiber_constant_coordinate(pinned_first_block, 1, point)


def test_fiber_needs_a_constant_coordinate():
    with pytest.raises(NoConstantCoordinate):
        fiber_constant_coordinate(full_space("J", 2), 1, POINT)


def test_fiber_off_the_projection_is_empty(pinned_first_block):
    with pytest.raises(FiberEmpty):
        fiber_constant_coordinate(pinned_first_block, 1, (6, 2, 1, 1))


def test_fiber_needs_two_blocks():
    v = full_space("J", 1)
    with pytest.raises(ValueError):
        fiber_constant_coordinate(v.with_generators([v.var("z1") - 5]), 1, POINT)


def test_lift_through_a_constant_fiber(pinned_first_block):
    target, certificate = fiber_constant_coordinate(pinned_first_block, 1, POINT)
    witness = extend_derivation(target)
    lifted = lift_point(witness, certificate)
    assert lifted.flags["verified"]
    assert all(lifted.delta(0, v).is_zero() for v in ("z1", "j1", "jp1", "jpp1"))
    assert lifted.delta(0, "z2") == 1
    assert lifted.delta(0, "j2") == lifted.host.var("jp2")
    assert lifted.host.var("j1") == 2
    assert not verify_witness(pinned_first_block, lifted).all_nonconstant


def test_only_verified_witnesses_are_lifted(pinned_first_block):
    target, certificate = fiber_constant_coordinate(pinned_first_block, 1, POINT)
    witness = extend_derivation(target)
    witness.flags["verified"] = False
    with pytest.raises(ValueError):
        lift_point(witness, certificate)


def test_j_lift_certificates_are_not_lifted():
    lifted = lift_j_to_J(full_space("j", 1))
    witness = extend_derivation(lifted)
    with pytest.raises(ValueError):
        lift_point(witness, j_lift_certificate(full_space("j", 1)))


# --- Tests for the Möbius relations ---

def test_mobius_relations_at_level_one():
    v = full_space("J", 2, constant_params=MOBIUS_CONSTANTS)
    registry = v.registry
    relation, mobius, f1, f2 = mobius_relations(registry, modular_polynomial(1), v.model.block(1), v.model.block(2))
    var = v.var
    a, b, c, d = (var(n) for n in MOBIUS_CONSTANTS)
    denom = c * var("z1") + d
    assert relation == var("j1") - var("j2")
    assert mobius == a * var("z1") + b - var("z2") * denom
    assert f1 == var("jp1") * denom * denom - var("jp2") * (a * d - b * c)
    assert not f2.is_zero()


def test_mobius_constants_must_be_free():
    clashing = full_space("J", 2, constant_params=("a",))
    clashing = clashing.with_generators([clashing.var("j1") - clashing.var("j2")])
    with pytest.raises(ValueError):
        mobius_modular_reduction(clashing, (1, 2), 1)


def test_saturation_removes_a_component():
    registry, (x, y) = polynomial_ring(("x", "y"))
    saturated = saturate(registry, [x * y, x * x], x)
    assert saturated == [MPoly.one(registry)]
    assert saturate(registry, [x * y], x) == [y]


def test_modular_relation_must_hold():
    with pytest.raises(ModularRelationAbsent):
        mobius_modular_reduction(full_space("J", 2), (1, 2), 1)


def test_modular_pair_needs_distinct_blocks(diagonal_j):
    with pytest.raises(ValueError):
        mobius_modular_reduction(diagonal_j, (1, 1), 1)


@pytest.mark.slow
def test_mobius_reduction_of_the_diagonal(diagonal_reduction):
    auxiliary, target, certificate = diagonal_reduction
    assert len(auxiliary.generators) == 4
    assert target.n == 1
    assert target.constant_params == MOBIUS_CONSTANTS
    assert target.generators == ()
    assert certificate.target_broadness.broad
    lines = certificate.lines()
    assert "kind=mobius-modular" in lines and "partner=2" in lines and "level=1" in lines
    assert sum(1 for line in lines if line.startswith("S_poly[")) == 4


@pytest.mark.slow
def test_lift_through_a_mobius_reduction(diagonal_reduction):
    _, target, certificate = diagonal_reduction
    witness = extend_derivation(target, step_budget=MOBIUS_STEP_BUDGET)
    lifted = lift_point(witness, certificate, MOBIUS_STEP_BUDGET)
    assert lifted.flags["verified"]
    assert lifted.variety is certificate.extended_source
    # block 2 keeps the target values; j1 = j2 forces dj1 = dj2
    assert lifted.delta(0, "z2") == 1
    assert lifted.delta(0, "j1") == lifted.delta(0, "j2")


# --- Tests for transfer ---

def test_transfer_renames_into_the_host(pinned_first_block):
    target, certificate = fiber_constant_coordinate(pinned_first_block, 1, POINT)
    witness = extend_derivation(target)
    lifted = lift_point(witness, certificate)
    moved = transfer(witness.delta(0, "j1"), lifted.host, dict(certificate.renaming))
    assert moved == lifted.host.var("jp2")
