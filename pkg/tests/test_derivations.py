import pytest
from unittest.mock import patch

from ec_toolkit.derivations import (
    BaseDiffField, CoordField, DerivationWitness, apply_derivation, assemble_constraints, commutator_residues,
    coordinate_field, extend_derivation, extend_derivation_nonconstant, extend_derivations_multi,
    homogeneous_dimension, host_field, lambda_rank, verify_witness, witness_in_host,
)
from ec_toolkit.errors import (
    ConstantForced, NotPrimeAssumed, RegistryMismatch, SingularLocus, UnitIdeal, UnsupportedInput,
    ZeroDenominator,
)
from ec_toolkit.modular import jpoly_suite
from ec_toolkit.polynomials import MPoly
from ec_toolkit.varieties import Variety, full_space


# --- Fixtures ---

@pytest.fixture
def j_space():
    """The whole J-space on one block, F^4."""
    return full_space("J", 1)


@pytest.fixture
def exp_identity():
    """The graph of the identity in model exp: y1 = x1."""
    v = full_space("exp", 1)
    return v.with_generators([v.var("y1") - v.var("x1")])


@pytest.fixture
def parabola():
    v = full_space("j", 1)
    return v.with_generators([v.var("j1") - v.var("z1") ** 2])


# --- Tests for coordinate fields ---

def test_coordinate_field_reduces_modulo_the_ideal(parabola):
    K = coordinate_field(parabola)
    assert K.var("j1") == K.var("z1") ** 2
    assert K.var("j1") / K.var("z1") == K.var("z1")
    assert K.transcendence_degree() == 1


def test_zero_denominator_on_the_variety(parabola):
    K = coordinate_field(parabola)
    with pytest.raises(ZeroDenominator):
        K.make(MPoly.one(parabola.registry), parabola.generators[0])
    with pytest.raises(ZeroDenominator):
        (K.var("j1") - K.var("z1") ** 2).inverse()


def test_coordinate_field_requires_declared_prime(parabola):
    non_prime = Variety(parabola.model, parabola.generators, assume_prime=False)
    with pytest.raises(NotPrimeAssumed):
        coordinate_field(non_prime)


def test_empty_variety_has_no_field(parabola):
    with pytest.raises(UnitIdeal):
        coordinate_field(parabola.with_generators([parabola.var("z1"), parabola.var("z1") - 1]))


def test_elements_of_different_fields_do_not_mix(parabola):
    other = full_space("j", 1)
    K1, K2 = coordinate_field(parabola), coordinate_field(other)
    with pytest.raises(RegistryMismatch):
        K1.var("z1") + K2.var("z1")


def test_base_must_match_the_variety(j_space):
    with pytest.raises(ValueError):
        coordinate_field(j_space, BaseDiffField(("t",)))


def test_base_diff_field_counts():
    assert BaseDiffField().derivation_count == 1
    assert BaseDiffField().constants_only
    assert BaseDiffField(("t1", "t2")).derivation_count == 2
    assert BaseDiffField(("t1", "t2")).describe() == "Q(t1,t2)"


# --- Tests for the constraint system ---

def test_full_j_space_constraints(j_space):
    K = coordinate_field(j_space)
    system = assemble_constraints(K, j_space)
    assert system.matrix.nrows == 3
    assert system.unknowns == ("d(z1)", "d(j1)", "d(jp1)", "d(jpp1)", "lambda_1")
    assert lambda_rank(K, system) == 3
    assert homogeneous_dimension(system) == 1


def test_generator_rows_come_first(exp_identity):
    K = coordinate_field(exp_identity)
    system = assemble_constraints(K, exp_identity)
    assert system.generator_rows == 1
    assert system.provenance[0].startswith("generator 1")
    assert system.provenance[1].startswith("model:")


def test_model_j_needs_lifting(parabola):
    with pytest.raises(ValueError):
        extend_derivation(parabola)


# --- Tests for extend_derivation ---

def test_canonical_witness_on_full_j_space(j_space):
    w = extend_derivation(j_space)
    K = w.host
    jp, jpp = K.var("jp1"), K.var("jpp1")
    eta = jpoly_suite("eta", (K.var("j1"), jp, jpp))
    assert w.delta(0, "z1") == 1
    assert w.delta(0, "j1") == jp
    assert w.delta(0, "jp1") == jpp
    assert w.delta(0, "jpp1") == eta
    assert w.flags == {"verified": True, "all_nonconstant": True}


def test_exp_identity_forces_zero_derivation(exp_identity):
    w = extend_derivation(exp_identity)
    assert all(value.is_zero() for value in w.deltas[0].values())
    report = verify_witness(exp_identity, w)
    assert report.verified
    assert not report.all_nonconstant


def test_extension_over_a_transcendental_base():
    v = full_space("J", 1, base_params=("t",))
    v = v.with_generators([v.var("z1") - v.var("t")])
    w = extend_derivation(v)
    assert w.delta(0, "z1") == 1
    assert w.lambdas == [(w.host.one(),)]
    assert w.flags["verified"]


def test_singular_locus_is_refused(j_space):
    with pytest.raises(SingularLocus):
        extend_derivation(j_space.with_generators([j_space.var("jp1")]))


def test_single_derivation_base_is_required():
    v = full_space("exp", 1, base_params=("t1", "t2"))
    with pytest.raises(ValueError):
        extend_derivation(v)


# --- Tests for several commuting derivations ---

def test_multi_derivations_on_exp_space():
    v = full_space("exp", 1, base_params=("t1", "t2"))
    w = extend_derivations_multi(v)
    K = w.host
    assert w.derivation_count == 2
    assert w.delta(0, "x1") == 1
    assert w.delta(0, "y1") == K.var("y1")
    assert w.delta(1, "x1").is_zero() and w.delta(1, "y1").is_zero()
    assert all(residue.is_zero() for *_, residue in w.commutators)
    assert w.flags["verified"]


def test_multi_derivations_need_two_parameters():
    with pytest.raises(ValueError):
        extend_derivations_multi(full_space("exp", 1, base_params=("t",)))


def test_commutator_residues_cover_every_pair_and_coordinate():
    v = full_space("exp", 2, base_params=("t1", "t2", "t3"))
    w = extend_derivations_multi(v)
    residues = commutator_residues(w)
    assert len(residues) == 3 * 4
    assert {(a, b) for a, b, _, _ in residues} == {(1, 2), (1, 3), (2, 3)}


# --- Tests for the nonconstant construction ---

def test_nonconstant_witness_on_full_j_space(j_space):
    w = extend_derivation_nonconstant(j_space)
    assert w.flags["all_nonconstant"]
    assert w.flags["verified"]
    assert w.lambdas == [(w.host.zero(),)]


def test_constant_forced_names_every_coordinate(j_space):
    z, j, jp, jpp = (j_space.var(n) for n in ("z1", "j1", "jp1", "jpp1"))
    v = j_space.with_generators([z - j, jp - 1, jpp - 1])
    with pytest.raises(ConstantForced) as excinfo:
        extend_derivation_nonconstant(v)
    assert set(excinfo.value.coordinates) == {"z1", "j1", "jp1", "jpp1"}


def test_nonconstant_construction_refuses_parameters():
    with pytest.raises(UnsupportedInput):
        extend_derivation_nonconstant(full_space("J", 1, base_params=("t",)))


@patch('ec_toolkit.derivations.logger')
def test_nonconstant_construction_warns_on_a_single_unfree_block(mock_logger, j_space):
    pinned = j_space.with_generators([j_space.var("z1") - 5])
    with pytest.raises(ConstantForced) as excinfo:
        extend_derivation_nonconstant(pinned, nmax=2)
    assert "z1" in excinfo.value.coordinates
    warnings = [c[0][0] for c in mock_logger.warning.call_args_list]
    assert any("not J-free up to level 2" in w and "z1" in w for w in warnings)


@patch('ec_toolkit.derivations.check_freeness')
def test_nonconstant_construction_checks_freeness_at_the_given_level(mock_check_freeness, j_space):
    extend_derivation_nonconstant(j_space, nmax=3)
    mock_check_freeness.assert_called_once()
    assert mock_check_freeness.call_args[0][1] == 3


@patch('ec_toolkit.derivations.logger')
def test_free_full_space_does_not_warn_about_freeness(mock_logger, j_space):
    extend_derivation_nonconstant(j_space)
    assert not any("J-free" in c[0][0] for c in mock_logger.warning.call_args_list)


# --- Tests for verification ---

def test_tampered_witness_fails_verification(j_space):
    w = extend_derivation(j_space)
    w.deltas[0]["z1"] = w.host.coerce(2)
    report = verify_witness(j_space, w)
    assert not report.verified
    assert any("dj1 - jp1*dz1" in f for f in report.failures)
    assert "verified=false" in report.lines()
    assert w.flags["verified"] is False


def test_missing_values_are_reported(j_space):
    w = extend_derivation(j_space)
    del w.deltas[0]["jpp1"]
    report = verify_witness(j_space, w)
    assert any("lacks values for jpp1" in f for f in report.failures)


def test_point_off_the_variety_is_reported(j_space):
    K = coordinate_field(j_space)
    on_line = j_space.with_generators([j_space.var("z1") - 3])
    w = DerivationWitness(on_line, K, [{v: K.zero() for v in on_line.coordinates()}], [(K.zero(),)])
    report = verify_witness(on_line, w)
    assert "point not on V: generator 1" in report.failures


def test_zero_jp_requires_a_constant_block(j_space):
    fixed = j_space.with_generators([j_space.var("jp1"), j_space.var("j1") - 5])
    host = host_field(fixed)
    zero = {v: host.zero() for v in fixed.coordinates()}
    w = witness_in_host(fixed, host, [zero], [(host.zero(),)])
    assert w.flags["verified"]
    moving = dict(zero, z1=host.one())
    w = witness_in_host(fixed, host, [moving], [(host.zero(),)])
    assert not w.flags["verified"]


def test_third_derivative_is_exhibited(j_space):
    report = verify_witness(j_space, extend_derivation(j_space))
    assert len(report.third_derivatives) == 1
    assert report.third_derivatives[0].startswith("jpp1'=")


# --- Tests for apply_derivation ---

def test_apply_derivation_quotient_rule(parabola):
    K = coordinate_field(parabola)
    table = {"z1": K.one(), "j1": K.var("z1") * 2}
    element = K.var("j1") / (K.var("z1") + 1)
    # z^2/(z+1) has derivative (z^2 + 2z)/(z+1)^2
    z = K.var("z1")
    assert apply_derivation(K, table, element) == (z * z + z * 2) / ((z + 1) * (z + 1))


def test_apply_derivation_needs_every_value(parabola):
    K = coordinate_field(parabola)
    with pytest.raises(KeyError):
        apply_derivation(K, {"z1": K.one()}, K.var("j1"))


def test_host_field_adds_equations(j_space):
    host = host_field(j_space, [j_space.var("z1") - 2])
    assert isinstance(host, CoordField)
    assert host.var("z1") == 2
