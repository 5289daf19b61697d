import glob
import os
import pytest
from unittest.mock import patch

from ec_toolkit.errors import RegistryMismatch
from ec_toolkit.file_formats import parse_variety
from ec_toolkit.polynomials import MPoly
from ec_toolkit.varieties import (
    CoordinateModel, Variety, candidate_row_spaces, check_broadness, check_freeness, check_rotund,
    constant_coordinates, full_space, kept_dimension, monomial_image_dimension, product_variety,
    projection_dimension, proper_over_base, row_space_key, singular_locus_check, variety_dimension,
)

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "corpus")
CORPUS = sorted(glob.glob(os.path.join(CORPUS_DIR, "*.var")))


def load_expectations(path):
    """Collects the `# expect key=value ...` lines of a corpus file."""
    expected = {}
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    for line in text.splitlines():
        if line.startswith("# expect"):
            for pair in line[len("# expect"):].split():
                key, value = pair.split("=")
                expected[key] = value
    return parse_variety(text), expected


def as_bool(value):
    return value == "true"


# --- Fixtures ---

@pytest.fixture(params=CORPUS, ids=[os.path.basename(p) for p in CORPUS])
def corpus_entry(request):
    return load_expectations(request.param)


# --- Tests for the corpus ---

def test_corpus_is_populated():
    assert len(CORPUS) >= 12


def test_corpus_dimension(corpus_entry):
    variety, expected = corpus_entry
    assert variety_dimension(variety) == int(expected["dim"])


def test_corpus_broadness(corpus_entry):
    variety, expected = corpus_entry
    report = check_broadness(variety)
    assert report.broad == as_bool(expected["broad"])
    assert report.strongly_broad == as_bool(expected["strongly"])
    assert f"{report.label}={expected['broad']}" in report.lines()


def test_corpus_freeness(corpus_entry):
    variety, expected = corpus_entry
    if "free" not in expected:
        pytest.skip("freeness is not defined for this model")
    assert check_freeness(variety, nmax=1).free == as_bool(expected["free"])


def test_corpus_singular_locus(corpus_entry):
    variety, expected = corpus_entry
    if "singular_clean" not in expected:
        pytest.skip("no singular-locus expectation")
    assert singular_locus_check(variety).passes == as_bool(expected["singular_clean"])


def test_corpus_rotundity(corpus_entry):
    variety, expected = corpus_entry
    if "rotund" not in expected:
        pytest.skip("rotundity applies to model exp")
    assert check_rotund(variety, bound=1).rotund == as_bool(expected["rotund"])


# --- Tests for models and constructors ---

def test_coordinate_model_blocks():
    model = CoordinateModel("J", 2)
    assert model.block(2) == ("z2", "j2", "jp2", "jpp2")
    assert model.coordinate("jpp", 1) == "jpp1"
    with pytest.raises(ValueError):
        model.block(3)
    with pytest.raises(ValueError):
        CoordinateModel("K", 1)


def test_variety_rejects_foreign_generators():
    other = full_space("j", 1)
    with pytest.raises(RegistryMismatch):
        Variety(CoordinateModel("j", 2), (other.var("z1"),))


def test_parameters_follow_coordinates_in_registry():
    v = full_space("exp", 1, base_params=("t",), constant_params=("a",))
    assert v.registry.names == ("x1", "y1", "t", "a")
    assert v.params == ("t", "a")


def test_product_variety_renumbers_second_factor():
    first = full_space("j", 1)
    second = first.with_generators([first.var("j1") - first.var("z1")])
    prod = product_variety(first, second)
    assert prod.n == 2
    assert prod.generators == (prod.var("j2") - prod.var("z2"),)
    assert variety_dimension(prod) == 3


# --- Tests for dimensions ---

def test_kept_dimension_of_empty_variety():
    v = full_space("j", 1)
    empty = v.with_generators([MPoly.one(v.registry)])
    assert kept_dimension(empty, ["z1"]) == -1
    assert not proper_over_base(empty)


def test_proper_over_base_detects_parameter_relations():
    v = full_space("j", 1, base_params=("t",))
    assert proper_over_base(v.with_generators([v.var("z1") - v.var("t")]))
    assert not proper_over_base(v.with_generators([v.var("t") - 1]))


def test_projection_dimension_validates_indices():
    v = full_space("J", 2)
    assert projection_dimension(v, (1,)) == 4
    with pytest.raises(ValueError):
        projection_dimension(v, (2, 1))
    with pytest.raises(ValueError):
        projection_dimension(v, ())


def test_constant_coordinates():
    v = full_space("j", 2)
    w = v.with_generators([v.var("j2") - 7, v.var("z1") - v.var("j1")])
    assert constant_coordinates(w) == ("j2",)


def test_broadness_lines_list_every_projection():
    report = check_broadness(full_space("j", 2))
    assert "projection_dim[1,2]=4" in report.lines()
    assert "threshold[1,2]=2" in report.lines()
    assert report.failing() is None


# --- Tests for freeness and the singular locus ---

@pytest.mark.slow
def test_level_two_modular_relation_is_found():
    from ec_toolkit.modular import modular_polynomial, modular_relation
    v = full_space("j", 2)
    phi = modular_polynomial(2)
    w = v.with_generators([modular_relation(phi, v.registry, "j1", "j2")])
    report = check_freeness(w, nmax=2)
    assert (2, 1, 2) in report.modular_relations
    assert "modular_relation=Phi2,1,2" in report.lines()


def test_freeness_requires_j_coordinates():
    with pytest.raises(ValueError):
        check_freeness(full_space("exp", 1))


def test_singular_locus_lists_vanishing_functions():
    v = full_space("J", 1)
    report = singular_locus_check(v.with_generators([v.var("j1") - 1728]))
    assert report.failures == ("j1 - 1728",)
    assert "singular_clean=false" in report.lines()


# --- Tests for monomial images and rotundity ---

def test_row_space_key_identifies_equal_spans():
    assert row_space_key([[2, 4]]) == row_space_key([[-1, -2]]) == ((1, 2),)
    assert row_space_key([[1, 0], [1, 1]]) == ((1, 0), (0, 1))


def test_candidate_row_spaces_are_distinct_and_sorted():
    spaces = candidate_row_spaces(2, 1)
    assert len({row_space_key(rows) for rows in spaces}) == len(spaces)
    assert [len(s) for s in spaces] == sorted(len(s) for s in spaces)
    # rank-one spaces: (1,0), (0,1), (1,1), (1,-1); plus the whole plane
    assert len(spaces) == 5


def test_candidate_row_spaces_keep_entries_within_the_bound():
    spaces = candidate_row_spaces(3, 1)
    assert all(abs(x) <= 1 for rows in spaces for row in rows for x in row)
    keys = [row_space_key(rows) for rows in spaces]
    assert len(keys) == len(set(keys))
    # the echelon basis of this span has entries 2
    assert ((2, 0, 1), (0, 2, -1)) in keys
    assert ((1, -1, 1), (1, 1, 0)) in spaces


def test_monomial_image_of_the_diagonal():
    v = full_space("exp", 2)
    diagonal = v.with_generators([v.var("x1") - v.var("x2"), v.var("y1") - v.var("y2")])
    assert monomial_image_dimension(diagonal, [[1, -1]]) == 0
    assert monomial_image_dimension(diagonal, [[1, 1]]) == 2


def test_rotund_report_names_failing_matrix():
    v = full_space("exp", 2)
    diagonal = v.with_generators([v.var("x1") - v.var("x2"), v.var("y1") - v.var("y2")])
    report = check_rotund(diagonal, bound=1)
    assert report.failing_matrix == ((1, -1),)
    assert "rotund=false" in report.lines()
    assert "exp_broad=true" in report.lines()
    with pytest.raises(ValueError):
        check_rotund(diagonal, bound=0)


@patch('ec_toolkit.varieties.monomial_image_dimension')
def test_rotund_report_names_the_enumerated_matrix(mock_image_dimension):
    def image_dimension(variety, rows, step_budget):
        if row_space_key(rows) == ((2, 0, 1), (0, 2, -1)):
            return 1
        return len(rows)
    mock_image_dimension.side_effect = image_dimension
    report = check_rotund(full_space("exp", 3), bound=1)
    assert report.failing_matrix == ((1, -1, 1), (1, 1, 0))
    assert "failing_matrix=1 -1 1;1 1 0" in report.lines()
    assert "image_dim=1" in report.lines() and "rank=2" in report.lines()
