import pytest

from ec_toolkit.ax_schanuel import ASWitness, check_ax_schanuel_exp
from ec_toolkit.derivations import DerivationWitness, extend_derivation, verify_witness
from ec_toolkit.errors import ParseError
from ec_toolkit.file_formats import (
    parse_as_witness, parse_base, parse_expression, parse_inputs, parse_polynomial, parse_variety,
    parse_witness, serialize_as_witness, serialize_variety, serialize_witness, tokenize,
)
from ec_toolkit.polynomials import VariableRegistry
from ec_toolkit.varieties import Variety, full_space

PARABOLA = """\
# j1 = z1^2
variety
model=j
n=1
base=Q
poly j1 - z1^2
"""

EXP_AS_WITNESS = """\
aswitness
model=exp
vars=t e
derivations=1
tuple 1 = t, e
table 1 t = 1
table 1 e = e
"""


# --- Fixtures ---

@pytest.fixture
def registry():
    return VariableRegistry(("x", "y"))


@pytest.fixture
def exp_identity():
    return parse_variety("variety\nmodel=exp\nn=1\npoly y1 - x1\n")


# --- Tests for expressions ---

def test_tokenize_columns_are_absolute():
    tokens = tokenize("x + 12", line=3, column=5)
    assert [(t.kind, t.text, t.column) for t in tokens] == [
        ("ident", "x", 5), ("op", "+", 7), ("int", "12", 9), ("end", "", 11),
    ]


def test_expression_precedence(registry):
    value = parse_expression("-x^2 + 2*x*y - (y)/2", registry)
    assert value.to_expr() == parse_expression("2*x*y - x^2 - y/2", registry).to_expr()


def test_rational_expression(registry):
    value = parse_expression("1/(x + y)", registry)
    assert not value.den.is_constant()
    with pytest.raises(ParseError):
        parse_polynomial("1/(x + y)", registry)


def test_polynomial_with_constant_denominator(registry):
    poly = parse_polynomial("(x + y)/2", registry)
    assert poly == parse_polynomial("x/2 + y/2", registry)


@pytest.mark.parametrize("text, column", [
    ("x + w", 5),
    ("x $ y", 3),
    ("x / 0", 3),
    ("(x + y", 7),
    ("x ^ y", 5),
])
def test_expression_errors_carry_columns(registry, text, column):
    with pytest.raises(ParseError) as excinfo:
        parse_expression(text, registry, line=2)
    assert excinfo.value.line == 2
    assert excinfo.value.column == column


# --- Tests for the base descriptor ---

@pytest.mark.parametrize("descriptor, expected", [
    ("Q", ()),
    ("Q(t)", ("t",)),
    ("Q(t1, t2)", ("t1", "t2")),
    ("Q(t1..t3)", ("t1", "t2", "t3")),
])
def test_parse_base(descriptor, expected):
    assert parse_base(descriptor) == expected


@pytest.mark.parametrize("descriptor", ["R", "Q()", "Q(1t)"])
def test_parse_base_rejects(descriptor):
    with pytest.raises(ParseError):
        parse_base(descriptor)


# --- Tests for variety files ---

def test_parse_variety():
    variety = parse_variety(PARABOLA)
    assert variety.model.tag == "j"
    assert variety.n == 1
    assert variety.assume_prime
    assert variety.generators == (variety.var("j1") - variety.var("z1") ** 2,)


def test_serialized_variety_parses_back():
    v = full_space("J", 1, base_params=("t",), constant_params=("a",))
    v = v.with_generators([v.var("z1") - v.var("t") * v.var("a")])
    text = serialize_variety(v)
    assert "base=Q(t)" in text and "constants=a" in text
    again = parse_variety(text)
    assert again.registry.names == v.registry.names
    assert again.generators == v.generators


def test_unknown_variable_in_a_variety_is_located():
    with pytest.raises(ParseError) as excinfo:
        parse_variety("variety\nmodel=j\nn=1\npoly j1 - w1\n")
    assert (excinfo.value.line, excinfo.value.column) == (4, 11)


@pytest.mark.parametrize("text", [
    "model=j\nn=1\n",
    "variety\nn=1\n",
    "variety\nmodel=K\nn=1\n",
    "variety\nmodel=j\nn=one\n",
    "variety\nmodel=j\nn=1\ncolour=red\n",
    "variety\nmodel=j\nn=1\nassume_prime=maybe\n",
    "variety\nmodel=j\nn=1\npoly\n",
    "variety\nmodel=j\nn=1\nconstants=z1\n",
])
def test_malformed_variety_files(text):
    with pytest.raises(ParseError):
        parse_variety(text)


def test_assume_prime_can_be_switched_off():
    variety = parse_variety("variety\nmodel=j\nn=1\nassume_prime=false\npoly j1*z1\n")
    assert not variety.assume_prime


# --- Tests for derivation witnesses ---

def test_zero_witness_is_read_with_defaults(exp_identity):
    witness = parse_witness("witness\nbase=Q\n", exp_identity)
    assert witness.derivation_count == 1
    assert all(value.is_zero() for value in witness.deltas[0].values())
    assert verify_witness(exp_identity, witness).verified


def test_written_witness_reads_back_and_verifies():
    v = full_space("J", 1)
    witness = extend_derivation(v)
    text = serialize_witness(witness)
    assert "flag verified=true" in text
    again = parse_witness(text, v)
    assert isinstance(again, DerivationWitness)
    assert again.flags["verified"]
    assert verify_witness(v, again).verified


def test_witness_errors():
    v = full_space("exp", 1)
    with pytest.raises(ParseError) as excinfo:
        parse_witness("witness\ndelta 1 q1 = 0\n", v)
    assert (excinfo.value.line, excinfo.value.column) == (2, 9)
    with pytest.raises(ParseError):
        parse_witness("witness\nbase=Q(t)\n", v)
    with pytest.raises(ParseError):
        parse_witness("witness\nderivations=1\ndelta 2 x1 = 1\n", v)
    with pytest.raises(ParseError):
        parse_witness("witness\nlambda 1 = 1, 2\n", v)


def test_host_poly_lines_extend_the_host():
    v = full_space("exp", 1)
    witness = parse_witness("witness\nhost_poly x1 - 3\ndelta 1 y1 = 0\n", v)
    assert witness.host.var("x1") == 3
    assert len(witness.host_extra) == 1


# --- Tests for Ax-Schanuel witnesses ---

def test_parse_as_witness():
    w = parse_as_witness(EXP_AS_WITNESS)
    assert isinstance(w, ASWitness)
    assert w.model == "exp"
    assert w.n == 1
    assert check_ax_schanuel_exp(w).verdict == "inequality-holds"
    again = parse_as_witness(serialize_as_witness(w))
    assert [x.to_expr() for x in again.tuples[0]] == ["t", "e"]


@pytest.mark.parametrize("text", [
    "aswitness\nmodel=K\nvars=t\n",
    "aswitness\nmodel=exp\n",
    "aswitness\nmodel=exp\nvars=t e\ntuple 1 = t\n",
    "aswitness\nmodel=exp\nvars=t e\ntuple 2 = t, e\n",
    "aswitness\nmodel=exp\nvars=t\nconstants=c\n",
    "aswitness\nmodel=exp\nvars=t\ntable 1 s = 1\n",
    "aswitness\nmodel=exp\nvars=t t\n",
])
def test_malformed_as_witnesses(text):
    with pytest.raises(ParseError):
        parse_as_witness(text)


# --- Tests for dispatch ---

def test_parse_inputs_dispatches_on_the_first_line(exp_identity):
    assert isinstance(parse_inputs(PARABOLA), Variety)
    assert isinstance(parse_inputs(EXP_AS_WITNESS), ASWitness)
    assert isinstance(parse_inputs("witness\n", exp_identity), DerivationWitness)


@pytest.mark.parametrize("text", ["", "# only a comment\n", "matrix\n", "witness\n"])
def test_parse_inputs_rejects(text):
    with pytest.raises(ParseError):
        parse_inputs(text)
