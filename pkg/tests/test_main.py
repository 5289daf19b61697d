import re
import pytest
from fractions import Fraction

from ec_toolkit.ax_schanuel import as_witness_from_derivation
from ec_toolkit.config_manager import ToolkitConfig
from ec_toolkit.constants import EXIT_INPUT_ERROR, EXIT_INTERNAL, EXIT_NEGATIVE, EXIT_OK
from ec_toolkit.derivations import extend_derivation
from ec_toolkit.file_formats import serialize_as_witness
from ec_toolkit.main import HANDLERS, CommandRequest, UsageError, build_parser, main, request_from_args, run
from ec_toolkit.varieties import full_space

J_SPACE = "variety\nmodel=J\nn=1\nbase=Q\n"
PINNED = "variety\nmodel=J\nn=2\nbase=Q\npoly z1 - 5\n"
FORCED = "variety\nmodel=J\nn=1\npoly z1 - j1\npoly jp1 - 1\npoly jpp1 - 1\n"
EXP_DIAGONAL = "variety\nmodel=exp\nn=2\npoly x1 - x2\npoly y1 - y2\n"
EXP_AS_WITNESS = "aswitness\nmodel=exp\nvars=t e\ntuple 1 = t, e\ntable 1 t = 1\ntable 1 e = e\n"
POINT = (Fraction(5), Fraction(2), Fraction(1), Fraction(1))


# --- Fixtures ---

@pytest.fixture
def write(tmp_path):
    """Writes text to a file under tmp_path and returns its path."""
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write


# --- Tests for CommandRequest validation ---

@pytest.mark.parametrize("request_kwargs", [
    {"subcommand": "check-everything", "inputs": ("a",)},
    {"subcommand": "check-broad", "inputs": ()},
    {"subcommand": "verify-witness", "inputs": ("a",)},
    {"subcommand": "reduce-fiber", "inputs": ("a",), "block": 1},
    {"subcommand": "reduce-mobius", "inputs": ("a",), "pair": (1, 2)},
    {"subcommand": "lift", "inputs": ("a", "b")},
    {"subcommand": "series-modpoly"},
])
def test_validation_rejects_incomplete_requests(request_kwargs):
    with pytest.raises(UsageError):
        CommandRequest(**request_kwargs).validate()


def test_usage_errors_exit_with_input_error():
    code, lines = run(CommandRequest("check-broad"))
    assert code == EXIT_INPUT_ERROR
    assert lines[0] == "# input error"


# --- Tests for the check subcommands ---

def test_check_broad(write):
    code, lines = run(CommandRequest("check-broad", (write("j.var", J_SPACE),)))
    assert code == EXIT_OK
    assert "J_broad=true" in lines


def test_check_rotund_negative(write):
    request = CommandRequest("check-rotund", (write("diag.var", EXP_DIAGONAL),), ToolkitConfig(rotund_bound=1))
    code, lines = run(request)
    assert code == EXIT_NEGATIVE
    assert "rotund=false" in lines


def test_missing_and_malformed_inputs(write, tmp_path):
    code, _ = run(CommandRequest("check-broad", (str(tmp_path / "absent.var"),)))
    assert code == EXIT_INPUT_ERROR
    code, lines = run(CommandRequest("check-broad", (write("bad.var", "variety\nmodel=j\nn=1\npoly q\n"),)))
    assert code == EXIT_INPUT_ERROR
    assert lines[1].startswith("error=ParseError")


# --- Tests for constructions and verification ---

def test_construct_writes_a_witness_that_verifies(write, tmp_path):
    variety = write("j.var", J_SPACE)
    out = str(tmp_path / "w.txt")
    code, lines = run(CommandRequest("construct", (variety,), output=out))
    assert code == EXIT_OK
    assert "verified=true" in lines
    assert "lambda_rank=3" in lines
    code, lines = run(CommandRequest("verify-witness", (variety, out)))
    assert code == EXIT_OK


def test_construct_prints_the_witness_without_output(write):
    code, lines = run(CommandRequest("construct", (write("j.var", J_SPACE),)))
    assert code == EXIT_OK
    assert "#   witness" in lines


def test_construct_nonconstant_reports_forced_constants(write):
    code, lines = run(CommandRequest("construct-nonconstant", (write("forced.var", FORCED),)))
    assert code == EXIT_NEGATIVE
    assert lines[-1].startswith("constant_forced=")


def test_verify_as_exp(write):
    code, lines = run(CommandRequest("verify-as-exp", (write("as.txt", EXP_AS_WITNESS),)))
    assert code == EXIT_OK
    assert "verdict=inequality-holds" in lines


# --- Tests for reductions ---

def test_reduce_fiber_and_lift(write, tmp_path):
    variety = write("pinned.var", PINNED)
    reduced = str(tmp_path / "reduced.var")
    code, lines = run(CommandRequest("reduce-fiber", (variety,), output=reduced, block=1, point=POINT))
    assert code == EXIT_OK
    assert "kind=constant-fiber" in lines
    witness = str(tmp_path / "reduced.w")
    assert run(CommandRequest("construct", (reduced,), output=witness))[0] == EXIT_OK
    code, lines = run(CommandRequest("lift", (variety, witness), block=1, point=POINT))
    assert code == EXIT_OK
    assert "kind=constant-fiber" in lines
    assert "verified=true" in lines


def test_reduce_fiber_with_invalid_point(write):
    request = CommandRequest("reduce-fiber", (write("pinned.var", PINNED),), block=1, point=(5, 1728, 1, 1))
    assert run(request)[0] == EXIT_INPUT_ERROR


def test_reduce_fiber_without_constant_coordinate(write):
    request = CommandRequest("reduce-fiber", (write("j2.var", "variety\nmodel=J\nn=2\n"),), block=1, point=POINT)
    assert run(request)[0] == EXIT_NEGATIVE


# --- Tests for series subcommands ---

def test_series_verify_ode():
    config = ToolkitConfig(series_order=20)
    assert run(CommandRequest("series-verify-ode", config=config))[0] == EXIT_OK
    assert run(CommandRequest("series-verify-ode", config=config, perturb=True))[0] == EXIT_NEGATIVE


def test_series_verify_ode_needs_enough_terms():
    assert run(CommandRequest("series-verify-ode", config=ToolkitConfig(series_order=4)))[0] == EXIT_INPUT_ERROR


def test_series_modpoly_level_one(tmp_path):
    cache = str(tmp_path / "phi.cache")
    code, lines = run(CommandRequest("series-modpoly", level=1, cache=cache, config=ToolkitConfig(series_order=10)))
    assert code == EXIT_OK
    assert lines[1:4] == ["level=1", "degree_x=1", "symmetric=false"]
    assert "monomial=1,0,1" in lines and "monomial=0,1,-1" in lines
    assert "identity_holds=true" in lines
    assert (tmp_path / "phi.cache").exists()


# --- Tests for the report format ---

REPORT_LINE = re.compile(r"^# |^[^=\s]+=")
J_DIAGONAL = "variety\nmodel=J\nn=2\nbase=Q\npoly j1 - j2\n"
EXP_TWO_PARAMETERS = "variety\nmodel=exp\nn=1\nbase=Q(t1,t2)\n"
J_MODEL_LINE = "variety\nmodel=j\nn=1\nbase=Q\n"


def _requests(write, tmp_path):
    """One runnable request per subcommand, built lazily from small inputs."""
    j_space = write("j.var", J_SPACE)
    pinned = write("pinned.var", PINNED)

    def verify_witness():
        witness = str(tmp_path / "j.w")
        run(CommandRequest("construct", (j_space,), output=witness))
        return CommandRequest("verify-witness", (j_space, witness))

    def verify_as_j():
        canonical = as_witness_from_derivation(extend_derivation(full_space("J", 1)))
        return CommandRequest("verify-as-j", (write("as_j.txt", serialize_as_witness(canonical)),),
                              ToolkitConfig(nmax=1))

    def lift():
        reduced = str(tmp_path / "reduced.var")
        run(CommandRequest("reduce-fiber", (pinned,), output=reduced, block=1, point=POINT))
        witness = str(tmp_path / "reduced.w")
        run(CommandRequest("construct", (reduced,), output=witness))
        return CommandRequest("lift", (pinned, witness), block=1, point=POINT)

    return {
        "check-broad": lambda: CommandRequest("check-broad", (j_space,)),
        "check-free": lambda: CommandRequest("check-free", (write("diag.var", J_DIAGONAL),), ToolkitConfig(nmax=1)),
        "check-rotund": lambda: CommandRequest("check-rotund", (write("exp.var", EXP_DIAGONAL),),
                                               ToolkitConfig(rotund_bound=1)),
        "check-singular": lambda: CommandRequest("check-singular", (j_space,)),
        "construct": lambda: CommandRequest("construct", (j_space,)),
        "construct-nonconstant": lambda: CommandRequest("construct-nonconstant", (j_space,)),
        "construct-multi": lambda: CommandRequest("construct-multi", (write("multi.var", EXP_TWO_PARAMETERS),)),
        "verify-witness": verify_witness,
        "verify-as-j": verify_as_j,
        "verify-as-exp": lambda: CommandRequest("verify-as-exp", (write("as_exp.txt", EXP_AS_WITNESS),)),
        "reduce-fiber": lambda: CommandRequest("reduce-fiber", (pinned,), block=1, point=POINT),
        "reduce-mobius": lambda: CommandRequest("reduce-mobius", (write("diag.var", J_DIAGONAL),), pair=(1, 2),
                                                level=1, config=ToolkitConfig(groebner_step_budget=50000)),
        "lift": lift,
        "lift-j-to-J": lambda: CommandRequest("lift-j-to-J", (write("jline.var", J_MODEL_LINE),)),
        "series-verify-ode": lambda: CommandRequest("series-verify-ode", config=ToolkitConfig(series_order=20)),
        "series-modpoly": lambda: CommandRequest("series-modpoly", level=1, cache=str(tmp_path / "phi.cache"),
                                                 config=ToolkitConfig(series_order=10)),
    }


@pytest.mark.parametrize("subcommand", [
    pytest.param(name, marks=pytest.mark.slow) if name == "reduce-mobius" else name for name in HANDLERS
])
def test_every_report_line_is_a_comment_or_key_value(subcommand, write, tmp_path):
    request = _requests(write, tmp_path)[subcommand]()
    code, lines = run(request)
    assert code in (EXIT_OK, EXIT_NEGATIVE, EXIT_INTERNAL)
    assert lines
    bad = [line for line in lines if not REPORT_LINE.match(line)]
    assert bad == []


def test_report_format_covers_every_subcommand(write, tmp_path):
    assert set(_requests(write, tmp_path)) == set(HANDLERS)


# --- Tests for exit-code mapping ---

@pytest.mark.parametrize("error", [ValueError("unexpected"), KeyError("z9"), ZeroDivisionError()])
def test_unexpected_errors_are_internal(error, monkeypatch):
    def broken(request):
        raise error
    monkeypatch.setitem(HANDLERS, "series-verify-ode", broken)
    code, lines = run(CommandRequest("series-verify-ode"))
    assert code == EXIT_INTERNAL
    assert lines[0] == "# internal error"


def test_inapplicable_operation_is_an_input_error(write):
    code, lines = run(CommandRequest("check-rotund", (write("j.var", J_SPACE),)))
    assert code == EXIT_INPUT_ERROR
    assert lines[1].startswith("error=UnsupportedInput")


def test_block_outside_the_variety_is_an_input_error(write):
    request = CommandRequest("reduce-fiber", (write("pinned.var", PINNED),), block=3, point=POINT)
    assert run(request)[0] == EXIT_INPUT_ERROR


def test_clashing_constant_names_are_a_parse_error(write):
    code, lines = run(CommandRequest("check-broad", (write("clash.var", J_SPACE + "constants=z1\n"),)))
    assert code == EXIT_INPUT_ERROR
    assert lines[1].startswith("error=ParseError")


# --- Tests for argument parsing and main ---

def test_flags_override_the_config(tmp_path):
    ini = tmp_path / "toolkit.ini"
    ini.write_text("[toolkit]\nnmax = 2\nseries_order = 12\n", encoding="utf-8")
    args = build_parser().parse_args(
        ["series-modpoly", "--config", str(ini), "--order", "16", "--level", "2", "--pair", "1,2",
         "--point", "5,2,1/2,1"])
    request = request_from_args(args)
    assert request.config.nmax == 2
    assert request.config.series_order == 16
    assert request.pair == (1, 2)
    assert request.point == (5, 2, Fraction(1, 2), 1)


@pytest.mark.parametrize("argv", [
    ["no-such-command"],
    ["reduce-mobius", "v.var", "--pair", "1"],
    ["reduce-fiber", "v.var", "--point", "5,x"],
])
def test_parser_rejects_bad_arguments(argv):
    with pytest.raises(SystemExit) as excinfo:
        build_parser().parse_args(argv)
    assert excinfo.value.code == 2


def test_main_prints_the_report(write, capsys, tmp_path):
    log_file = str(tmp_path / "run.log")
    code = main(["check-broad", write("j.var", J_SPACE), "--log-file", log_file, "-v"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "J_broad=true" in out.splitlines()
    assert "check-broad" in (tmp_path / "run.log").read_text(encoding="utf-8")
