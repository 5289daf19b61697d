#!/usr/bin/env python
"""Command-line entry point of the toolkit.

Each subcommand reads variety or witness files, runs one library operation and
prints a report on stdout: prose lines start with "# ", everything else is
key=value. Produced artifacts (witnesses, reduced varieties) are written to
--output. Logging goes to stderr, or to --log-file.

Exit codes: 0 the property holds or the construction succeeded, 1 a
well-formed negative outcome, 2 an input error, 3 a resource limit or an
internal error.
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .ax_schanuel import check_ax_schanuel_exp, check_ax_schanuel_j
from .config_manager import ToolkitConfig, load_toolkit_config
from .constants import EXIT_INPUT_ERROR, EXIT_INTERNAL, EXIT_NEGATIVE, EXIT_OK
from .derivations import (
    assemble_constraints, coordinate_field, extend_derivation, extend_derivation_nonconstant,
    extend_derivations_multi, homogeneous_dimension, lambda_rank, verify_witness,
)
from .errors import (
    ConstantForced, FiberEmpty, Infeasible, InsufficientOrder, InvalidFiberPoint, LiftSingular,
    ModularDataUnavailable, ModularRelationAbsent, NoConstantCoordinate, NotPrimeAssumed, ParseError,
    RegistryMismatch, ResourceLimit, SingularLocus, UnitIdeal, UnsupportedInput,
)
from .file_formats import (
    parse_as_witness, parse_variety, parse_witness, serialize_variety, serialize_witness,
)
from .modular import (
    j_series, load_modular_polynomial_cache, modular_polynomial, save_modular_polynomial_cache,
    verify_j_ode, verify_modular_polynomial,
)
from .reductions import fiber_constant_coordinate, j_lift_certificate, lift_point, mobius_modular_reduction
from .series import LaurentSeries
from .varieties import (
    Variety, check_broadness, check_freeness, check_rotund, singular_locus_check,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(levelname)s - [%(name)s:%(lineno)d] - %(message)s'

# subcommand -> number of input files
INPUT_SCHEMA: Dict[str, int] = {
    "check-broad": 1, "check-free": 1, "check-rotund": 1, "check-singular": 1,
    "construct": 1, "construct-nonconstant": 1, "construct-multi": 1,
    "verify-witness": 2, "verify-as-j": 1, "verify-as-exp": 1,
    "reduce-fiber": 1, "reduce-mobius": 1, "lift": 2, "lift-j-to-J": 1,
    "series-verify-ode": 0, "series-modpoly": 0,
}

NEGATIVE_ERRORS = (
    ConstantForced, Infeasible, SingularLocus, ModularRelationAbsent, NoConstantCoordinate,
    FiberEmpty, LiftSingular,
)
INPUT_ERRORS = (
    ParseError, InvalidFiberPoint, NotPrimeAssumed, UnitIdeal, RegistryMismatch,
    ModularDataUnavailable, InsufficientOrder, UnsupportedInput,
)


class UsageError(ValueError):
    """Flags or inputs do not fit the subcommand."""


@dataclass
class CommandRequest:
    """One validated invocation.

    Attributes:
        subcommand (str): One of INPUT_SCHEMA.
        inputs (Tuple[str, ...]): Input file paths.
        config (ToolkitConfig): Tunables after command-line overrides.
        output (Optional[str]): Where to write a produced artifact.
        block (Optional[int]): Block index for reduce-fiber and lift.
        point (Tuple[Fraction, ...]): Fibre point.
        pair (Optional[Tuple[int, int]]): Modular pair (i, k).
        level (Optional[int]): Modular level N.
        perturb (bool): series-verify-ode on j + q^2.
        cache (Optional[str]): Modular polynomial cache file.
    """
    subcommand: str
    inputs: Tuple[str, ...] = ()
    config: ToolkitConfig = field(default_factory=ToolkitConfig)
    output: Optional[str] = None
    block: Optional[int] = None
    point: Tuple[Fraction, ...] = ()
    pair: Optional[Tuple[int, int]] = None
    level: Optional[int] = None
    perturb: bool = False
    cache: Optional[str] = None

    def validate(self):
        if self.subcommand not in INPUT_SCHEMA:
            raise UsageError(f"unknown subcommand '{self.subcommand}'")
        expected = INPUT_SCHEMA[self.subcommand]
        if len(self.inputs) != expected:
            raise UsageError(f"{self.subcommand} takes {expected} input file(s), got {len(self.inputs)}")
        if self.subcommand == "reduce-fiber" or (self.subcommand == "lift" and self.point):
            if self.block is None or not self.point:
                raise UsageError("a constant fibre needs --block and --point")
        if self.subcommand == "reduce-mobius" or (self.subcommand == "lift" and self.pair):
            if self.pair is None or self.level is None:
                raise UsageError("a Möbius reduction needs --pair and --level")
        if self.subcommand == "lift" and not self.point and not self.pair:
            raise UsageError("lift needs the reduction it undoes: --block/--point or --pair/--level")
        if self.subcommand == "series-modpoly" and self.level is None:
            raise UsageError("series-modpoly needs --level")


# --- Helpers ---

def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _flag(value: bool) -> str:
    return str(value).lower()


def _load_variety(path: str) -> Variety:
    return parse_variety(_read(path))


def _emit_artifact(request: CommandRequest, text: str, kind: str, lines: List[str]):
    if request.output:
        _write(request.output, text)
        lines.append(f"# {kind} written to {request.output}")
    else:
        lines.append(f"# {kind}:")
        lines.extend(f"#   {row}" for row in text.splitlines())


# --- Handlers ---

Result = Tuple[int, List[str]]


def _check_broad(request: CommandRequest) -> Result:
    report = check_broadness(_load_variety(request.inputs[0]), request.config.groebner_step_budget)
    return (EXIT_OK if report.broad else EXIT_NEGATIVE), report.lines()


def _check_free(request: CommandRequest) -> Result:
    report = check_freeness(_load_variety(request.inputs[0]), request.config.nmax, request.config.groebner_step_budget)
    return (EXIT_OK if report.free else EXIT_NEGATIVE), report.lines()


def _check_rotund(request: CommandRequest) -> Result:
    report = check_rotund(_load_variety(request.inputs[0]), request.config.rotund_bound,
                          request.config.groebner_step_budget)
    return (EXIT_OK if report.rotund else EXIT_NEGATIVE), report.lines()


def _check_singular(request: CommandRequest) -> Result:
    report = singular_locus_check(_load_variety(request.inputs[0]), request.config.groebner_step_budget)
    return (EXIT_OK if report.passes else EXIT_NEGATIVE), report.lines()


def _witness_result(request: CommandRequest, variety: Variety, witness, extra: Sequence[str] = ()) -> Result:
    report = verify_witness(variety, witness)
    lines = [f"# witness for {variety.describe()}"]
    lines.extend(extra)
    lines.extend(report.lines())
    _emit_artifact(request, serialize_witness(witness), "witness", lines)
    return (EXIT_OK if report.verified else EXIT_NEGATIVE), lines


def _system_lines(variety: Variety, budget: int) -> List[str]:
    K = coordinate_field(variety, step_budget=budget)
    system = assemble_constraints(K, variety)
    return [f"lambda_rank={lambda_rank(K, system)}", f"solution_dim={homogeneous_dimension(system)}"]


def _construct(request: CommandRequest) -> Result:
    variety = _load_variety(request.inputs[0])
    budget = request.config.groebner_step_budget
    witness = extend_derivation(variety, step_budget=budget)
    return _witness_result(request, variety, witness, _system_lines(variety, budget))


def _construct_nonconstant(request: CommandRequest) -> Result:
    variety = _load_variety(request.inputs[0])
    try:
        witness = extend_derivation_nonconstant(variety, request.config.nonconstant_search_limit,
                                                request.config.groebner_step_budget, request.config.nmax)
    except ConstantForced as e:
        return EXIT_NEGATIVE, ["# some coordinate is constant on every solution",
                               "constant_forced=" + ",".join(e.coordinates)]
    return _witness_result(request, variety, witness)


def _construct_multi(request: CommandRequest) -> Result:
    variety = _load_variety(request.inputs[0])
    witness = extend_derivations_multi(variety, step_budget=request.config.groebner_step_budget)
    residues = [f"commutator[{a},{b}]({v})={r.to_expr()}" for a, b, v, r in witness.commutators]
    return _witness_result(request, variety, witness, residues)


def _verify_witness(request: CommandRequest) -> Result:
    variety = _load_variety(request.inputs[0])
    witness = parse_witness(_read(request.inputs[1]), variety)
    report = verify_witness(variety, witness)
    return (EXIT_OK if report.verified else EXIT_NEGATIVE), report.lines()


def _as_result(report) -> Result:
    if report.verdict == "VIOLATION":
        return EXIT_INTERNAL, report.lines()
    return (EXIT_OK if report.verdict == "inequality-holds" else EXIT_NEGATIVE), report.lines()


def _verify_as_j(request: CommandRequest) -> Result:
    return _as_result(check_ax_schanuel_j(parse_as_witness(_read(request.inputs[0])), request.config.nmax))


def _verify_as_exp(request: CommandRequest) -> Result:
    return _as_result(check_ax_schanuel_exp(parse_as_witness(_read(request.inputs[0]))))


def _reduction(request: CommandRequest, variety: Variety):
    budget = request.config.groebner_step_budget
    if request.pair is not None:
        _, target, certificate = mobius_modular_reduction(variety, request.pair, request.level, budget)
    else:
        target, certificate = fiber_constant_coordinate(variety, request.block, request.point, budget)
    return target, certificate


def _reduce(request: CommandRequest) -> Result:
    variety = _load_variety(request.inputs[0])
    target, certificate = _reduction(request, variety)
    lines = ["# reduction certificate"] + certificate.lines()
    _emit_artifact(request, serialize_variety(target), "reduced variety", lines)
    broad = certificate.target_broadness is not None and certificate.target_broadness.broad
    return (EXIT_OK if broad else EXIT_NEGATIVE), lines


def _lift(request: CommandRequest) -> Result:
    variety = _load_variety(request.inputs[0])
    target, certificate = _reduction(request, variety)
    witness = parse_witness(_read(request.inputs[1]), target)
    if not verify_witness(target, witness).verified:
        return EXIT_NEGATIVE, ["# the witness does not verify against the reduced variety", "verified=false"]
    lifted = lift_point(witness, certificate, request.config.groebner_step_budget)
    return _witness_result(request, lifted.variety, lifted, [f"kind={certificate.kind}"])


def _lift_j_to_J(request: CommandRequest) -> Result:
    variety = _load_variety(request.inputs[0])
    certificate = j_lift_certificate(variety, request.config.groebner_step_budget)
    source = check_broadness(variety, request.config.groebner_step_budget)
    lines = ["# j-model variety re-read in the J model"] + source.lines() + certificate.target_broadness.lines()
    _emit_artifact(request, serialize_variety(certificate.target), "lifted variety", lines)
    return (EXIT_OK if certificate.target_broadness.broad else EXIT_NEGATIVE), lines


def _series_verify_ode(request: CommandRequest) -> Result:
    order = request.config.series_order
    j = None
    if request.perturb:
        j = j_series(order).j + LaurentSeries.monomial(2, order)
    report = verify_j_ode(order, j)
    lines = [f"# theta-form differential equation of j{' + q^2' if request.perturb else ''}"] + report.lines()
    return (EXIT_OK if report.holds else EXIT_NEGATIVE), lines


def _series_modpoly(request: CommandRequest) -> Result:
    if request.cache:
        try:
            load_modular_polynomial_cache(request.cache)
        except FileNotFoundError:
            logger.info(f"no cache at {request.cache} yet")
    phi = modular_polynomial(request.level)
    failure = verify_modular_polynomial(phi, request.config.series_order)
    lines = [f"# modular polynomial of level {phi.level}", f"level={phi.level}",
             f"degree_x={phi.degree_x()}", f"symmetric={_flag(phi.is_symmetric())}"]
    for (a, b), c in sorted(phi.poly.term_dict().items(), reverse=True):
        lines.append(f"monomial={a},{b},{c}")
    lines.append(f"substitution_checked_through={request.config.series_order}")
    lines.append(f"identity_holds={_flag(failure is None)}")
    if request.cache:
        save_modular_polynomial_cache(request.cache, [phi])
    return (EXIT_OK if failure is None else EXIT_NEGATIVE), lines


HANDLERS: Dict[str, Callable[[CommandRequest], Result]] = {
    "check-broad": _check_broad,
    "check-free": _check_free,
    "check-rotund": _check_rotund,
    "check-singular": _check_singular,
    "construct": _construct,
    "construct-nonconstant": _construct_nonconstant,
    "construct-multi": _construct_multi,
    "verify-witness": _verify_witness,
    "verify-as-j": _verify_as_j,
    "verify-as-exp": _verify_as_exp,
    "reduce-fiber": _reduce,
    "reduce-mobius": _reduce,
    "lift": _lift,
    "lift-j-to-J": _lift_j_to_J,
    "series-verify-ode": _series_verify_ode,
    "series-modpoly": _series_modpoly,
}


def run(request: CommandRequest) -> Result:
    """Validates and dispatches a request; every failure becomes an exit code.

    Returns:
        (exit code, report lines).
    """
    try:
        request.validate()
        return HANDLERS[request.subcommand](request)
    except (UsageError, OSError, UnicodeDecodeError) + INPUT_ERRORS as e:
        logger.error(f"{request.subcommand}: input error: {e}")
        return EXIT_INPUT_ERROR, ["# input error", f"error={type(e).__name__}: {e}"]
    except NEGATIVE_ERRORS as e:
        logger.warning(f"{request.subcommand}: {type(e).__name__}: {e}")
        return EXIT_NEGATIVE, [f"# {request.subcommand} has no positive outcome", f"error={type(e).__name__}: {e}"]
    except ResourceLimit as e:
        logger.error(f"{request.subcommand}: resource limit: {e}")
        return EXIT_INTERNAL, ["# resource limit reached", f"error=ResourceLimit: {e}"]
    except Exception as e:
        logger.exception(f"{request.subcommand}: internal error")
        return EXIT_INTERNAL, ["# internal error", f"error={type(e).__name__}: {e}"]


# --- Argument parsing ---

def _fractions(text: str) -> Tuple[Fraction, ...]:
    try:
        return tuple(Fraction(part.strip()) for part in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated rationals, got '{text}'") from None


def _pair(text: str) -> Tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
        raise argparse.ArgumentTypeError(f"expected 'i,k', got '{text}'")
    return int(parts[0]), int(parts[1])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ec-toolkit", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=sorted(INPUT_SCHEMA))
    parser.add_argument("inputs", nargs="*", help="variety / witness files")
    parser.add_argument("--nmax", type=int, help="highest modular level for freeness and independence")
    parser.add_argument("--bound", type=int, help="entry bound for rotundity matrices")
    parser.add_argument("--order", type=int, help="q-expansion order")
    parser.add_argument("--block", type=int, help="block index removed by a constant fibre")
    parser.add_argument("--point", type=_fractions, help="fibre point a,b,b',b''")
    parser.add_argument("--pair", type=_pair, help="modular pair i,k (block i is removed)")
    parser.add_argument("--level", type=int, help="modular level N")
    parser.add_argument("--perturb", action="store_true", help="verify the equation on j + q^2")
    parser.add_argument("--cache", help="modular polynomial cache file")
    parser.add_argument("--config", help="INI file with a [toolkit] section")
    parser.add_argument("-o", "--output", help="where to write the produced witness or variety")
    parser.add_argument("--log-file", help="log to this file (overwritten) instead of stderr")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def request_from_args(args: argparse.Namespace) -> CommandRequest:
    config = load_toolkit_config(args.config)
    overrides = {}
    if args.nmax is not None:
        overrides["nmax"] = args.nmax
    if args.bound is not None:
        overrides["rotund_bound"] = args.bound
    if args.order is not None:
        overrides["series_order"] = args.order
    if overrides:
        config = replace(config, **overrides)
    return CommandRequest(
        subcommand=args.subcommand,
        inputs=tuple(args.inputs),
        config=config,
        output=args.output,
        block=args.block,
        point=args.point or (),
        pair=args.pair,
        level=args.level,
        perturb=args.perturb,
        cache=args.cache or config.modpoly_cache_path,
    )


def configure_logging(level: str, log_file: Optional[str]):
    kwargs = {"filename": log_file, "filemode": "w"} if log_file else {"stream": sys.stderr}
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, force=True, **kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    request = request_from_args(args)
    configure_logging("DEBUG" if args.verbose else request.config.log_level, args.log_file)
    logger.info(f"--- ec-toolkit {request.subcommand} ---")
    code, lines = run(request)
    for line in lines:
        print(line)
    logger.info(f"exit code {code}")
    logging.shutdown()
    return code


if __name__ == "__main__":
    sys.exit(main())


# Comments:
# - Exit codes depend only on the report verdict.
# - Config files are read only when --config is given; flags override them.
