# errors.py
"""Exception hierarchy shared by every module of the toolkit.

Negative *results* (a witness failing verification, an inequality reported as
hypotheses-unmet) are carried by report objects. Exceptions are reserved for
outcomes where no value can be produced.
"""

from typing import Optional


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class RegistryMismatch(ToolkitError):
    """Operands live over different variable registries."""


class ZeroDenominator(ToolkitError, ZeroDivisionError):
    """A denominator is zero (or vanishes on the variety)."""


class SeriesInversionError(ToolkitError, ZeroDivisionError):
    """Attempt to invert a series with no nonzero coefficient."""


class Infeasible(ToolkitError):
    """A linear system has no solution."""


class ResourceLimit(ToolkitError):
    """A configured step budget was exhausted."""


class PoleError(ToolkitError, ZeroDivisionError):
    """R, eta or Psi evaluated where one of its denominators vanishes.

    Attributes:
        denominator (str): Which denominator vanished, e.g. "y", "y - 1728", "y1".
    """

    def __init__(self, denominator: str, message: Optional[str] = None):
        self.denominator = denominator
        super().__init__(message or f"denominator '{denominator}' vanishes")


class SingularLocus(ToolkitError):
    """eta(j_i, jp_i, jpp_i) is undefined on the variety."""


class NotPrimeAssumed(ToolkitError):
    """The variety does not carry the primality contract."""


class UnitIdeal(ToolkitError):
    """The generators define the empty variety."""


class ConstantForced(ToolkitError):
    """Some coordinate is killed by every derivation in the solution space.

    Attributes:
        coordinates (tuple): Names of the coordinates forced to be constant.
    """

    def __init__(self, coordinates):
        self.coordinates = tuple(coordinates)
        super().__init__(f"constant forced on: {', '.join(self.coordinates)}")


class InsufficientOrder(ToolkitError):
    """A q-expansion order is too small for the requested computation."""


class ModularDataUnavailable(ToolkitError):
    """Modular polynomial requested for an unsupported level."""


class NoConstantCoordinate(ToolkitError):
    """No coordinate of the requested block is constant on the variety."""


class FiberEmpty(ToolkitError):
    """Substituting the fibre point yields the unit ideal."""


class InvalidFiberPoint(ToolkitError):
    """The supplied fibre point is not an E_J point over the constants."""


class ModularRelationAbsent(ToolkitError):
    """Phi_N(j_i, j_k) does not lie in I(V)."""


class LiftSingular(ToolkitError):
    """A witness cannot be lifted because the lifting system degenerates."""


class ParseError(ToolkitError):
    """Input text violates the file grammar.

    Attributes:
        line (int): 1-based line number.
        column (int): 1-based column number.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class UnsupportedInput(ToolkitError, ValueError):
    """The operation does not apply to the given variety, witness or option."""
