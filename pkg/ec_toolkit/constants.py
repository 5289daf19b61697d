# constants.py

from fractions import Fraction

# --- Exact arithmetic defaults ---
DEFAULT_SERIES_ORDER = 32  # q-expansions are computed through q^32 unless overridden
DEFAULT_STEP_BUDGET = 200_000  # reduction steps before Buchberger gives up
MAX_DIMENSION_VARIABLES = 16  # independent-set search is exponential beyond this

# --- Geometry defaults ---
DEFAULT_NMAX = 5  # highest modular-polynomial level tested for freeness
MAX_MODULAR_LEVEL = 5
DEFAULT_ROTUND_BOUND = 3  # matrix entries range over [-B, B]
DEFAULT_NONCONSTANT_SEARCH_LIMIT = 10_000  # largest c tried by the nonconstant selection

# --- The j-function differential equation ---
# R(y) = (y^2 - 1968 y + 2654208) / (2 y^2 (y - 1728)^2)
R_NUMERATOR_COEFFS = (1, -1968, 2654208)  # descending powers of y
J_SPECIAL_VALUE = 1728
THREE_HALVES = Fraction(3, 2)

# --- Eisenstein normalizations ---
E4_FACTOR = 240
E6_FACTOR = -504
DELTA_POWER = 24

# --- Coordinate models ---
# Per index i the J model carries (z_i, j_i, jp_i, jpp_i), the j model (z_i, j_i)
# and the exp model (x_i, y_i).
MODEL_BLOCKS = {
    "J": ("z", "j", "jp", "jpp"),
    "j": ("z", "j"),
    "exp": ("x", "y"),
}

# --- CLI exit codes ---
EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL = 3

# General Comments:
# - Centralizes defaults shared across modules; imports nothing from the package.
# - Configurable values here are only defaults; ToolkitConfig and CLI flags override them.
