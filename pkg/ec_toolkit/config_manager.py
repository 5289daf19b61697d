# config_manager.py
import configparser
import logging
from dataclasses import dataclass
from typing import Optional

from .constants import (
    DEFAULT_NMAX, DEFAULT_NONCONSTANT_SEARCH_LIMIT, DEFAULT_ROTUND_BOUND,
    DEFAULT_SERIES_ORDER, DEFAULT_STEP_BUDGET, MAX_MODULAR_LEVEL,
)

logger = logging.getLogger(__name__)

CONFIG_SECTION = "toolkit"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class ToolkitConfig:
    """Tunables shared by the library and the command line."""
    nmax: int = DEFAULT_NMAX  # highest modular level checked for freeness
    rotund_bound: int = DEFAULT_ROTUND_BOUND  # matrix entries range over [-B, B]
    series_order: int = DEFAULT_SERIES_ORDER
    groebner_step_budget: int = DEFAULT_STEP_BUDGET
    nonconstant_search_limit: int = DEFAULT_NONCONSTANT_SEARCH_LIMIT
    modpoly_cache_path: Optional[str] = None
    log_level: str = "WARNING"

    def __post_init__(self):
        """Validate ranges; out-of-range values fall back to the defaults."""
        if self.nmax < 1 or self.nmax > MAX_MODULAR_LEVEL:
            logger.warning(f"nmax value {self.nmax} is outside the supported range (1-{MAX_MODULAR_LEVEL}). Using {DEFAULT_NMAX}.")
            self.nmax = DEFAULT_NMAX

        if self.rotund_bound < 1 or self.rotund_bound > 6:
            logger.warning(f"rotund_bound value {self.rotund_bound} is outside the supported range (1-6). Using {DEFAULT_ROTUND_BOUND}.")
            self.rotund_bound = DEFAULT_ROTUND_BOUND

        if self.series_order < 2 or self.series_order > 400:
            logger.warning(f"series_order value {self.series_order} is outside the supported range (2-400). Using {DEFAULT_SERIES_ORDER}.")
            self.series_order = DEFAULT_SERIES_ORDER

        if self.groebner_step_budget < 1 or self.groebner_step_budget > 10 ** 8:
            logger.warning(f"groebner_step_budget value {self.groebner_step_budget} is outside the supported range. Using {DEFAULT_STEP_BUDGET}.")
            self.groebner_step_budget = DEFAULT_STEP_BUDGET

        if self.nonconstant_search_limit < 1:
            logger.warning(f"nonconstant_search_limit value {self.nonconstant_search_limit} must be positive. Using {DEFAULT_NONCONSTANT_SEARCH_LIMIT}.")
            self.nonconstant_search_limit = DEFAULT_NONCONSTANT_SEARCH_LIMIT

        level = str(self.log_level).upper()
        if level not in LOG_LEVELS:
            logger.warning(f"log_level '{self.log_level}' is not a logging level. Using WARNING.")
            level = "WARNING"
        self.log_level = level


def _read_int(section: configparser.SectionProxy, key: str, default: int) -> int:
    try:
        return section.getint(key, fallback=default)
    except ValueError:
        logger.warning(f"Invalid {key} value in config. Using default {default}.")
        return default


def load_toolkit_config(path: Optional[str] = None) -> ToolkitConfig:
    """Loads toolkit settings from the [toolkit] section of an INI file.

    Args:
        path (Optional[str]): The configuration file. None means defaults only;
            no file is ever looked up implicitly.

    Returns:
        ToolkitConfig: Settings from the file. A missing file or section and
            malformed values are logged and replaced by defaults.
    """
    if path is None:
        return ToolkitConfig()

    parser = configparser.ConfigParser()
    logger.info(f"Attempting to load config from: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            parser.read_file(f)
    except FileNotFoundError:
        logger.warning(f"Configuration file '{path}' not found. Using defaults.")
        return ToolkitConfig()
    except configparser.Error as e:
        logger.warning(f"Configuration file '{path}' could not be parsed ({e}). Using defaults.")
        return ToolkitConfig()

    if CONFIG_SECTION not in parser:
        logger.warning(f"No [{CONFIG_SECTION}] section in '{path}'. Using defaults.")
        return ToolkitConfig()

    section = parser[CONFIG_SECTION]
    cache_path = section.get("modpoly_cache_path") or None
    config = ToolkitConfig(
        nmax=_read_int(section, "nmax", DEFAULT_NMAX),
        rotund_bound=_read_int(section, "rotund_bound", DEFAULT_ROTUND_BOUND),
        series_order=_read_int(section, "series_order", DEFAULT_SERIES_ORDER),
        groebner_step_budget=_read_int(section, "groebner_step_budget", DEFAULT_STEP_BUDGET),
        nonconstant_search_limit=_read_int(section, "nonconstant_search_limit", DEFAULT_NONCONSTANT_SEARCH_LIMIT),
        modpoly_cache_path=cache_path,
        log_level=section.get("log_level", "WARNING"),
    )
    logger.info(f"Loaded toolkit config: {config}")
    return config


# Comments:
# - Command-line flags override whatever is loaded here.
# - Validation lives in __post_init__, parsing in the loader.
