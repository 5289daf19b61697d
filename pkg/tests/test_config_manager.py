import pytest
from unittest.mock import patch, mock_open

from ec_toolkit.config_manager import ToolkitConfig, load_toolkit_config
from ec_toolkit.constants import (
    DEFAULT_NMAX, DEFAULT_NONCONSTANT_SEARCH_LIMIT, DEFAULT_ROTUND_BOUND, DEFAULT_SERIES_ORDER,
    DEFAULT_STEP_BUDGET,
)

VALID_CONFIG_CONTENT = """
[toolkit]
nmax = 3
rotund_bound = 2
series_order = 40
groebner_step_budget = 5000
nonconstant_search_limit = 50
modpoly_cache_path = phi.cache
log_level = info
"""

PARTIAL_CONFIG_CONTENT = """
[toolkit]
nmax = 2
"""

MALFORMED_VALUE_CONTENT = """
[toolkit]
nmax = five
series_order = 12
"""

OUT_OF_RANGE_CONTENT = """
[toolkit]
nmax = 9
rotund_bound = 0
series_order = 1
"""

NO_TOOLKIT_SECTION_CONTENT = """
[General]
setting = value
"""

BROKEN_INI_CONTENT = """
nmax = 3
"""


# --- Tests for load_toolkit_config ---

@patch('ec_toolkit.config_manager.open', new_callable=mock_open, read_data=VALID_CONFIG_CONTENT)
def test_load_toolkit_config_success(mock_open_func):
    config = load_toolkit_config("toolkit.ini")
    assert config.nmax == 3
    assert config.rotund_bound == 2
    assert config.series_order == 40
    assert config.groebner_step_budget == 5000
    assert config.nonconstant_search_limit == 50
    assert config.modpoly_cache_path == "phi.cache"
    assert config.log_level == "INFO"
    mock_open_func.assert_called_once_with("toolkit.ini", 'r', encoding='utf-8')


@patch('ec_toolkit.config_manager.open')
def test_no_path_means_defaults(mock_file_open):
    config = load_toolkit_config()
    assert config == ToolkitConfig()
    mock_file_open.assert_not_called()


@patch('ec_toolkit.config_manager.open')
def test_load_toolkit_config_file_not_found(mock_file_open):
    mock_file_open.side_effect = FileNotFoundError
    config = load_toolkit_config("missing.ini")
    assert config == ToolkitConfig()


@pytest.mark.parametrize("content, expected_nmax, expected_order", [
    (PARTIAL_CONFIG_CONTENT, 2, DEFAULT_SERIES_ORDER),
    (MALFORMED_VALUE_CONTENT, DEFAULT_NMAX, 12),
    (OUT_OF_RANGE_CONTENT, DEFAULT_NMAX, DEFAULT_SERIES_ORDER),
    (NO_TOOLKIT_SECTION_CONTENT, DEFAULT_NMAX, DEFAULT_SERIES_ORDER),
    (BROKEN_INI_CONTENT, DEFAULT_NMAX, DEFAULT_SERIES_ORDER),
])
def test_load_toolkit_config_fallbacks(content, expected_nmax, expected_order):
    with patch('ec_toolkit.config_manager.open', mock_open(read_data=content)):
        config = load_toolkit_config("toolkit.ini")
    assert config.nmax == expected_nmax
    assert config.series_order == expected_order
    assert config.groebner_step_budget == DEFAULT_STEP_BUDGET


@patch('ec_toolkit.config_manager.logger')
@patch('ec_toolkit.config_manager.open', new_callable=mock_open, read_data=NO_TOOLKIT_SECTION_CONTENT)
def test_missing_section_is_logged(mock_open_func, mock_logger):
    load_toolkit_config("other.ini")
    mock_logger.warning.assert_called_once()
    assert "[toolkit]" in mock_logger.warning.call_args[0][0]


# --- Tests for ToolkitConfig validation ---

@pytest.mark.parametrize("kwargs, attribute, expected", [
    ({"nmax": 0}, "nmax", DEFAULT_NMAX),
    ({"nmax": 6}, "nmax", DEFAULT_NMAX),
    ({"nmax": 5}, "nmax", 5),
    ({"rotund_bound": 7}, "rotund_bound", DEFAULT_ROTUND_BOUND),
    ({"series_order": 401}, "series_order", DEFAULT_SERIES_ORDER),
    ({"groebner_step_budget": 0}, "groebner_step_budget", DEFAULT_STEP_BUDGET),
    ({"nonconstant_search_limit": -1}, "nonconstant_search_limit", DEFAULT_NONCONSTANT_SEARCH_LIMIT),
    ({"log_level": "debug"}, "log_level", "DEBUG"),
    ({"log_level": "chatty"}, "log_level", "WARNING"),
])
def test_toolkit_config_validation(kwargs, attribute, expected):
    assert getattr(ToolkitConfig(**kwargs), attribute) == expected


@patch('ec_toolkit.config_manager.logger')
def test_invalid_values_warn(mock_logger):
    ToolkitConfig(nmax=0, rotund_bound=0)
    assert mock_logger.warning.call_count == 2
