import numpy as np
import pytest

from marl_avoidance.errors import ConfigurationError
from marl_avoidance.models.run import RunConfig
from marl_avoidance.utils import get_config, stable_name_key, substitute_env_vars, to_plain, validate_model_config

from .helpers import HelloModel


# Test case for validating a correct configuration
def test_validate_model_config_valid():
    """
    Test the validate_model_config function with a valid configuration.

    Asserts:
        The key1 and key2 in the result configuration match the input values.
    """
    config = {"key1": "value1", "key2": 123}
    result = validate_model_config(config, HelloModel)
    assert result.key1 == "value1"
    assert result.key2 == 123


# Test case for validating a configuration with an invalid type
def test_validate_model_config_invalid_type():
    """
    Test the validate_model_config function with an invalid type for key2.

    Asserts:
        A ConfigurationError naming key2 is raised due to the invalid type.
    """
    config = {"key1": "value1", "key2": "not_an_int"}
    with pytest.raises(ConfigurationError) as exc_info:
        validate_model_config(config, HelloModel)
    assert exc_info.value.key == "key2"


# Test case for validating a configuration with a missing key
def test_validate_model_config_missing_key():
    """
    Test the validate_model_config function with a missing key in the configuration.

    Asserts:
        A ValueError is raised due to the missing key.
    """
    config = {"key1": "value1"}
    with pytest.raises(ValueError):
        validate_model_config(config, HelloModel)


# Test case for validating a configuration with environment variables
def test_validate_model_config_with_env_vars(monkeypatch):
    """
    Test the validate_model_config function with environment variables.

    Asserts:
        The key1 in the result configuration is substituted with the environment
        variable value; key2 remains unchanged.
    """
    monkeypatch.setenv("TEST_ENV_VAR", "env_value")
    config = {"key1": "${TEST_ENV_VAR}", "key2": 123}
    result = validate_model_config(config, HelloModel)
    assert result.key1 == "env_value"
    assert result.key2 == 123


def test_validate_model_config_unknown_key():
    """Unknown run-config keys are reported by name."""
    with pytest.raises(ConfigurationError, match="unknown key") as exc_info:
        validate_model_config({"Learning-rate": 0.1}, RunConfig)
    assert exc_info.value.key == "Learning-rate"


def test_validate_model_config_reports_alias():
    """Cross-field failures name the config-file key."""
    with pytest.raises(ConfigurationError) as exc_info:
        validate_model_config({"scenario": "spread-3a", "Num-adversaries": 1}, RunConfig)
    assert exc_info.value.key == "Num-adversaries"


def test_substitute_env_vars_leaves_numbers(monkeypatch):
    monkeypatch.setenv("RUN_DIR", "/tmp/runs")
    assert substitute_env_vars({"out": "$RUN_DIR/a", "seed": 3}) == {"out": "/tmp/runs/a", "seed": 3}


class TestGetConfig:
    def test_reads_flat_yaml(self, tmp_path):
        """Test reading a flat key-value file."""
        path = tmp_path / "run.yaml"
        path.write_text("scenario: spread-6a\nLr-actor: 0.002\n")

        assert get_config(str(path)) == {"scenario": "spread-6a", "Lr-actor": 0.002}

    def test_empty_file(self, tmp_path):
        """Test that an empty file is an empty mapping."""
        path = tmp_path / "empty.yaml"
        path.write_text("")

        assert get_config(str(path)) == {}

    def test_missing_file(self, tmp_path):
        """Test that a missing file raises a configuration error."""
        with pytest.raises(ConfigurationError, match="does not exist"):
            get_config(str(tmp_path / "missing.yaml"))

    def test_nested_values_rejected(self, tmp_path):
        """Test that nested mappings are rejected with the key named."""
        path = tmp_path / "nested.yaml"
        path.write_text("scenario:\n  name: spread\n")

        with pytest.raises(ConfigurationError, match="nested") as exc_info:
            get_config(str(path))
        assert exc_info.value.key == "scenario"

    def test_non_mapping_rejected(self, tmp_path):
        """Test that a YAML list is not a config."""
        path = tmp_path / "list.yaml"
        path.write_text("- a\n- b\n")

        with pytest.raises(ConfigurationError, match="expected a mapping"):
            get_config(str(path))


def test_to_plain_converts_numpy():
    value = {"a": np.float64(1.5), "b": [np.int64(2), np.array([1.0, 2.0])]}
    assert to_plain(value) == {"a": 1.5, "b": [2, [1.0, 2.0]]}


def test_stable_name_key_is_stable():
    assert stable_name_key("env") == stable_name_key("env")
    assert stable_name_key("env") != stable_name_key("eval")
