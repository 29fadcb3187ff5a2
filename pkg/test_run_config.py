#!/usr/bin/env python3
"""
Tests for loading and validating run configurations.
"""

import json

import pytest

from kernel_errors import ConfigError
from run_config import SCHEMA_VERSION, apply_overrides, config_from_dict, load_config


def test_defaults():
    """Test that an empty document gives the documented defaults"""
    config = load_config()
    assert config.params.n == 3
    assert config.params.lam == 0.0
    assert config.truncation_spec().k_max == 48
    assert config.grid_spec().n_x == 32
    assert config.kernel_params().is_stokes
    assert config.verify.tolerances == {}


def test_lambda_spelling():
    """Test that the JSON key is 'lambda' and the attribute name is refused"""
    config = config_from_dict({"params": {"lambda": 0.5, "n": 2}})
    assert config.params.lam == 0.5
    assert config.to_dict()["params"]["lambda"] == 0.5
    with pytest.raises(ConfigError):
        config_from_dict({"params": {"lam": 0.5}})


def test_round_trip_through_echo():
    """Test that the configuration echo rebuilds the same configuration"""
    config = config_from_dict({"params": {"n": 2, "lambda": 1.0}, "grid": {"n_t": 4, "n_x": 16},
                               "solve": {"scenario": "bump", "power": 6}, "seed": 7})
    echo = config.to_dict()
    assert echo["schema_version"] == SCHEMA_VERSION
    assert config_from_dict(json.loads(json.dumps(echo))) == config


@pytest.mark.parametrize("document", [
    {"colour": 1},
    {"params": {"dimension": 3}},
    {"params": {"n": True}},
    {"params": {"n": 2.5}},
    {"grid": {"box_edge": "big"}},
    {"schema_version": 2},
    {"params": "n=3"},
    {"seed": 1.5},
])
def test_structural_errors(document):
    """Test unknown keys, wrong types and unsupported versions"""
    with pytest.raises(ConfigError):
        config_from_dict(document)


@pytest.mark.parametrize("document", [
    {"params": {"n": 1}},
    {"params": {"period": -1.0}},
    {"grid": {"n_t": 7}},
    {"truncation": {"tail_tol": 0.0}},
    {"eval": {"kernel": "gamma_heat"}},
    {"eval": {"mode": 0}},
    {"eval": {"points": [[1.0, 0.0]]}},
    {"eval": {"method": "fft"}},
    {"solve": {"scenario": "file"}},
    {"solve": {"width": 0.0}},
    {"decay": {"radii": [2.0, 1.0]}},
    {"decay": {"deriv_orders": [2]}},
    {"decay": {"r": 0.5}},
    {"integrability": {"shells": [0.1, 0.2]}},
    {"integrability": {"q_list": [0.9]}},
    {"verify": {"tolerances": {"mode_delta": -1}}},
    {"threads": 0},
])
def test_value_errors(document):
    """Test that invalid values are rejected before any computation"""
    with pytest.raises(ConfigError):
        config_from_dict(document)


def test_load_config_file_errors(tmp_path):
    """Test missing and malformed configuration files"""
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(broken)
    good = tmp_path / "run.json"
    good.write_text(json.dumps({"params": {"n": 2}}))
    assert load_config(good).params.n == 2


def test_apply_overrides():
    """Test command-line overrides and their revalidation"""
    config = apply_overrides(load_config(), seed=3, threads=2, n=2)
    assert (config.seed, config.threads, config.params.n) == (3, 2, 2)
    with pytest.raises(ConfigError):
        apply_overrides(load_config(), n=1)
    pinned = config_from_dict({"eval": {"points": [[1.0, 0.0, 0.0]]}})
    with pytest.raises(ConfigError):
        apply_overrides(pinned, n=2)
