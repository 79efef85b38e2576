"""Tests for run configuration parsing and validation.

This module tests the strict schema (unknown keys, types, ranges), the
dotted-key overrides, YAML loading and the hypothesis checks performed before
any solve starts.
"""

import copy

import pytest

from radstab.config import RunConfig, load_yaml, parse_config, uses_weight_slope
from radstab.exceptions import ConfigurationError, HypothesisError, ObservationTimeError


class TestParseConfig:
    """Test cases for building a RunConfig from a mapping."""

    def test_minimal_config_defaults(self, minimal_config):
        """Test that missing sections take their defaults."""
        config = parse_config(minimal_config)

        assert isinstance(config, RunConfig)
        assert config.subcommand == "forward"
        assert config.mesh.cells == (8, 8)
        assert config.mesh.extents == (1.0, 1.0)
        assert config.coefficients.phase.kind == "isotropic"
        assert config.time.cfl_factor == 0.9
        assert config.carleman.beta == 0.5
        assert config.ensemble.seed == 0

    def test_empty_mapping(self):
        """Test that an empty mapping is a valid forward run."""
        config = parse_config({})

        assert config.subcommand == "forward"
        assert config.initial.kind == "constant"

    def test_subcommand_argument_wins(self, minimal_config):
        """Test that the subcommand argument overrides the file."""
        minimal_config["subcommand"] = "linearized"

        config = parse_config(minimal_config, subcommand="forward")

        assert config.subcommand == "forward"

    def test_unknown_top_level_key(self, minimal_config):
        """Test that unknown keys are rejected by name."""
        minimal_config["solver"] = {}

        with pytest.raises(ConfigurationError, match="Unknown configuration key 'solver'"):
            parse_config(minimal_config)

    def test_unknown_nested_key(self, minimal_config):
        """Test that nested unknown keys are reported with their dotted path."""
        minimal_config["mesh"]["size"] = 3

        with pytest.raises(ConfigurationError, match="'mesh.size'"):
            parse_config(minimal_config)

    @pytest.mark.parametrize(
        "section,key,value",
        [
            ("mesh", "cells", [8]),
            ("velocity", "n_angles", "8"),
            ("velocity", "n_angles", 8.5),
            ("time", "horizon", "long"),
            ("ensemble", "weighted", "yes"),
        ],
    )
    def test_wrong_types(self, minimal_config, section, key, value):
        """Test that values of the wrong type are rejected."""
        minimal_config.setdefault(section, {})[key] = value

        with pytest.raises(ConfigurationError, match=f"{section}.{key}"):
            parse_config(minimal_config)

    def test_integers_accepted_as_floats(self, minimal_config):
        """Test that YAML integers are coerced where floats are expected."""
        minimal_config["velocity"]["v1"] = 2

        config = parse_config(minimal_config)

        assert config.velocity.v1 == 2.0
        assert isinstance(config.velocity.v1, float)

    def test_to_dict_echo(self, minimal_config):
        """Test that the config echoes as plain nested data."""
        data = parse_config(minimal_config).to_dict()

        assert data["mesh"]["cells"] == [8, 8]
        assert data["initial"]["params"]["width"] == 0.15
        assert data["holder"]["amplitudes"][0] == 0.0005


class TestOverrides:
    """Test cases for dotted-key overrides."""

    def test_seed_and_threads(self, minimal_config):
        """Test that overrides replace single values."""
        config = parse_config(
            minimal_config, overrides={"ensemble.seed": 42, "ensemble.threads": 4}
        )

        assert config.ensemble.seed == 42
        assert config.ensemble.threads == 4

    def test_none_is_ignored(self, minimal_config):
        """Test that a None override leaves the value alone."""
        config = parse_config(minimal_config, overrides={"ensemble.seed": None})

        assert config.ensemble.seed == 0

    def test_unknown_override(self, minimal_config):
        """Test that overrides are held to the same schema."""
        with pytest.raises(ConfigurationError, match="ensemble.color"):
            parse_config(minimal_config, overrides={"ensemble.color": 1})

    def test_override_is_validated(self, minimal_config):
        """Test that overridden values go through validation."""
        with pytest.raises(ConfigurationError, match="threads"):
            parse_config(minimal_config, overrides={"ensemble.threads": 0})


class TestValidation:
    """Test cases for range checks and hypotheses."""

    def setup_method(self):
        """Set up test fixtures."""
        self.ensemble_config = {
            "subcommand": "stability-ensemble",
            "mesh": {"cells": [8, 8]},
            "initial": {"kind": "constant", "params": {"value": 1.0}},
            "ensemble": {"kind": "sigma_t", "count": 5},
        }

    def test_beta_range(self, minimal_config):
        """Test that beta ≥ min |v|² names the beta-range condition."""
        minimal_config["carleman"] = {"beta": 1.5}

        with pytest.raises(ConfigurationError, match="beta-range condition: .*0 < beta < min"):
            parse_config(minimal_config)

    def test_beta_range_follows_speeds(self, minimal_config):
        """Test that faster ordinates admit a larger beta."""
        minimal_config["velocity"] = {"v0": 1.5, "v1": 2.0, "n_angles": 8}
        minimal_config["carleman"] = {"beta": 1.5}

        assert parse_config(minimal_config).carleman.beta == 1.5

    def test_zero_speed(self, minimal_config):
        """Test that v0 = 0 is reported as a velocity configuration error."""
        minimal_config["velocity"]["v0"] = 0.0

        with pytest.raises(ConfigurationError, match="velocity"):
            parse_config(minimal_config)

    @pytest.mark.parametrize(
        "section,values",
        [
            ("time", {"cfl_factor": 1.5}),
            ("time", {"collision": "implicit"}),
            ("time", {"horizon_margin": 1.0}),
            ("coefficients", {"phase": {"kind": "rayleigh"}}),
            ("inflow", {"mode": "periodic"}),
            ("ensemble", {"kind": "sigma_a"}),
            ("ensemble", {"side": "full", "weighted": True}),
            ("carleman", {"n_s": 1}),
            ("admissibility", {"M": 0.0}),
        ],
    )
    def test_invalid_values(self, minimal_config, section, values):
        """Test that out-of-range values are configuration errors."""
        minimal_config[section] = values

        with pytest.raises(ConfigurationError):
            parse_config(minimal_config)

    def test_holder_amplitudes_span(self, minimal_config):
        """Test that Hölder amplitudes must span more than two decades."""
        minimal_config["holder"] = {"amplitudes": [0.01, 0.02, 0.05, 0.1]}

        with pytest.raises(ConfigurationError, match="two decades"):
            parse_config(minimal_config)

    def test_short_horizon_for_linearized(self, minimal_config):
        """Test that a given horizon is checked against (r_max - r_min)/beta."""
        minimal_config["subcommand"] = "linearized"

        with pytest.raises(ObservationTimeError) as excinfo:
            parse_config(minimal_config)
        assert excinfo.value.condition == "observation-time"

    def test_forward_skips_observation_time(self, minimal_config):
        """Test that forward runs accept any positive horizon."""
        assert parse_config(minimal_config).time.horizon == 0.5

    def test_positive_initial_data(self):
        """Test that σ_t ensembles need positive initial data."""
        config = copy.deepcopy(self.ensemble_config)
        config["initial"]["params"]["value"] = 0.0

        with pytest.raises(HypothesisError) as excinfo:
            parse_config(config)
        assert excinfo.value.condition == "positive-initial-data"

    def test_positive_source_factor(self):
        """Test that source ensembles need a positive factor R."""
        config = copy.deepcopy(self.ensemble_config)
        config["ensemble"]["kind"] = "linearized"
        config["source"] = {"factor": {"kind": "constant", "params": {"value": -1.0}}}

        with pytest.raises(HypothesisError) as excinfo:
            parse_config(config)
        assert excinfo.value.condition == "positive-source-factor"

    def test_linearized_source_factor(self, minimal_config):
        """Test that a single linearized run with R = 0 is refused while parsing."""
        minimal_config["time"] = {}
        minimal_config["source"] = {"factor": {"kind": "constant", "params": {"value": 0.0}}}

        with pytest.raises(HypothesisError, match="R\\(x, v, 0\\) > 0") as excinfo:
            parse_config(minimal_config, subcommand="linearized")
        assert excinfo.value.condition == "positive-source-factor"

    def test_initial_data_message_names_condition(self):
        """Test that the refusal states the inequality a > 0."""
        config = copy.deepcopy(self.ensemble_config)
        config["initial"]["params"]["value"] = -0.5

        with pytest.raises(HypothesisError, match="a\\(x, v\\) > 0 on Ω × V \\(minimum -0.5\\)"):
            parse_config(config)

    def test_weight_slope_usage(self):
        """Test which runs measure the observation time with beta."""
        coefficient = parse_config(self.ensemble_config)
        source = parse_config({"subcommand": "holder-sweep"})

        assert not uses_weight_slope(coefficient)
        assert uses_weight_slope(source)
        assert not uses_weight_slope(parse_config({}))


class TestLoadYaml:
    """Test cases for reading configuration files."""

    def test_load_file(self, tmp_path):
        """Test that a YAML file is parsed into a config."""
        path = tmp_path / "run.yaml"
        path.write_text(
            "subcommand: energy-check\n"
            "mesh: {cells: [4, 4]}\n"
            "velocity: {v0: 1.0, v1: 1.0, n_angles: 8}\n",
            encoding="utf-8",
        )

        config = parse_config(path)

        assert config.subcommand == "energy-check"
        assert config.mesh.cells == (4, 4)

    def test_missing_file(self, tmp_path):
        """Test that a missing file is a configuration error."""
        with pytest.raises(ConfigurationError, match="does not exist"):
            load_yaml(tmp_path / "absent.yaml")

    def test_malformed_file(self, tmp_path):
        """Test that malformed YAML is a configuration error."""
        path = tmp_path / "bad.yaml"
        path.write_text("mesh: {cells: [4, 4\n", encoding="utf-8")

        with pytest.raises(ConfigurationError, match="Cannot parse"):
            load_yaml(path)

    def test_empty_file(self, tmp_path):
        """Test that an empty file loads as an empty mapping."""
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")

        assert load_yaml(path) == {}
