"""config.yaml loading, seed precedence and logging setup"""

import logging

import pytest

from lib.config_manager import (
    LOGGER_ROOT,
    SEED_ENV_VAR,
    ProjectConfig,
    find_project_root,
    get_logger,
    load_config,
    resolve_seed,
    setup_logging,
)
from lib.errors import ConfigError


class TestProjectConfig:
    def test_defaults(self):
        config = ProjectConfig()
        assert config.seed is None
        assert config.trials == 10000
        assert config.max_qubits == 24
        assert config.max_compartment_enumeration == 20
        assert config.model == "recursion"
        assert config.format == "csv"

    def test_from_dict(self):
        config = ProjectConfig.from_dict(
            {
                "simulation": {"seed": 7, "trials": 500},
                "tolerances": {"norm": 1e-8, "sigma": 4.0},
                "analysis": {"statistic": "min", "model": "exact"},
            },
            source="inline",
        )
        assert config.seed == 7
        assert config.trials == 500
        assert config.norm_tolerance == 1e-8
        assert config.sigma == 4.0
        assert config.statistic == "min"
        assert config.model == "exact"
        assert config.source == "inline"

    @pytest.mark.parametrize(
        "data",
        [
            {"network": {"port": 80}},
            {"simulation": {"speed": 3}},
            {"simulation": [1, 2]},
            {"analysis": {"model": "lattice"}},
            {"simulation": {"trials": 0}},
            {"limits": {"max_qubits": 30}},
            {"tolerances": {"confidence": 1.5}},
            {"tolerances": {"norm": 0.0}},
            {"tolerances": {"identity": 1e-12}},
            {"logging": {"level": "LOUD"}},
        ],
    )
    def test_invalid_documents(self, data):
        with pytest.raises(ConfigError):
            ProjectConfig.from_dict(data)

    def test_to_dict_sections(self):
        nested = ProjectConfig(seed=3).to_dict()
        assert nested["simulation"]["seed"] == 3
        assert nested["limits"]["max_b_space_bits"] == 16
        assert set(nested) == {"simulation", "limits", "tolerances", "analysis", "output", "logging"}


class TestLoadConfig:
    def test_explicit_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("simulation:\n  seed: 11\noutput:\n  format: json\n")
        config = load_config(path)
        assert config.seed == 11
        assert config.format == "json"
        assert config.source == str(path)

    def test_missing_explicit_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("simulation: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_non_mapping(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("")
        assert load_config(path).trials == ProjectConfig().trials

    def test_search_upward(self, tmp_path, monkeypatch):
        (tmp_path / "config.yaml").write_text("simulation:\n  trials: 42\n")
        nested = tmp_path / "a" / "b"
        nested.mkdir(parents=True)
        monkeypatch.chdir(nested)
        assert find_project_root() == tmp_path.resolve()
        assert load_config().trials == 42

    def test_no_file_found(self, tmp_path):
        assert find_project_root(tmp_path) == tmp_path.resolve()


class TestResolveSeed:
    def test_cli_wins(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "5")
        assert resolve_seed(9, ProjectConfig(seed=1)) == (9, "cli")

    def test_env_beats_config(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "5")
        assert resolve_seed(None, ProjectConfig(seed=1)) == (5, "env")

    def test_config_then_default(self):
        assert resolve_seed(None, ProjectConfig(seed=1)) == (1, "config")
        assert resolve_seed(None, ProjectConfig()) == (0, "default")

    def test_empty_env_is_ignored(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "")
        assert resolve_seed(None, ProjectConfig(seed=2)) == (2, "config")

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "seven")
        with pytest.raises(ConfigError):
            resolve_seed(None, ProjectConfig())


class TestLogging:
    def test_module_loggers_share_root(self):
        assert get_logger("statevector").name == f"{LOGGER_ROOT}.statevector"

    def test_setup_logging_is_idempotent(self):
        logger = setup_logging("debug")
        handlers = len(logger.handlers)
        assert setup_logging("warning") is logger
        assert len(logger.handlers) == handlers
        assert logger.level == logging.WARNING
