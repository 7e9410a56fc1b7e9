import os

import pytest
import yaml

from helpers import CONFIG_DIR
from macbench.config_manager import ConfigManager, RunConfig
from macbench.errors import ConfigError
from macbench.run_logger import RunLogger
from macbench.seeds import DEFAULT_SEED, mix64, resolve_seed


class TestConfigManager:
    def test_defaults_without_file(self, clean_env):
        manager = ConfigManager()
        assert manager.seed == DEFAULT_SEED
        assert manager.analytic_params().n_nodes == 10
        assert manager.frame_timing().data_rate == 250_000

    @pytest.mark.parametrize("name", ["default.yaml", "compare.yaml"])
    def test_shipped_manifests_load(self, clean_env, name):
        manager = ConfigManager(os.path.join(CONFIG_DIR, name))
        assert manager.seed == 42
        manager.sim_config()
        manager.sweep_spec()

    def test_technique_aliases(self, clean_env, config_file):
        path = config_file("version: 1\nsimulation:\n  technique: csma\nsweep:\n  techniques: [CSMA-CA, tdma]\n")
        manager = ConfigManager(path)
        assert manager.sim_config().technique == "csma_1p"
        assert manager.sweep_spec().techniques == ("csma_ca", "tdma")

    def test_sim_config_inherits_analytic_section(self, clean_env, config_file):
        manager = ConfigManager(config_file("version: 1\nanalytic:\n  n_nodes: 3\n  norm_prop_delay: 0.2\n"))
        config = manager.sim_config(technique="fdma")
        assert (config.n_stations, config.norm_prop_delay_a) == (3, 0.2)

    def test_cli_seed_reaches_runs(self, clean_env):
        manager = ConfigManager(cli_seed=9)
        assert manager.sim_config().seed == 9
        assert manager.sweep_spec().base_seed == 9

    def test_sweep_overrides_drop_single_run_keys(self, clean_env, config_file):
        path = config_file("version: 1\nsimulation:\n  technique: tdma\n  offered_load_g: 0.3\n  stop_packets: 500\n")
        spec = ConfigManager(path).sweep_spec()
        assert spec.sim_overrides == {"stop_packets": 500}

    @pytest.mark.parametrize("text", [
        "version: 2\n",
        "version: 1\nsimulation:\n  seed: 4\n",
        "version: 1\nsimulation:\n  technique: token-ring\n",
        "version: 1\nsimulation:\n  warp: 9\n",
        "version: 1\nanalytic:\n  queue_occ: 1.0\n",
        "version: 1\nsweep:\n  replications: 0\n",
        "- just\n- a list\n",
    ])
    def test_rejected(self, clean_env, config_file, text):
        with pytest.raises(ConfigError):
            ConfigManager(config_file(text))

    def test_yaml_error_position(self):
        with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
            ConfigManager.parse("version: 1\nanalytic:\n  n_nodes: [1, 2\n")

    def test_invalid_sim_settings_at_build_time(self, clean_env, config_file):
        manager = ConfigManager(config_file("version: 1\nsimulation:\n  stop_packets: -5\n"))
        with pytest.raises(ConfigError):
            manager.sim_config()

    def test_dump_round_trips(self, clean_env, config_file):
        manager = ConfigManager(os.path.join(CONFIG_DIR, "compare.yaml"), cli_seed=5)
        document = yaml.safe_load(manager.dump())
        assert document["seed"] == 5
        assert RunConfig.model_validate(document).sweep == manager.config.sweep


class TestSeeds:
    def test_mix64_reference_values(self):
        # first outputs of a SplitMix64 generator seeded with 0
        assert mix64(0) == 0xE220A8397B1DCDAF
        assert mix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4

    def test_resolution_order(self, clean_env):
        assert resolve_seed() == DEFAULT_SEED
        clean_env.setenv("MACBENCH_SEED", "8")
        assert resolve_seed() == 8
        assert resolve_seed(config_seed=9) == 9
        assert resolve_seed(cli_seed=0, config_seed=9) == 0


class TestRunLogger:
    def test_console_and_records(self, capsys):
        logger = RunLogger(run_id="r1")
        logger.info("started", component="sweep")
        logger.error("broke", technique="tdma")
        err = capsys.readouterr().err
        assert "[INFO] started" in err and "[ERROR] broke" in err
        assert [r["level"] for r in logger.records] == ["INFO", "ERROR"]
        assert logger.records[0]["run_id"] == "r1"
        assert logger.errors("tdma") and not logger.errors("fdma")

    def test_quiet(self, capsys):
        logger = RunLogger(quiet=True)
        logger.warning("hush")
        assert capsys.readouterr().err == ""
        assert logger.records[0]["message"] == "hush"

    def test_run_status(self):
        logger = RunLogger(quiet=True)
        logger.update_run_status("failed", error_message="disk full")
        assert logger.status["status"] == "failed"
        assert logger.errors()[0]["message"] == "Run failed: disk full"
