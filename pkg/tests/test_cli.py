import io
import os

import pandas as pd
import pytest

from helpers import CONFIG_DIR
from macbench import sweep_harness
from macbench.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from macbench.config_manager import ConfigManager

SMALL_COMPARE = """\
version: 1
seed: 11
simulation:
  stop_packets: 1000
sweep:
  techniques: [pure-aloha, tdma]
  g_grid: [0.2, 0.4, 0.2]
  replications: 2
  relations: [t-vs-g, d-vs-g]
"""

CONCLUSION_COMPARE = """\
version: 1
seed: 11
simulation:
  stop_packets: 1000
sweep:
  techniques: [pure-aloha, slotted-aloha, csma-ca, tdma, fdma]
  g_grid: [0.8, 0.8, 0.1]
  replications: 1
  relations: [t-vs-g]
  conclusion_g: 0.8
"""


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def read_csv(text):
    return pd.read_csv(io.StringIO(text))


class TestAnalytic:
    def test_pure_aloha_throughput(self, clean_env):
        code, out, err = run_cli("analytic", "pure-aloha", "t-vs-g", "0", "2", "0.5")
        assert code == EXIT_OK
        frame = read_csv(out)
        assert list(frame.columns) == ["technique", "relation", "x", "y"]
        assert len(frame) == 5
        assert frame.loc[1, "y"] == pytest.approx(0.18394, abs=1e-5)
        assert "[INFO] seed=42" in err
        assert "peak S=0.18394 at G=0.5; slotted/pure peak ratio=2" in err
        assert "[INFO] Run completed. Records processed: 5" in err

    def test_peak_only_for_aloha_throughput(self, clean_env):
        _, _, err = run_cli("analytic", "tdma", "d-vs-t", "0", "0.5", "0.5")
        assert "peak S=" not in err

    def test_saturated_points_are_skipped(self, clean_env):
        code, out, err = run_cli("analytic", "tdma", "d-vs-g", "0", "1", "0.25")
        assert code == EXIT_OK
        assert len(read_csv(out)) == 4
        assert "[WARNING] skipped x=1" in err

    def test_parameter_flags(self, clean_env):
        _, default, _ = run_cli("analytic", "fdma", "d-vs-t", "0.5", "0.5", "1")
        _, doubled, _ = run_cli("analytic", "fdma", "d-vs-t", "0.5", "0.5", "1", "--n-nodes", "20")
        assert read_csv(doubled).loc[0, "y"] == pytest.approx(2 * read_csv(default).loc[0, "y"])

    def test_as_printed_note(self, clean_env):
        code, _, err = run_cli("analytic", "csma", "d-vs-g", "0.5", "1", "0.5")
        assert code == EXIT_OK
        assert "evaluated as printed" in err

    @pytest.mark.parametrize("argv", [
        ("analytic", "token-ring", "t-vs-g", "0", "1", "0.5"),
        ("analytic", "tdma", "q-vs-g", "0", "1", "0.5"),
        ("analytic", "tdma", "t-vs-g", "0", "1", "0"),
        ("analytic", "tdma", "t-vs-g", "0", "1", "0.5", "--queue-occ", "1.5"),
        ("analytic", "tdma", "t-vs-g", "0", "1"),
    ])
    def test_usage_errors(self, clean_env, argv):
        code, out, _ = run_cli(*argv)
        assert code == EXIT_USAGE
        assert out == ""


class TestTiming:
    def test_default_totals_and_ranking(self, clean_env):
        code, out, _ = run_cli("timing")
        assert code == EXIT_OK
        components, totals, ranking, payload = (read_csv(block) for block in out.strip().split("\n\n"))
        assert set(components["technique"]) == {"csma_ca", "tdma", "fdma", "pure_aloha", "slotted_aloha"}
        totals = totals.set_index("technique")["total_s"]
        assert totals["tdma"] == pytest.approx(0.00522)
        assert totals["csma_ca"] == pytest.approx(0.014528)
        assert list(ranking["technique"]) == ["tdma", "slotted_aloha", "pure_aloha", "fdma", "csma_ca"]
        assert list(ranking["rank"]) == [1, 2, 3, 4, 5]

        assert list(payload.columns) == ["technique", "payload_bytes", "throughput_bps"]
        assert len(payload) == 5 * 4
        # the default frame carries 127 bytes, so that payload row repeats the totals block
        at_default = payload[payload["payload_bytes"] == 127].set_index("technique")["throughput_bps"]
        by_total = pd.read_csv(io.StringIO(out.strip().split("\n\n")[1])).set_index("technique")["throughput_bps"]
        for technique in by_total.index:
            assert at_default[technique] == pytest.approx(by_total[technique], rel=1e-5)
        for _, rows in payload.groupby("technique"):
            assert rows["throughput_bps"].is_monotonic_increasing

    def test_shipped_manifest(self, clean_env):
        assert run_cli("timing", os.path.join(CONFIG_DIR, "default.yaml"))[0] == EXIT_OK

    def test_negative_ifs(self, clean_env, config_file):
        path = config_file("version: 1\nframe_timing:\n  n_data_bits: 10\n  n_ack_bits: 100\n")
        code, out, err = run_cli("timing", path)
        assert code == EXIT_USAGE
        assert out == ""
        assert "negative inter-frame space T_ifs = T_data - T_ack" in err
        assert "[ERROR] Run failed:" in err

    def test_malformed_yaml(self, clean_env, config_file):
        path = config_file("version: 1\nframe_timing: [unclosed\n")
        code, _, err = run_cli("timing", path)
        assert code == EXIT_USAGE
        assert "line " in err and "column " in err

    def test_missing_version(self, clean_env, config_file):
        code, _, err = run_cli("timing", config_file("seed: 3\n"))
        assert code == EXIT_USAGE
        assert "version" in err

    def test_unknown_key(self, clean_env, config_file):
        code, _, _ = run_cli("timing", config_file("version: 1\nframe_timing:\n  warp: 9\n"))
        assert code == EXIT_USAGE

    def test_missing_file(self, clean_env, tmp_path):
        assert run_cli("timing", str(tmp_path / "nope.yaml"))[0] == EXIT_USAGE


class TestSimulate:
    def test_row(self, clean_env):
        code, out, _ = run_cli("simulate", "--technique", "tdma", "--g", "0.5", "--stop-packets", "2000")
        assert code == EXIT_OK
        frame = read_csv(out)
        assert list(frame.columns) == [
            "technique", "g", "attempted", "succeeded", "collided",
            "throughput_s", "mean_delay", "ci_lo", "ci_hi", "seed",
        ]
        row = frame.iloc[0]
        assert row["technique"] == "tdma"
        assert row["collided"] == 0
        assert row["seed"] == 42

    def test_byte_identical_reruns(self, clean_env):
        argv = ("simulate", "--technique", "slotted-aloha", "--g", "1", "--stop-packets", "3000", "--seed", "5")
        assert run_cli(*argv)[1] == run_cli(*argv)[1]

    def test_trace_file(self, clean_env, tmp_path):
        trace = tmp_path / "trace.tsv"
        code, _, _ = run_cli("simulate", "--stop-packets", "100", "--trace", str(trace))
        assert code == EXIT_OK
        assert trace.read_text().startswith("time\tkind\tstation\tdetail\n")

    def test_invalid_load(self, clean_env):
        assert run_cli("simulate", "--g", "-1")[0] == EXIT_USAGE


class TestSeedPrecedence:
    def _seed(self, *extra):
        _, _, err = run_cli("analytic", "pure-aloha", "t-vs-g", "0", "1", "0.5", *extra)
        return err

    def test_default(self, clean_env):
        assert "seed=42" in self._seed()

    def test_environment(self, clean_env):
        clean_env.setenv("MACBENCH_SEED", "7")
        assert "seed=7" in self._seed()

    def test_config_beats_environment(self, clean_env, config_file):
        clean_env.setenv("MACBENCH_SEED", "7")
        assert "seed=9" in self._seed("--config", config_file("version: 1\nseed: 9\n"))

    def test_flag_beats_everything(self, clean_env, config_file):
        clean_env.setenv("MACBENCH_SEED", "7")
        assert "seed=3" in self._seed("--config", config_file("version: 1\nseed: 9\n"), "--seed", "3")

    def test_bad_environment_seed(self, clean_env):
        clean_env.setenv("MACBENCH_SEED", "forty-two")
        code, _, _ = run_cli("timing")
        assert code == EXIT_USAGE


class TestCompare:
    def test_outputs(self, clean_env, config_file, tmp_path):
        prefix = str(tmp_path / "run")
        code, out, err = run_cli("compare", config_file(SMALL_COMPARE), prefix)
        assert code == EXIT_OK
        assert out == ""

        table = pd.read_csv(prefix + ".csv")
        assert len(table) == 4
        assert (table["seed"] == 11).all()
        assert (table.loc[table["technique"] == "tdma", "collided_sim_mean"] == 0).all()

        svg = open(prefix + "-t-vs-g.svg").read()
        for gid in ("analytic-pure_aloha", "analytic-tdma", "sim-pure_aloha", "sim-tdma-ci"):
            assert f'id="{gid}"' in svg
        assert os.path.exists(prefix + "-d-vs-g.svg")
        assert not os.path.exists(prefix + "-d-vs-t.svg")
        assert not os.path.exists(prefix + "-conclusion.csv")

        # the resolved manifest reproduces the run
        resolved = ConfigManager(prefix + "-config.yaml")
        assert resolved.seed == 11
        assert resolved.sweep_spec() == ConfigManager(config_file(SMALL_COMPARE)).sweep_spec()
        assert "[INFO] Run completed. Records processed: 4" in err

    def test_conclusion_report(self, clean_env, config_file, tmp_path):
        prefix = str(tmp_path / "run")
        code, _, err = run_cli("compare", config_file(CONCLUSION_COMPARE), prefix)
        assert code == EXIT_OK
        report = pd.read_csv(prefix + "-conclusion.csv")
        assert list(report.columns) == ["g", "metric", "rank", "technique", "value"]
        for metric in ("throughput", "delay"):
            ranked = report[report["metric"] == metric]
            assert sorted(ranked["technique"]) == ["csma_ca", "fdma", "pure_aloha", "slotted_aloha", "tdma"]
            assert list(ranked["rank"]) == [1, 2, 3, 4, 5]
        assert (report["g"] == 0.8).all()
        assert len(report[report["metric"] == "tdma_best"]) == 1
        assert "TDMA-best claim" in err

    def test_aborted_rows_mark_the_run(self, clean_env, config_file, tmp_path, monkeypatch):
        def broken(config):
            raise RuntimeError("worker crashed")

        monkeypatch.setattr(sweep_harness, "simulate", broken)
        prefix = str(tmp_path / "run")
        code, _, err = run_cli("compare", config_file(SMALL_COMPARE), prefix)
        assert code == EXIT_OK
        assert "RuntimeError: worker crashed" in err
        assert "[INFO] Run completed with errors." in err
        assert (pd.read_csv(prefix + ".csv")["n_replications"] == 0).all()

    def test_analytic_columns_agree_with_analytic_command(self, clean_env, config_file, tmp_path):
        prefix = str(tmp_path / "run")
        run_cli("compare", config_file(SMALL_COMPARE), prefix)
        table = pd.read_csv(prefix + ".csv")
        _, out, _ = run_cli("analytic", "pure-aloha", "t-vs-g", "0.2", "0.4", "0.2")
        expected = read_csv(out)["y"].tolist()
        got = table.loc[table["technique"] == "pure_aloha", "s_analytic"].tolist()
        assert got == pytest.approx(expected, rel=1e-5)

    def test_reruns_are_byte_identical(self, clean_env, config_file, tmp_path):
        path = config_file(SMALL_COMPARE)
        first, second = str(tmp_path / "a"), str(tmp_path / "b")
        run_cli("compare", path, first)
        run_cli("compare", path, second)
        for suffix in (".csv", "-t-vs-g.svg"):
            with open(first + suffix, "rb") as a, open(second + suffix, "rb") as b:
                assert a.read() == b.read()

    def test_unwritable_prefix(self, clean_env, config_file, tmp_path):
        code, _, err = run_cli("compare", config_file(SMALL_COMPARE), str(tmp_path / "missing" / "run"))
        assert code == EXIT_RUNTIME
        assert "Cannot write output" in err


class TestEntryPoint:
    def test_no_command(self):
        assert run_cli()[0] == EXIT_USAGE

    def test_help(self):
        assert main(["--help"], out=io.StringIO(), err=io.StringIO()) == EXIT_OK
