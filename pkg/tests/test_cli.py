import json
from pathlib import Path

import pytest

from mtoct import cli
from mtoct.cli import ConfigError, parse_config_text

BASE_CONFIG = """\
data = {data}
out_dir = {out}
runs = 2
max_iter_stp = 6
max_iter_mtoct = 3
n_h = 4
master_seed = 13
"""


# Frozen copy of the documented defaults; a drift here is a release bug.
FROZEN_DEFAULTS = {
    "regions": "VIC,NSW,SA,QLD,TAS",
    "task_set": "A",
    "methods": "STP,MTO-CT",
    "runs": 10,
    "max_iter_stp": 20000,
    "max_iter_mtoct": 10000,
    "n_f": 24,
    "n_h": 10,
    "lr": 0.001,
    "beta1": 0.9,
    "beta2": 0.999,
    "eps": 1e-8,
    "F": 0.2,
    "CR": 0.5,
    "n_s": 3,
    "alpha": 0.3,
    "q_init": 0.005,
    "eps_reward": 1e-12,
    "master_seed": 1,
    "norm_fit": "full",
    "exec_mode": "sequential",
    "workers": 1,
}


def test_defaults_match_frozen_table():
    assert cli.DEFAULTS == FROZEN_DEFAULTS


class TestConfigParsing:
    def minimal(self, **overrides):
        lines = ["data = d.csv", "out_dir = out"]
        lines += [f"{k} = {v}" for k, v in overrides.items()]
        return parse_config_text("\n".join(lines))

    def test_defaults_applied(self):
        config = self.minimal()
        assert config.runs == 10
        assert config.max_iter_stp == 20000
        assert config.max_iter_mtoct == 10000
        assert config.n_f == 24 and config.n_h == 10
        assert (config.F, config.CR, config.n_s) == (0.2, 0.5, 3)
        assert (config.alpha, config.q_init) == (0.3, 0.005)
        assert config.regions == ("VIC", "NSW", "SA", "QLD", "TAS")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="learning_rate"):
            self.minimal(learning_rate=0.01)

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("data = a\nout_dir = b\nruns = 2\nruns = 3")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="out_dir"):
            parse_config_text("data = a")

    def test_invalid_ns_names_field(self):
        with pytest.raises(ConfigError, match="n_s"):
            self.minimal(n_s=0)

    def test_ns_must_fit_available_sources(self):
        with pytest.raises(ConfigError, match="n_s"):
            self.minimal(n_s=5)  # Set A has 4 sources per target

    def test_bad_int(self):
        with pytest.raises(ConfigError, match="runs"):
            self.minimal(runs="ten")

    def test_bad_method(self):
        with pytest.raises(ConfigError, match="methods"):
            self.minimal(methods="STP,SGD")

    def test_window_capped_by_largest_horizon(self):
        with pytest.raises(ConfigError, match="n_f"):
            self.minimal(task_set="B", n_f=25)
        assert self.minimal(task_set="A", n_f=25).n_f == 25

    def test_comments_and_blanks_ignored(self):
        config = parse_config_text("# comment\n\ndata = a\nout_dir = b\n")
        assert config.data == "a"

    def test_flat_items_round_trip(self):
        config = self.minimal(lr=0.0005, runs=4, exec_mode="snapshot")
        echoed = "\n".join(f"{k} = {v}" for k, v in config.flat_items().items())
        assert parse_config_text(echoed) == config


class TestFixtureCommand:
    def test_generates_expected_rows(self, tmp_path):
        out = tmp_path / "f.csv"
        assert cli.main(["fixture", "--out", str(out), "--days", "3", "--seed", "2"]) == 0
        assert len(out.read_text().splitlines()) == 1 + 5 * 3 * 48

    def test_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["fixture", "--out", str(a), "--days", "3", "--seed", "7"])
        cli.main(["fixture", "--out", str(b), "--days", "3", "--seed", "7"])
        assert a.read_bytes() == b.read_bytes()

    def test_single_day_fails(self, tmp_path, capsys):
        rc = cli.main(["fixture", "--out", str(tmp_path / "x.csv"), "--days", "1"])
        assert rc == 1
        assert "days" in capsys.readouterr().err


@pytest.fixture(scope="module")
def run_workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_run")
    data = root / "demand.csv"
    cli.main(["fixture", "--out", str(data), "--days", "12", "--seed", "3"])
    cfg = root / "exp.cfg"
    cfg.write_text(BASE_CONFIG.format(data=data, out=root / "out"))
    rc = cli.main(["run", "--config", str(cfg)])
    return root, rc


class TestRunCommand:
    def test_exit_status_and_files(self, run_workspace):
        root, rc = run_workspace
        assert rc == 0
        for name in ("raw_results.csv", "summary.csv", "long_results.csv", "run_manifest.json"):
            assert (root / "out" / name).exists()

    def test_raw_row_count(self, run_workspace):
        root, _ = run_workspace
        lines = (root / "out" / "raw_results.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 5 * 2  # methods x tasks x runs

    def test_summary_has_five_comparison_rows(self, run_workspace):
        root, _ = run_workspace
        lines = (root / "out" / "summary.csv").read_text().splitlines()
        assert len(lines) == 1 + 5 + 1

    def test_manifest_config_reproduces_results(self, run_workspace, tmp_path):
        root, _ = run_workspace
        manifest = json.loads((root / "out" / "run_manifest.json").read_text())
        echoed = dict(manifest["config"])
        echoed["out_dir"] = str(tmp_path / "rerun")
        cfg = tmp_path / "echo.cfg"
        cfg.write_text("\n".join(f"{k} = {v}" for k, v in echoed.items()))
        assert cli.main(["run", "--config", str(cfg)]) == 0
        assert (tmp_path / "rerun" / "raw_results.csv").read_bytes() == (
            root / "out" / "raw_results.csv"
        ).read_bytes()

    def test_config_error_exits_nonzero(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("data = x.csv\nout_dir = o\nn_s = 0\n")
        assert cli.main(["run", "--config", str(cfg)]) == 1
        assert "n_s" in capsys.readouterr().err

    def test_missing_data_file_reported(self, tmp_path, capsys):
        cfg = tmp_path / "cfg"
        cfg.write_text(f"data = {tmp_path / 'absent.csv'}\nout_dir = {tmp_path / 'o'}\n")
        assert cli.main(["run", "--config", str(cfg)]) == 1
        assert "absent.csv" in capsys.readouterr().err


class TestReportCommand:
    def test_prints_table_and_tally(self, run_workspace, capsys):
        root, _ = run_workspace
        assert cli.main(["report", "--dir", str(root / "out")]) == 0
        out = capsys.readouterr().out
        assert out.count("\n") >= 7  # header + 5 tasks + tally
        assert "+/=/-" in out
        assert "Wilcoxon" in out

    def test_empty_dir_fails(self, tmp_path, capsys):
        assert cli.main(["report", "--dir", str(tmp_path)]) == 1
        assert "raw_results" in capsys.readouterr().err


def test_region_count_must_be_five():
    with pytest.raises(ConfigError, match="regions"):
        parse_config_text("data = a\nout_dir = b\nregions = VIC,NSW\n")
