import pytest

from raceduel.cli import main
from raceduel.config import ConfigError, load_sim_config, sim_config_from_tree
from raceduel.records import read_episode


@pytest.fixture()
def short_config(tmp_path):
    path = tmp_path / "short.yaml"
    path.write_text(
        "sim:\n"
        "  episode_limit: 8.0\n"
        "planning:\n"
        "  horizon: 5.0\n"
    )
    return path


class TestConfigFile:
    def test_defaults_without_file(self):
        config = load_sim_config(None)
        assert config.episode_limit == 60.0
        assert config.ego_v_max == 0.6

    def test_file_overrides_defaults(self, short_config):
        config = load_sim_config(short_config)
        assert config.episode_limit == 8.0
        assert config.sample_time == 0.2  # untouched default

    def test_unknown_section_rejected_with_location(self):
        with pytest.raises(ConfigError, match="unknown config section 'physics'"):
            sim_config_from_tree({"physics": {"gravity": 9.8}})

    def test_unknown_key_rejected_with_location(self):
        with pytest.raises(ConfigError, match="unknown config key sim.gravity"):
            sim_config_from_tree({"sim": {"gravity": 9.8}})

    def test_invalid_value_rejected(self):
        with pytest.raises(ConfigError, match="invalid configuration"):
            sim_config_from_tree({"sim": {"decision_cycle": 0.5}})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_sim_config(tmp_path / "nope.yaml")

    def test_tuple_coercion(self):
        config = sim_config_from_tree({"reward": {"weights": [2.0, 1.0, 2.0]}})
        assert config.reward_weights == (2.0, 1.0, 2.0)


class TestRunCommand:
    def test_run_writes_log_and_prints_outcome(self, tmp_path, short_config, capsys):
        code = main(
            [
                "run",
                "--config", str(short_config),
                "--opponent", "constant:1",
                "--seed", "7",
                "--out", str(tmp_path / "out"),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "blocking_success" in out
        logs = list((tmp_path / "out").glob("*.jsonl"))
        assert len(logs) == 1
        parsed = read_episode(logs[0])
        assert parsed.result["outcome"] == "blocking_success"
        # belief trace summary shows one line per decision cycle
        assert out.count("\n") >= len(parsed.decisions)

    def test_run_help(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--help"])
        assert exc.value.code == 0
        assert "--opponent" in capsys.readouterr().out

    def test_bad_config_path_names_path(self, capsys, tmp_path):
        missing = tmp_path / "missing.yaml"
        code = main(["run", "--config", str(missing), "--out", str(tmp_path)])
        assert code != 0
        assert str(missing) in capsys.readouterr().err

    def test_bad_opponent_spec(self, capsys, tmp_path, short_config):
        code = main(
            [
                "run",
                "--config", str(short_config),
                "--opponent", "clairvoyant",
                "--out", str(tmp_path),
            ]
        )
        assert code != 0


class TestBatchCommand:
    def test_small_batch_csv(self, tmp_path, short_config, capsys):
        out_dir = tmp_path / "batch"
        code = main(
            [
                "batch",
                "--config", str(short_config),
                "--runs", "2",
                "--seed", "0",
                "--workers", "1",
                "--out", str(out_dir),
            ]
        )
        assert code == 0
        csv_path = out_dir / "summary.csv"
        assert csv_path.exists()
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 11  # header + 2 controllers x 5 opponents
        episodes = list((out_dir / "episodes").glob("*.jsonl"))
        assert len(episodes) == 20

    def test_batch_repeatable_excluding_latency(self, tmp_path, short_config):
        outs = []
        for name in ("a", "b"):
            out_dir = tmp_path / name
            main(
                [
                    "batch",
                    "--config", str(short_config),
                    "--runs", "2",
                    "--seed", "5",
                    "--workers", "1",
                    "--controllers", "mixing",
                    "--opponents", "constant:0,random",
                    "--no-logs",
                    "--out", str(out_dir),
                ]
            )
            text = (out_dir / "summary.csv").read_text()
            stripped = "\n".join(
                ",".join(line.split(",")[:-1]) for line in text.splitlines()
            )
            outs.append(stripped)
        assert outs[0] == outs[1]


class TestReportCommand:
    def test_report_from_one_episode(self, tmp_path, short_config, capsys):
        out_dir = tmp_path / "out"
        main(
            [
                "run",
                "--config", str(short_config),
                "--opponent", "constant:1",
                "--seed", "3",
                "--out", str(out_dir),
            ]
        )
        code = main(
            ["report", "--logs", str(out_dir), "--out", str(tmp_path / "plots")]
        )
        assert code == 0
        plots = sorted((tmp_path / "plots").glob("*.png"))
        assert len(plots) == 3

    def test_report_empty_dir_fails(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main(["report", "--logs", str(empty)])
        assert code != 0
        assert "no episode logs" in capsys.readouterr().err

    def test_report_includes_rates_with_summary(self, tmp_path, short_config):
        out_dir = tmp_path / "batch"
        main(
            [
                "batch",
                "--config", str(short_config),
                "--runs", "1",
                "--workers", "1",
                "--controllers", "mixing",
                "--opponents", "constant:0",
                "--out", str(out_dir),
            ]
        )
        # report over the dir containing summary.csv but no episode logs
        code = main(["report", "--logs", str(out_dir), "--out", str(tmp_path / "p")])
        assert code == 0
        assert (tmp_path / "p" / "rates.png").exists()


class TestPrecedence:
    def test_env_provides_default_cli_wins(self, tmp_path, short_config, monkeypatch):
        from raceduel.cli import build_parser

        monkeypatch.setenv("RACEDUEL_SEED", "99")
        args = build_parser().parse_args(["run"])
        assert args.seed == 99
        args = build_parser().parse_args(["run", "--seed", "3"])
        assert args.seed == 3

    def test_flag_beats_config_file_beats_default(self, short_config):
        from raceduel.config import load_sim_config

        # built-in default
        assert load_sim_config(None).episode_limit == 60.0
        # config file beats default
        assert load_sim_config(short_config).episode_limit == 8.0
        # --set flag beats the config file
        merged = load_sim_config(short_config, ["sim.episode_limit=4.0"])
        assert merged.episode_limit == 4.0

    def test_set_override_validation(self, short_config):
        from raceduel.config import ConfigError, load_sim_config

        with pytest.raises(ConfigError, match="section.key=value"):
            load_sim_config(short_config, ["episode_limit-4"])
        with pytest.raises(ConfigError, match="unknown config key"):
            load_sim_config(short_config, ["sim.quantum=1"])

    def test_set_flag_through_cli(self, tmp_path, short_config, capsys):
        code = main(
            [
                "run",
                "--config", str(short_config),
                "--set", "sim.episode_limit=4.0",
                "--opponent", "constant:0",
                "--seed", "1",
                "--out", str(tmp_path),
            ]
        )
        assert code == 0
        logs = list(tmp_path.glob("*.jsonl"))
        parsed = read_episode(logs[0])
        assert parsed.meta["config"]["episode_limit"] == 4.0
