"""Tests for the command-line front end."""

from pathlib import Path

import pytest

from scripts import run
from scripts.run import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, CliConfig, dispatch, main, parse_args
from src.data.treebank import read_treebank
from src.errors import ConfigError, PipelineError, TrainingError

FIXTURES = Path(__file__).parent / "fixtures"


class TestParseArgs:
    def test_pipeline(self):
        cli = parse_args(["pipeline", "--config", "run.json", "--seed", "7"])
        assert cli.command == "pipeline"
        assert cli.config_path == "run.json"
        assert cli.seed == 7
        assert cli.out is None
        assert cli.verbosity == 0

    def test_synth(self):
        cli = parse_args(["synth", "--out", "data/", "--n", "2000", "--contrast-rate", "0.5", "--seed", "1"])
        assert cli.out == "data/"
        assert cli.n_sentences == 2000
        assert cli.contrast_rate == 0.5
        assert cli.seed == 1

    def test_overrides(self):
        cli = parse_args(["sweep", "--config", "c.json", "--seeds", "1,2,3", "--cost-bow", "0.2",
                          "--grid-size", "11", "--threads", "2", "-vv"])
        assert cli.seeds == [1, 2, 3]
        assert cli.cost_bow == 0.2
        assert cli.grid_size == 11
        assert cli.threads == 2
        assert cli.verbosity == 2

    def test_quiet(self):
        assert parse_args(["gradcheck", "-q"]).verbosity == -1

    def test_gradcheck_default_seeds(self):
        assert parse_args(["gradcheck"]).seeds == list(range(20))

    def test_sweep_check_flag(self):
        assert parse_args(["sweep", "--config", "c.json", "--seeds", "1,2", "--check"]).check
        assert not parse_args(["sweep", "--config", "c.json", "--seeds", "1,2"]).check

    @pytest.mark.parametrize("argv", [["pipeline"], ["pipeline", "--config", "c.json", "--bogus"],
                                      ["gradcheck", "--seeds", "a,b"], ["train"], []])
    def test_usage_errors_exit_2(self, argv):
        with pytest.raises(SystemExit) as info:
            parse_args(argv)
        assert info.value.code == 2

    def test_help_exits_0(self, capsys):
        with pytest.raises(SystemExit) as info:
            parse_args(["--help"])
        assert info.value.code == 0
        assert "pipeline" in capsys.readouterr().out


class TestDispatch:
    def test_config_error_is_usage(self, mocker, capsys):
        mocker.patch.dict(run.HANDLERS, {"pipeline": mocker.Mock(side_effect=ConfigError("grid_size must be >= 2"))})
        assert dispatch(CliConfig(command="pipeline")) == EXIT_USAGE
        assert "grid_size" in capsys.readouterr().err

    def test_stage_failure_names_stage(self, mocker, capsys):
        error = PipelineError("decision_train", TrainingError("loss is not finite", 3))
        mocker.patch.dict(run.HANDLERS, {"pipeline": mocker.Mock(side_effect=error)})
        assert dispatch(CliConfig(command="pipeline")) == EXIT_FAILURE
        err = capsys.readouterr().err
        assert "stage decision_train" in err
        assert "epoch 3" in err

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["pipeline", "--config", str(tmp_path / "missing.json")])
        assert code == EXIT_USAGE
        assert "ERROR" in capsys.readouterr().err

    def test_success_passes_through(self, mocker):
        handler = mocker.Mock(return_value=EXIT_OK)
        mocker.patch.dict(run.HANDLERS, {"gradcheck": handler})
        assert main(["gradcheck", "--seeds", "4"]) == EXIT_OK
        assert handler.call_args.args[0].seeds == [4]


class TestCommands:
    def test_synth_writes_treebank(self, tmp_path, capsys):
        out = tmp_path / "data"
        code = main(["synth", "--out", str(out), "--n", "50", "--vocab-size", "16", "--max-len", "6"])
        assert code == EXIT_OK
        sizes = [len(read_treebank(out / f"{name}.txt")) for name in ("train", "dev", "test")]
        assert sum(sizes) == 50
        assert "Synthetic treebank written" in capsys.readouterr().out

    def test_gradcheck(self, capsys):
        assert main(["gradcheck", "--seeds", "0"]) == EXIT_OK
        assert "max rel. err" in capsys.readouterr().out

    def test_pipeline_flags_override_config(self, mocker, tmp_path, capsys):
        fake = mocker.patch("src.pipeline.run_pipeline")
        fake.return_value.report = {"results": [{"split": "valid", "strategy": "naive_ratio", "auc": 85.0}]}
        code = main(["pipeline", "--config", str(FIXTURES / "run_config.json"), "--seed", "9",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        config = fake.call_args.args[0]
        assert config.seed == 9
        assert config.out_dir == str(tmp_path)
        assert config.grid_size == 21
        out = capsys.readouterr().out
        assert "AUC 85.00" in out
        assert "Report written to" in out

    @pytest.mark.parametrize("passed, expected", [(True, EXIT_OK), (False, EXIT_FAILURE)])
    def test_sweep_check_exit_code(self, mocker, tmp_path, capsys, passed, expected):
        fake = mocker.patch("src.pipeline.run_multiseed")
        fake.return_value = {
            "auc": {"valid": {"prob_threshold": {"mean": 85.0, "std": 1.0}}},
            "checks": [{"name": "guided_beats_naive", "passed_seeds": [1, 2], "n_seeds": 2,
                        "required": 2, "passed": passed}],
        }
        code = main(["sweep", "--config", str(FIXTURES / "run_config.json"), "--seeds", "1,2",
                     "--out", str(tmp_path), "--check"])
        assert code == expected
        assert fake.call_args.kwargs["check"] is True
        assert "guided_beats_naive" in capsys.readouterr().out
