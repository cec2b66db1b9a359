import json
import os

import yaml

from marl_avoidance.cli import _resolve, build_parser, main, run_overrides

from .helpers import tiny_run


def write_config(tmp_path, **overrides):
    values = tiny_run(str(tmp_path / "run"), **overrides).to_resolved()
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(values))
    return str(path)


class TestParser:
    def test_perturb_gradient_default_and_const(self):
        parser = build_parser()
        assert parser.parse_args(["verify"]).perturb_gradient == 0.0
        assert parser.parse_args(["verify", "--perturb-gradient"]).perturb_gradient == 1e-2
        assert parser.parse_args(["verify", "--perturb-gradient", "0.5"]).perturb_gradient == 0.5

    def test_run_overrides_use_file_keys(self):
        args = build_parser().parse_args(["train", "--time-steps", "10", "--staged-watershed", "4"])
        overrides = run_overrides(args)

        assert overrides["time-steps"] == 10
        assert overrides["staged-watershed"] == 4
        assert overrides["seed"] is None

    def test_hyperparameter_flags_beat_preset(self, tmp_path):
        """Test that --batch-size overrides the spread-6a preset while the rest of the preset stands."""
        args = build_parser().parse_args(
            ["train", "--scenario", "spread-6a", "--batch-size", "64", "--out", str(tmp_path / "run")]
        )
        config = _resolve(args)

        assert config.batch_size == 64
        assert config.seq_length == 3

    def test_hyperparameter_flags_map_to_file_keys(self):
        flags = "--lr-actor 0.002 --lr-critic 0.02 --epsilon 0.2 --noise-rate 0.3 --gamma 0.9 --max-episode-len 25"
        args = build_parser().parse_args(["train"] + flags.split() + ["--seq-length", "4"])
        overrides = run_overrides(args)

        assert overrides["Lr-actor"] == 0.002
        assert overrides["Lr-critic"] == 0.02
        assert overrides["Epsilon"] == 0.2
        assert overrides["Noise-rate"] == 0.3
        assert overrides["Gamma"] == 0.9
        assert overrides["max-episode-len"] == 25
        assert overrides["seq-length"] == 4
        assert overrides["Batch-size"] is None


class TestCommands:
    def test_train_eval_plot(self, tmp_path, capsys):
        """Test the train -> eval -> plot path end to end."""
        config = write_config(tmp_path)
        assert main(["train", "--config", config, "--seed", "3"]) == 0
        artifacts = json.loads(capsys.readouterr().out)
        assert artifacts["updates_done"] == 45

        assert main(["eval", "--checkpoint", artifacts["checkpoint_path"], "--scenario", "spread-3a", "--episodes", "2"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert len(result["episode_returns"]) == 2

        out = str(tmp_path / "curves.svg")
        assert main(["plot", artifacts["metrics_path"], "--out", out]) == 0
        assert capsys.readouterr().out.strip() == out
        assert os.path.isfile(out)

    def test_train_writes_flag_overrides(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(["train", "--config", config, "--batch-size", "8", "--gamma", "0.9"]) == 0

        with open(tmp_path / "run" / "config.resolved") as f:
            resolved = yaml.safe_load(f)
        assert resolved["Batch-size"] == 8
        assert resolved["Gamma"] == 0.9

    def test_verify_exit_status(self, tmp_path, capsys):
        report = str(tmp_path / "report.json")
        assert main(["verify", "--suite", "td-target", "--report", report]) == 0
        with open(report) as f:
            assert json.load(f)[0]["suite"] == "td-target"

    def test_verify_negative_control(self, capsys):
        assert main(["verify", "--suite", "staged", "--perturb-gradient"]) == 1

    def test_configuration_error_exit(self, tmp_path, capsys):
        assert main(["train", "--config", str(tmp_path / "missing.yaml")]) == 2
        assert "does not exist" in capsys.readouterr().err

    def test_sweep(self, tmp_path, capsys):
        config = write_config(tmp_path, **{"time-steps": 40})
        assert main(["sweep", "--config", config, "--algos", "iddpg", "maddpg-l", "--seeds", "0", "--workers", "2"]) == 0
        results = json.loads(capsys.readouterr().out)

        assert [os.path.basename(os.path.dirname(r["out_dir"])) for r in results] == ["iddpg", "maddpg-l"]
        assert os.path.isfile(str(tmp_path / "run" / "curves.svg"))
