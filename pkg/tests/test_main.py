import json
from pathlib import Path

import pytest

from app.main import build_parser, run

DEMO_CONFIG = Path(__file__).resolve().parent.parent / "build" / "demo" / "demo.toml"
SEED_NAMES = ("data", "jitter", "split", "minibatch", "conv", "mining")
# HOG mAP at IoU 0.5 on the demo dataset, every seed
DEMO_MAP_FLOOR = 0.50


def _error_line(err: str) -> str:
    lines = [line for line in err.splitlines() if line.startswith("error=")]
    assert len(lines) == 1, err
    return lines[0]


def test_help_goes_to_stderr(capsys):
    assert run(["--help"]) == 0
    captured = capsys.readouterr()
    assert "gen-data" in captured.err
    assert captured.out == ""


def test_version_goes_to_stderr(capsys):
    assert run(["--version"]) == 0
    captured = capsys.readouterr()
    assert captured.err.startswith("rdet ")
    assert captured.out == ""


def test_every_stage_has_a_subcommand():
    parser = build_parser()
    for name in (
        "gen-data",
        "propose",
        "extract",
        "train-svm",
        "train-bbreg",
        "detect",
        "evaluate",
        "analyze",
        "visualize",
        "ablate",
        "split",
        "tune-nms",
    ):
        assert parser.parse_args([name]).command == name


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(["fine-tune"]) == 2
    assert "exit=2" in _error_line(capsys.readouterr().err)


def test_missing_subcommand_is_usage_error(capsys):
    assert run([]) == 2


def test_detect_without_model_names_train_svm(tmp_path, capsys):
    assert run(["detect", "--output-dir", str(tmp_path)]) == 3
    line = _error_line(capsys.readouterr().err)
    assert "error=missing_artifact" in line
    assert "stage=train-svm" in line


def test_missing_config_file_exits_4(tmp_path, capsys):
    assert run(["gen-data", "--config", str(tmp_path / "nope.toml")]) == 4
    assert "exit=4" in _error_line(capsys.readouterr().err)


def test_unknown_override_key_exits_4(tmp_path, capsys):
    code = run(["gen-data", "--output-dir", str(tmp_path), "--set", "svm.bogus=1"])
    assert code == 4
    assert "svm.bogus" in _error_line(capsys.readouterr().err)


def test_bad_jobs_value_is_usage_error(tmp_path, capsys):
    assert run(["gen-data", "--output-dir", str(tmp_path), "--jobs", "0"]) == 2


def test_data_reaches_stdout_only_with_flag(tiny_toml, tmp_path, capsys):
    args = ["gen-data", "--config", str(tiny_toml), "--output-dir", str(tmp_path / "run")]
    assert run(args) == 0
    assert capsys.readouterr().out == ""

    assert run([*args, "--stdout"]) == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["class_names"] == ["disc", "square"]


def test_identical_invocations_give_identical_outputs(tiny_toml, tmp_path):
    outputs = []
    for name in ("a", "b"):
        run_dir = tmp_path / name
        base = ["--config", str(tiny_toml), "--output-dir", str(run_dir), "--jobs", "2"]
        for stage in ("gen-data", "propose"):
            assert run([stage, *base]) == 0
        outputs.append((run_dir / "proposals.txt").read_bytes())
    assert outputs[0] == outputs[1]


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_demo_chain_end_to_end(tmp_path, seed):
    run_dir = tmp_path / f"demo-{seed}"
    base = ["--config", str(DEMO_CONFIG), "--output-dir", str(run_dir)]
    for offset, name in enumerate(SEED_NAMES):
        base += ["--set", f"seeds.{name}={seed * len(SEED_NAMES) + offset}"]
    assert run(["all", *base]) == 0
    for stage in ("visualize", "split", "tune-nms"):
        assert run([stage, *base]) == 0

    record = json.loads((run_dir / "reports" / "eval.json").read_text())
    assert record["raw"]["mean_ap"] >= DEMO_MAP_FLOOR
    assert record["refined"]["mean_ap"] >= record["raw"]["mean_ap"]


def test_metrics_textfile_written_after_failed_run(tmp_path, mocker):
    from app.core.settings import settings

    textfile = tmp_path / "rdet.prom"
    mocker.patch.object(settings, "METRICS_ENABLED", True)
    mocker.patch.object(settings, "METRICS_TEXTFILE", str(textfile))

    assert run(["detect", "--output-dir", str(tmp_path / "run")]) == 3
    text = textfile.read_text()
    assert 'rdet_stage_runs_total{stage="detect",status="failed"}' in text


def test_metrics_not_exported_when_disabled(tmp_path, mocker):
    from app.core.settings import settings

    export = mocker.patch("app.main.export_metrics")
    mocker.patch.object(settings, "METRICS_ENABLED", False)
    run(["detect", "--output-dir", str(tmp_path)])
    export.assert_not_called()
