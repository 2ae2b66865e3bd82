import json
import shutil

import numpy as np
import pytest

from app.core.exceptions import MissingArtifactError, StaleArtifactError, UsageError
from app.imaging import warp_region
from app.pipeline import FULL_CHAIN, RunLayout, build_config, run_stage
from app.pipeline.stages.base import StageContext
from app.synthdata.repository import read_manifest

EXTRA_STAGES = ("visualize", "split", "tune-nms")


def _cfg(raw, run_dir, *overrides):
    return build_config(raw, [f'run_dir="{run_dir}"', *overrides])


@pytest.fixture(scope="module")
def chain(tmp_path_factory, tiny_raw):
    run_dir = tmp_path_factory.mktemp("run")
    cfg = _cfg(tiny_raw, run_dir)
    reports = {name: run_stage(cfg, name, jobs=2) for name in (*FULL_CHAIN, *EXTRA_STAGES)}
    return cfg, reports


def _layout(cfg) -> RunLayout:
    return RunLayout(run_dir=cfg.run_dir, dataset_root=cfg.dataset_root)


def test_detect_before_training_names_train_svm(tmp_path, tiny_raw):
    with pytest.raises(MissingArtifactError) as exc_info:
        run_stage(_cfg(tiny_raw, tmp_path), "detect")
    assert exc_info.value.stage == "train-svm"
    assert exc_info.value.exit_code == 3


def test_propose_before_dataset_names_gen_data(tmp_path, tiny_raw):
    with pytest.raises(MissingArtifactError) as exc_info:
        run_stage(_cfg(tiny_raw, tmp_path), "propose")
    assert exc_info.value.stage == "gen-data"


def test_unknown_stage_is_usage_error(tmp_path, tiny_raw):
    with pytest.raises(UsageError):
        run_stage(_cfg(tiny_raw, tmp_path), "fine-tune")


def test_full_chain_writes_every_artifact(chain):
    cfg, _ = chain
    layout = _layout(cfg)
    expected = [
        layout.dataset_manifest,
        layout.proposals,
        layout.svm_model,
        layout.bbox_model,
        layout.raw_detections,
        layout.refined_detections,
        layout.reports / "eval.txt",
        layout.reports / "eval.json",
        layout.reports / "pr_curves.txt",
        layout.reports / "analysis.txt",
        layout.reports / "train_svm.txt",
        layout.reports / "split.json",
        layout.nms_tuning,
        layout.montages / "unit_1_1_0.ppm",
        layout.montages / "unit_1_1_0.txt",
    ]
    missing = [str(p) for p in expected if not p.is_file()]
    assert missing == []


def test_evaluation_reports_raw_and_refined(chain):
    cfg, reports = chain
    summary = reports["evaluate"].summary
    assert set(summary) == {"raw", "refined"}
    for value in summary.values():
        assert value is None or 0.0 <= value <= 1.0
    record = json.loads((_layout(cfg).reports / "eval.json").read_text())
    assert record["raw"]["mean_ap"] == summary["raw"]
    assert "false_positives" in record


def test_extract_rerun_is_cache_hit_with_identical_bytes(chain):
    cfg, reports = chain
    assert not reports["extract"].cache_hit
    directory = _layout(cfg).features_dir(reports["extract"].fingerprint)
    before = {p.name: p.read_bytes() for p in sorted(directory.glob("*.npy"))}

    again = run_stage(cfg, "extract", jobs=1)

    assert again.cache_hit
    assert again.fingerprint == reports["extract"].fingerprint
    assert {p.name: p.read_bytes() for p in sorted(directory.glob("*.npy"))} == before
    assert len(before) == cfg.dataset.num_images


def test_gen_data_rerun_reuses_dataset(chain):
    cfg, _ = chain
    assert run_stage(cfg, "gen-data").cache_hit


def test_detect_rerun_is_byte_identical_for_any_job_count(chain):
    cfg, _ = chain
    layout = _layout(cfg)
    raw, refined = layout.raw_detections.read_bytes(), layout.refined_detections.read_bytes()
    run_stage(cfg, "detect", jobs=1)
    assert layout.raw_detections.read_bytes() == raw
    assert layout.refined_detections.read_bytes() == refined


def test_changed_svm_config_makes_model_stale(chain, tiny_raw):
    cfg, _ = chain
    changed = _cfg(tiny_raw, cfg.run_dir, "svm.C=0.5")
    with pytest.raises(StaleArtifactError) as exc_info:
        run_stage(changed, "detect")
    assert exc_info.value.stage == "train-svm"


def test_split_partitions_the_test_images(chain):
    cfg, _ = chain
    record = json.loads((_layout(cfg).reports / "split.json").read_text())
    test_ids = read_manifest(cfg.dataset_root).ids("test")
    assert sorted(record["side_a"] + record["side_b"]) == test_ids
    assert len(record["side_a"]) - len(record["side_b"]) in (0, 1)


def test_visualize_honours_unit_and_k_options(chain):
    cfg, _ = chain
    report = run_stage(cfg, "visualize", units=["0,0,1"], k=2)
    assert report.summary["units"] == ["0_0_1"]
    lines = (_layout(cfg).montages / "unit_0_0_1.txt").read_text().splitlines()
    assert len([line for line in lines if not line.startswith("#")]) <= 2


def test_tuned_thresholds_feed_detection(chain, tiny_raw, tmp_path):
    cfg, _ = chain
    copy = tmp_path / "copy"
    shutil.copytree(cfg.run_dir, copy)
    tuned = _cfg(tiny_raw, copy, "detection.use_tuned_nms=true")

    report = run_stage(tuned, "detect")
    assert report.fingerprint != run_stage(_cfg(tiny_raw, copy), "detect").fingerprint

    (copy / "reports" / "nms_tuning.json").unlink()
    with pytest.raises(MissingArtifactError) as exc_info:
        run_stage(tuned, "detect")
    assert exc_info.value.stage == "tune-nms"


def test_single_variant_ablation_matches_plain_evaluation(chain):
    cfg, reports = chain
    report = run_stage(cfg, "ablate", variants=["hog"])
    row = report.summary["hog"]
    assert row["raw"] == reports["evaluate"].summary["raw"]
    assert row["refined"] == reports["evaluate"].summary["refined"]
    assert (_layout(cfg).reports / "ablation.txt").read_text().splitlines()[1].startswith("hog ")


def test_bad_ablation_variant_is_usage_error(chain):
    cfg, _ = chain
    with pytest.raises(UsageError):
        run_stage(cfg, "ablate", variants=["sift"])


def test_feature_mean_is_over_warped_training_patches(chain):
    cfg, _ = chain
    ctx = StageContext(cfg=cfg, jobs=1)
    fill = ctx.pixel_mean
    total, count = np.zeros(len(fill)), 0
    for image_id in ctx.image_ids("train"):
        image = ctx.load_image(image_id)
        for box in [*ctx.proposals[image_id].boxes, *ctx.annotations[image_id].boxes()]:
            if box.width > 0 and box.height > 0:
                total += warp_region(image, box, cfg.warp, fill).pixels.mean(axis=(0, 1))
                count += 1

    np.testing.assert_allclose(ctx.patch_mean, total / count, rtol=1e-12)
    np.testing.assert_allclose(ctx.feature_cache.mean(), ctx.patch_mean, rtol=1e-12)
    assert not np.allclose(ctx.patch_mean, fill)
