"""Dataset generation, proposals and the balanced split"""

import json

from app.core.service.atomic import atomic_write_text
from app.pipeline.repository import is_current, write_meta
from app.pipeline.schema import StageReport
from app.pipeline.stages.base import StageContext, stage
from app.proposals import build_proposer, recall_curve, write_proposals
from app.synthdata import (
    Annotation,
    DatasetManifest,
    ImageEntry,
    balanced_split,
    generate_scene,
)
from app.synthdata.repository import (
    read_manifest,
    write_annotations,
    write_image,
    write_manifest,
)
from app.utils.formatting import fmt_float
from app.utils.logger import get_logger

logger = get_logger(__name__)


@stage("gen-data")
def gen_data(ctx: StageContext) -> StageReport:
    cfg = ctx.cfg
    fp = ctx.fingerprints["gen-data"]
    root = ctx.layout.dataset_root
    manifest_path = ctx.layout.dataset_manifest
    if is_current(manifest_path, fp) and read_manifest(root).fingerprint == fp:
        logger.info("dataset_reused", root=str(root))
        return StageReport("gen-data", fp, cache_hit=True, outputs=[manifest_path])

    def render(image_id: int) -> tuple[str, Annotation]:
        image, annotation = generate_scene(cfg.dataset, image_id, cfg.seeds.data)
        return write_image(root, image_id, image), annotation

    rendered = ctx.parallel_map(render, range(cfg.dataset.num_images))
    annotations = [annotation for _, annotation in rendered]
    write_annotations(root, annotations)
    manifest = DatasetManifest(
        class_names=list(cfg.dataset.classes),
        similarity_groups=[list(g) for g in cfg.dataset.similarity_groups],
        image_size=cfg.dataset.image_size,
        channels=cfg.dataset.channels,
        images=[
            ImageEntry(image_id=i, split=cfg.dataset.split_of(i), file=relative)
            for i, (relative, _) in enumerate(rendered)
        ],
        fingerprint=fp,
    )
    write_manifest(root, manifest)
    write_meta(manifest_path, "gen-data", fp)
    per_class = {
        name: sum(a.count(c) for a in annotations) for c, name in enumerate(cfg.dataset.classes)
    }
    logger.info("dataset_generated", images=len(annotations), objects=per_class)
    return StageReport(
        "gen-data",
        fp,
        outputs=[manifest_path, root / "annotations.txt"],
        summary={"images": len(annotations), "objects": per_class},
    )


@stage("propose")
def propose(ctx: StageContext) -> StageReport:
    cfg = ctx.cfg
    fp = ctx.fingerprints["propose"]
    manifest = ctx.manifest
    annotations = ctx.annotations
    proposer = build_proposer(cfg.proposer, cfg.seeds.jitter)
    size = manifest.image_size

    def run(image_id: int):
        return proposer.propose(image_id, size, size, annotations[image_id].boxes())

    proposal_sets = ctx.parallel_map(run, manifest.ids())
    path = write_proposals(ctx.layout.proposals, proposal_sets)
    write_meta(path, "propose", fp)

    gt_by_image = {i: a.boxes() for i, a in annotations.items()}
    lines = ["# split iou_thresh recall"]
    recall_at_half: dict[str, float] = {}
    for split in ("train", "test"):
        ids = set(manifest.ids(split))
        curve = recall_curve([p for p in proposal_sets if p.image_id in ids], gt_by_image)
        for thresh, recall in curve:
            lines.append(f"{split} {fmt_float(thresh)} {fmt_float(recall)}")
            if thresh == 0.5:
                recall_at_half[split] = recall
    report_path = ctx.layout.reports / "proposals.txt"
    atomic_write_text(report_path, "\n".join(lines) + "\n")
    total = sum(len(p) for p in proposal_sets)
    logger.info("proposals_written", proposals=total, recall_at_half=recall_at_half)
    return StageReport(
        "propose",
        fp,
        outputs=[path, report_path],
        summary={"proposals": total, "recall_at_0.5": recall_at_half},
    )


@stage("split")
def split(ctx: StageContext) -> StageReport:
    cfg = ctx.cfg
    fp = ctx.fingerprints["split"]
    annotations = ctx.annotations
    class_ids = ctx.class_ids
    counts = {
        image_id: [annotations[image_id].count(c) for c in class_ids]
        for image_id in ctx.image_ids(cfg.split.source)
    }
    result = balanced_split(counts, cfg.split, cfg.seeds.split)
    names = ctx.manifest.class_names
    lines = [
        f"# balanced split of {len(counts)} {cfg.split.source} images",
        f"max_relative_imbalance {fmt_float(result.max_relative_imbalance)}",
        f"median_relative_imbalance {fmt_float(result.median_relative_imbalance)}",
        f"mean_relative_imbalance {fmt_float(result.mean_relative_imbalance)}",
        "# class name side_a side_b",
    ]
    for class_id, (a, b) in enumerate(result.per_class):
        lines.append(f"{class_id} {names[class_id]} {a} {b}")
    lines.append("side_a " + " ".join(str(i) for i in result.side_a))
    lines.append("side_b " + " ".join(str(i) for i in result.side_b))
    text_path = ctx.layout.reports / "split.txt"
    record_path = ctx.layout.reports / "split.json"
    atomic_write_text(text_path, "\n".join(lines) + "\n")
    record = {
        "side_a": list(result.side_a),
        "side_b": list(result.side_b),
        "max_relative_imbalance": result.max_relative_imbalance,
        "median_relative_imbalance": result.median_relative_imbalance,
        "mean_relative_imbalance": result.mean_relative_imbalance,
        "per_class": [list(pair) for pair in result.per_class],
    }
    atomic_write_text(record_path, json.dumps(record, indent=2, sort_keys=True) + "\n")
    write_meta(record_path, "split", fp)
    return StageReport(
        "split",
        fp,
        outputs=[text_path, record_path],
        summary={
            "images": len(counts),
            "max_relative_imbalance": result.max_relative_imbalance,
        },
    )
