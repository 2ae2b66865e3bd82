"""Feature extraction into the cache, and top-activation montages"""

from app.features import ConvStack, UnitRef, create_extractor, receptive_field
from app.features.repository import save_montage
from app.features.schema import RegionPatch
from app.features.service import featurize_boxes
from app.features.visualization import render_montage, top_activations
from app.imaging import warp_region
from app.pipeline.cache import FeatureBlock
from app.pipeline.schema import StageReport
from app.pipeline.stages.base import StageContext, stage
from app.utils.logger import get_logger

logger = get_logger(__name__)


@stage("extract")
def extract(ctx: StageContext) -> StageReport:
    """
    Warp and describe every proposal of every image once; training images
    also get rows for their ground-truth boxes (the SVM positives).
    """
    cfg = ctx.cfg
    fp = ctx.fingerprints["extract"]
    cache = ctx.feature_cache
    manifest = ctx.manifest
    proposals = ctx.proposals
    image_ids = manifest.ids()
    if cache.is_complete(image_ids):
        return StageReport("extract", fp, cache_hit=True, outputs=[cache.manifest_path])

    annotations = ctx.annotations
    mean = ctx.patch_mean
    extractor = create_extractor(
        cfg.extractor, cfg.warp.out_size, manifest.channels, mean=mean, seed=cfg.seeds.conv
    )
    train_ids = set(manifest.ids("train"))

    def run(image_id: int) -> tuple[int, int]:
        image = ctx.load_image(image_id)
        boxes = list(proposals[image_id].boxes)
        n_proposals = len(boxes)
        if image_id in train_ids:
            boxes.extend(annotations[image_id].boxes())
        features = featurize_boxes(image, boxes, extractor, cfg.warp, mean)
        cache.store(FeatureBlock(image_id, features, n_proposals))
        return image_id, n_proposals

    blocks = dict(ctx.parallel_map(run, image_ids))
    path = cache.finalize(blocks, extractor.dim, extractor.layer_tag, mean)
    logger.info(
        "features_extracted",
        images=len(blocks),
        rows=sum(blocks.values()),
        dim=extractor.dim,
        layer=extractor.layer_tag,
    )
    return StageReport(
        "extract",
        fp,
        outputs=[path],
        summary={"images": len(blocks), "dim": extractor.dim, "layer": extractor.layer_tag},
    )


@stage("visualize")
def visualize(ctx: StageContext) -> StageReport:
    """Rank warped proposals by single conv units and write one montage per unit."""
    cfg = ctx.cfg
    vis = cfg.visualize
    fp = ctx.fingerprints["visualize"]
    units = [UnitRef.parse(text) for text in (ctx.units or vis.units)]
    k = vis.k if ctx.k is None else ctx.k
    manifest = ctx.manifest
    proposals = ctx.proposals
    mean = ctx.patch_mean
    stack = ConvStack(cfg.extractor.conv, manifest.channels, seed=cfg.seeds.conv)

    def warp_all(image_id: int) -> list[RegionPatch]:
        image = ctx.load_image(image_id)
        return [
            RegionPatch(image_id, box, warp_region(image, box, cfg.warp, mean))
            for box in proposals[image_id].boxes
            if box.width > 0 and box.height > 0
        ]

    regions = [r for batch in ctx.parallel_map(warp_all, manifest.ids(vis.split)) for r in batch]
    outputs = []
    for unit in units:
        field = receptive_field(cfg.extractor.conv, unit, cfg.warp.out_size, manifest.channels)
        hits = top_activations(stack, unit, regions, k, vis.nms_thresh, mean=mean)
        montage = render_montage(hits, regions, field, columns=vis.columns, scale=vis.scale)
        outputs.extend(save_montage(ctx.layout.montages, unit, montage, hits))
        logger.info("montage_written", unit=unit.slug(), hits=len(hits), regions=len(regions))
    return StageReport(
        "visualize",
        fp,
        outputs=outputs,
        summary={"units": [u.slug() for u in units], "k": k, "regions": len(regions)},
    )
