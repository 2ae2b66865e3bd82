"""Proposer strategy interface"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import Callable

from app.core.base.registry import Registry
from app.geometry import BoxCorners
from app.proposals.schema import ProposalSet, ProposerConfig

proposer_registry: Registry[type["ProposalStrategy"]] = Registry("proposer")


class ProposalStrategy(ABC):
    """Generates candidate boxes for one image."""

    kind: str = ""

    @classmethod
    @abstractmethod
    def from_config(cls, cfg: ProposerConfig, seed: int) -> ProposalStrategy:
        raise NotImplementedError()

    @abstractmethod
    def propose(
        self,
        image_id: int,
        width: int,
        height: int,
        gt_boxes: Sequence[BoxCorners] = (),
    ) -> ProposalSet:
        """Boxes clipped to the image, positive area, no duplicates."""
        raise NotImplementedError()


def proposer(kind: str) -> Callable[[type[ProposalStrategy]], type[ProposalStrategy]]:
    def decorator(cls: type[ProposalStrategy]) -> type[ProposalStrategy]:
        cls.kind = kind
        return proposer_registry.register(kind)(cls)

    return decorator


def dedup_boxes(boxes: Sequence[BoxCorners]) -> list[BoxCorners]:
    """Drop zero-area boxes and boxes equal to an earlier one after rounding to 1e-6."""
    seen: set[tuple[float, ...]] = set()
    unique: list[BoxCorners] = []
    for box in boxes:
        if box.area <= 0:
            continue
        key = tuple(round(v, 6) for v in box.as_tuple())
        if key in seen:
            continue
        seen.add(key)
        unique.append(box)
    return unique
