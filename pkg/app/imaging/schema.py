"""Image and warp configuration schemas"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import ExtractionError

WarpMode = Literal["warp", "tightest_square_with_context", "tightest_square_without_context"]


@dataclass(frozen=True)
class Image:
    """
    Immutable image with intensities in [0, 1].

    ``pixels`` is a read-only (height, width, channels) float64 array with
    one or three channels.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim == 2:
            pixels = pixels[:, :, None]
        if pixels.ndim != 3 or pixels.shape[2] not in (1, 3):
            raise ExtractionError(f"Image needs shape (H, W, 1|3), got {pixels.shape}")
        if pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise ExtractionError("Image has no pixels")
        if not np.all(np.isfinite(pixels)) or pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ExtractionError("Image intensities must be finite and within [0, 1]")
        pixels = pixels.copy()
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def channels(self) -> int:
        return int(self.pixels.shape[2])


class WarpConfig(BaseModel):
    """How a proposal is turned into a fixed-size square patch"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    out_size: int = Field(227, ge=1, description="Side of the square output patch (pixels)")
    padding: int = Field(16, ge=0, description="Context pixels around the proposal, output scale")
    mode: WarpMode = Field("warp", description="Proposal transformation variant")

    @model_validator(mode="after")
    def check_padding(self) -> "WarpConfig":
        if self.out_size <= 2 * self.padding:
            raise ValueError("out_size must exceed twice the padding")
        return self

    @property
    def inner_size(self) -> int:
        return self.out_size - 2 * self.padding
