"""Fixed random convolution stack and its receptive-field geometry"""

import hashlib
from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.core.exceptions import ExtractionError
from app.features.extractors.base import FeatureExtractor, extractor
from app.features.schema import (
    ConvStackConfig,
    ExtractorConfig,
    FeatureVector,
    LayerGeometry,
    LayerSpec,
    UnitRef,
)
from app.geometry import BoxCorners
from app.imaging import Image, subtract_mean
from app.utils.rng import make_rng


def _output_size(size: int, layer: LayerSpec) -> int:
    span = size + 2 * layer.padding - layer.kernel
    if span < 0:
        return 0
    return span // layer.stride + 1


def _layer_name(layers: Sequence[LayerSpec], index: int) -> str:
    kind = layers[index].type
    ordinal = sum(1 for layer in layers[: index + 1] if layer.type == kind)
    return f"{kind}{ordinal}"


def receptive_field_table(cfg: ConvStackConfig, input_size: int) -> list[LayerGeometry]:
    """
    Per-layer geometry via ``rf' = rf + (k - 1) * jump``, ``jump' = jump * stride``,
    ``start' = start - padding * jump``.

    ``start`` is the left edge (input pixels) of unit 0's field before
    clipping; unit ``u`` covers ``[start + u * jump, start + u * jump + rf)``.

    Raises:
        ExtractionError: a layer's output would be empty
    """
    size, jump, rf, start = input_size, 1, 1, 0
    table = [LayerGeometry("input", size, jump, rf, start)]
    layers = cfg.active_layers
    for index, layer in enumerate(layers):
        out = _output_size(size, layer)
        if out < 1:
            raise ExtractionError(
                f"Layer {_layer_name(layers, index)} underflows: "
                f"input {size}, kernel {layer.kernel}"
            )
        rf = rf + (layer.kernel - 1) * jump
        start = start - layer.padding * jump
        jump = jump * layer.stride
        size = out
        table.append(LayerGeometry(_layer_name(layers, index), size, jump, rf, start))
    return table


def output_channels(cfg: ConvStackConfig, in_channels: int) -> int:
    channels = in_channels
    for layer in cfg.active_layers:
        if layer.type == "conv":
            channels = layer.channels or channels
    return channels


def receptive_field(
    cfg: ConvStackConfig, unit: UnitRef, input_size: int, in_channels: int = 3
) -> BoxCorners:
    """Input-space box of the pixels feeding ``unit``, clipped to the patch."""
    last = receptive_field_table(cfg, input_size)[-1]
    channels = output_channels(cfg, in_channels)
    if not (0 <= unit.y < last.size and 0 <= unit.x < last.size and 0 <= unit.channel < channels):
        raise ExtractionError(
            f"Unit {unit} outside the {last.size}x{last.size}x{channels} feature map"
        )
    x0 = last.start + unit.x * last.jump
    y0 = last.start + unit.y * last.jump
    clip = lambda v: float(min(max(v, 0), input_size))  # noqa: E731
    return BoxCorners(clip(x0), clip(y0), clip(x0 + last.rf), clip(y0 + last.rf))


class ConvStack:
    """
    Forward-only stack of valid convolutions and max-pools.

    Filters are drawn uniform in +/- 1/sqrt(fan_in) from a seeded stream per
    layer unless given explicitly; biases are zero.
    """

    def __init__(
        self,
        cfg: ConvStackConfig,
        in_channels: int,
        seed: int = 0,
        weights: Sequence[np.ndarray | None] | None = None,
    ) -> None:
        self.cfg = cfg
        self.in_channels = in_channels
        self.seed = seed
        self.filters: list[np.ndarray | None] = []
        channels = in_channels
        for index, layer in enumerate(cfg.layers):
            if layer.type == "pool":
                self.filters.append(None)
                continue
            shape = (layer.channels, channels, layer.kernel, layer.kernel)
            given = weights[index] if weights is not None and index < len(weights) else None
            if given is not None:
                kernel = np.asarray(given, dtype=np.float64)
                if kernel.shape != shape:
                    raise ExtractionError(f"Layer {index} weights must have shape {shape}")
            else:
                fan_in = channels * layer.kernel * layer.kernel
                bound = 1.0 / np.sqrt(fan_in)
                kernel = make_rng(seed, "conv", index).uniform(-bound, bound, size=shape)
            self.filters.append(kernel)
            channels = layer.channels or channels

    @property
    def out_channels(self) -> int:
        return output_channels(self.cfg, self.in_channels)

    def output_shape(self, input_size: int) -> tuple[int, int, int]:
        last = receptive_field_table(self.cfg, input_size)[-1]
        return (last.size, last.size, self.out_channels)

    def forward(self, pixels: np.ndarray) -> np.ndarray:
        """Feature map (h, w, c) of an (H, W, C) array after ``cfg.active_layers``."""
        x = np.asarray(pixels, dtype=np.float64)
        if x.ndim != 3 or x.shape[2] != self.in_channels:
            raise ExtractionError(f"Stack expects {self.in_channels} input channels, got {x.shape}")
        for index, layer in enumerate(self.cfg.active_layers):
            if min(x.shape[0], x.shape[1]) + 2 * layer.padding < layer.kernel:
                raise ExtractionError(
                    f"Layer {index} kernel {layer.kernel} larger than "
                    f"its {x.shape[0]}x{x.shape[1]} input"
                )
            pad_value = 0.0 if layer.type == "conv" else -np.inf
            if layer.padding:
                pad = ((layer.padding, layer.padding), (layer.padding, layer.padding), (0, 0))
                x = np.pad(x, pad, constant_values=pad_value)
            windows = sliding_window_view(x, (layer.kernel, layer.kernel), axis=(0, 1))
            windows = windows[:: layer.stride, :: layer.stride]  # (h, w, c, k, k)
            if layer.type == "conv":
                x = np.tensordot(windows, self.filters[index], axes=([2, 3, 4], [1, 2, 3]))
                if self.cfg.rectify:
                    x = np.maximum(x, 0.0)
            else:
                x = windows.max(axis=(3, 4))
        return np.ascontiguousarray(x)

    def describe(self) -> dict[str, Any]:
        return {
            "cfg": self.cfg.model_dump(),
            "in_channels": self.in_channels,
            "seed": self.seed,
            "filters": [
                None if f is None else hashlib.sha256(f.tobytes()).hexdigest()[:16]
                for f in self.filters
            ],
        }


def conv_forward(
    cfg: ConvStackConfig, patch: Image, seed: int = 0, mean: np.ndarray | None = None
) -> tuple[np.ndarray, FeatureVector]:
    """Run a freshly built stack over one patch; returns (feature map, flattened vector)."""
    stack = ConvStack(cfg, patch.channels, seed=seed)
    pixels = patch.pixels if mean is None else subtract_mean(patch, mean)
    feature_map = stack.forward(pixels)
    tag = f"conv:{len(cfg.active_layers)}"
    return feature_map, FeatureVector(values=feature_map.ravel(), layer_tag=tag)


@extractor("conv")
class ConvExtractor(FeatureExtractor):
    """Flattened output of the stack on a mean-subtracted patch"""

    def __init__(self, stack: ConvStack, input_size: int, mean: np.ndarray) -> None:
        super().__init__(input_size, stack.in_channels)
        self.stack = stack
        self.mean = np.asarray(mean, dtype=np.float64)
        self._shape = stack.output_shape(input_size)

    @classmethod
    def from_config(
        cls,
        cfg: ExtractorConfig,
        input_size: int,
        channels: int,
        mean: np.ndarray,
        seed: int,
    ) -> "ConvExtractor":
        return cls(ConvStack(cfg.conv, channels, seed=seed), input_size, mean)

    @property
    def dim(self) -> int:
        h, w, c = self._shape
        return h * w * c

    @property
    def layer_tag(self) -> str:
        return f"conv:{len(self.stack.cfg.active_layers)}"

    def describe(self) -> dict[str, Any]:
        return {
            "kind": self.name,
            "input_size": self.input_size,
            "stack": self.stack.describe(),
            "mean": [float(v) for v in self.mean],
        }

    def feature_map(self, patch: Image) -> np.ndarray:
        self._check(patch)
        return self.stack.forward(subtract_mean(patch, self.mean))

    def _compute(self, pixels: np.ndarray) -> np.ndarray:
        return self.stack.forward(pixels - self.mean).ravel()
