import numpy as np
import pytest

from app.core.exceptions import ExtractionError
from app.features import ExtractorConfig, create_extractor
from app.features.extractors.conv_stack import (
    ConvStack,
    conv_forward,
    receptive_field,
    receptive_field_table,
)
from app.features.schema import ConvStackConfig, LayerSpec, UnitRef
from app.geometry import BoxCorners
from app.imaging import Image


def conv(kernel: int, stride: int = 1, channels: int = 2, padding: int = 0) -> LayerSpec:
    return LayerSpec(type="conv", kernel=kernel, stride=stride, channels=channels, padding=padding)


def pool(kernel: int = 2, stride: int = 2) -> LayerSpec:
    return LayerSpec(type="pool", kernel=kernel, stride=stride)


class TestReceptiveField:
    def test_single_conv(self):
        cfg = ConvStackConfig(layers=[conv(3)])
        assert receptive_field(cfg, UnitRef(0, 0, 0), 8) == BoxCorners(0, 0, 3, 3)

    def test_conv_conv_pool(self):
        last = receptive_field_table(ConvStackConfig(layers=[conv(3), conv(3), pool()]), 32)[-1]
        assert (last.rf, last.jump) == (6, 2)

    def test_conv_pool_conv(self):
        table = receptive_field_table(ConvStackConfig(layers=[conv(3), pool(), conv(3)]), 32)
        assert [t.name for t in table] == ["input", "conv1", "pool1", "conv2"]
        assert (table[-1].rf, table[-1].jump, table[-1].size) == (8, 2, 13)

    def test_unit_offset_and_clipping(self):
        cfg = ConvStackConfig(layers=[conv(3, padding=1), pool()])
        assert receptive_field(cfg, UnitRef(0, 0, 0), 8) == BoxCorners(0, 0, 3, 3)
        assert receptive_field(cfg, UnitRef(1, 2, 1), 8) == BoxCorners(3, 1, 7, 5)

    def test_unit_out_of_range(self):
        cfg = ConvStackConfig(layers=[conv(3)])
        with pytest.raises(ExtractionError):
            receptive_field(cfg, UnitRef(6, 0, 0), 8)
        with pytest.raises(ExtractionError):
            receptive_field(cfg, UnitRef(0, 0, 2), 8)

    def test_underflow(self):
        with pytest.raises(ExtractionError, match="conv2"):
            receptive_field_table(ConvStackConfig(layers=[conv(3), conv(5)]), 6)

    def test_default_stack_output(self):
        stack = ConvStack(ConvStackConfig(), in_channels=3)
        assert stack.output_shape(32) == (6, 6, 16)

    def test_impulse_response_matches_field(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            layers = [
                conv(int(rng.integers(1, 4)), int(rng.integers(1, 3)), 2, int(rng.integers(0, 2)))
                for _ in range(int(rng.integers(2, 4)))
            ]
            cfg = ConvStackConfig(layers=layers, rectify=False)
            stack = ConvStack(cfg, in_channels=1, seed=int(rng.integers(1000)))
            size = 16
            h, w, _ = stack.output_shape(size)
            unit = UnitRef(h // 2, w // 2, 1)
            base = stack.forward(np.zeros((size, size, 1)))[unit.y, unit.x, unit.channel]
            influence = np.zeros((size, size), dtype=bool)
            for y in range(size):
                for x in range(size):
                    impulse = np.zeros((size, size, 1))
                    impulse[y, x, 0] = 1.0
                    value = stack.forward(impulse)[unit.y, unit.x, unit.channel]
                    influence[y, x] = abs(value - base) > 1e-12
            ys, xs = np.nonzero(influence)
            found = BoxCorners(xs.min(), ys.min(), xs.max() + 1, ys.max() + 1)
            assert found == receptive_field(cfg, unit, size, in_channels=1)


class TestConvStack:
    def test_linear_without_rectify(self, rng):
        cfg = ConvStackConfig(layers=[conv(3, channels=4), conv(2, 2, 3)], rectify=False)
        stack = ConvStack(cfg, 3)
        a, b = rng.random((12, 12, 3)), rng.random((12, 12, 3))
        np.testing.assert_allclose(
            stack.forward(2 * a - 3 * b), 2 * stack.forward(a) - 3 * stack.forward(b), atol=1e-12
        )

    def test_explicit_weights(self):
        cfg = ConvStackConfig(layers=[conv(1, channels=1)])
        stack = ConvStack(cfg, 1, weights=[np.full((1, 1, 1, 1), 2.0)])
        pixels = np.arange(9.0).reshape(3, 3, 1)
        np.testing.assert_array_equal(stack.forward(pixels), 2 * pixels)

    def test_wrong_weight_shape(self):
        with pytest.raises(ExtractionError):
            ConvStack(ConvStackConfig(layers=[conv(3)]), 1, weights=[np.zeros((2, 1, 2, 2))])

    def test_max_pool(self):
        cfg = ConvStackConfig(layers=[conv(1, channels=1), pool()])
        stack = ConvStack(cfg, 1, weights=[np.ones((1, 1, 1, 1)), None])
        pixels = np.arange(16.0).reshape(4, 4, 1)
        assert stack.forward(pixels)[:, :, 0].tolist() == [[5.0, 7.0], [13.0, 15.0]]

    def test_output_layer_truncates(self):
        cfg = ConvStackConfig(output_layer=2)
        assert ConvStack(cfg, 3).output_shape(32) == (15, 15, 8)

    def test_seeded_filters(self):
        a = ConvStack(ConvStackConfig(), 3, seed=1).describe()
        b = ConvStack(ConvStackConfig(), 3, seed=1).describe()
        c = ConvStack(ConvStackConfig(), 3, seed=2).describe()
        assert a == b
        assert a != c


class TestConvForward:
    CFG = ConvStackConfig(layers=[conv(3, channels=4), pool()])

    def test_shapes_64_to_62_to_31(self):
        assert [t.size for t in receptive_field_table(self.CFG, 64)] == [64, 62, 31]
        feature_map, vector = conv_forward(self.CFG, Image(np.full((64, 64, 3), 0.5)), seed=4)
        assert feature_map.shape == (31, 31, 4)
        assert vector.values.shape == (31 * 31 * 4,)
        assert vector.layer_tag == "conv:2"

    def test_bitwise_deterministic_for_a_seed(self, rng):
        patch = Image(rng.random((64, 64, 3)))
        first, _ = conv_forward(self.CFG, patch, seed=9)
        second, _ = conv_forward(self.CFG, patch, seed=9)
        assert first.tobytes() == second.tobytes()
        other, _ = conv_forward(self.CFG, patch, seed=10)
        assert other.tobytes() != first.tobytes()

    def test_zero_input_gives_zero_output(self):
        feature_map, vector = conv_forward(self.CFG, Image(np.zeros((64, 64, 3))), seed=1)
        assert not feature_map.any()
        assert not vector.values.any()

    def test_mean_subtracted_before_the_stack(self):
        mean = np.array([0.1, 0.5, 0.9])
        patch = Image(np.broadcast_to(mean, (16, 16, 3)).copy())
        feature_map, _ = conv_forward(self.CFG, patch, seed=2, mean=mean)
        assert not feature_map.any()

    def test_rectified_output_non_negative(self, rng):
        patch = Image(rng.random((20, 20, 3)))
        feature_map, _ = conv_forward(self.CFG, patch, mean=np.full(3, 0.5))
        assert feature_map.min() >= 0.0


class TestExtractorRegistry:
    def test_create_both_kinds(self):
        hog = create_extractor(ExtractorConfig(kind="hog"), 32, 3)
        conv_extractor = create_extractor(ExtractorConfig(kind="conv"), 32, 3, seed=4)
        assert hog.dim == 324
        assert conv_extractor.dim == 6 * 6 * 16
        assert conv_extractor.layer_tag == "conv:4"
        assert hog.fingerprint() != conv_extractor.fingerprint()

    def test_fingerprint_tracks_mean_and_seed(self):
        cfg = ExtractorConfig(kind="conv")
        base = create_extractor(cfg, 32, 3, mean=np.zeros(3), seed=1).fingerprint()
        assert base == create_extractor(cfg, 32, 3, mean=np.zeros(3), seed=1).fingerprint()
        assert base != create_extractor(cfg, 32, 3, mean=np.full(3, 0.5), seed=1).fingerprint()
        assert base != create_extractor(cfg, 32, 3, mean=np.zeros(3), seed=2).fingerprint()

    def test_conv_extractor_subtracts_mean(self):
        cfg = ExtractorConfig(kind="conv")
        mean = np.array([0.2, 0.4, 0.6])
        extractor = create_extractor(cfg, 32, 3, mean=mean, seed=3)
        flat = extractor.extract(Image(np.broadcast_to(mean, (32, 32, 3)).copy()))
        assert not flat.values.any()


def test_unit_ref_parse():
    assert UnitRef.parse(" 1, 2,3") == UnitRef(1, 2, 3)
    with pytest.raises(ValueError):
        UnitRef.parse("1,2")
