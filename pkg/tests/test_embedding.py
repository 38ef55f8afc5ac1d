import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blobkit.embedding import (
    FourierConfig,
    FusionMap,
    TokenEmbeddingMatrix,
    blob_embedding,
    encode_parameter,
    fourier_features,
)
from blobkit.errors import InvalidArgumentError, ParseError
from blobkit.geometry import BlobParameter, Canvas

CANVAS = Canvas(512, 512)


class TestEncodeParameter:
    def test_centered_circle(self):
        v = encode_parameter(BlobParameter(256, 256, 100, 100, 0.0), CANVAS)
        assert v[0] == 0.5 and v[1] == 0.5
        assert v[4] == 0.0 and v[5] == 1.0

    def test_teddy_bear_center(self):
        v = encode_parameter(BlobParameter(444, 258, 162, 76, math.radians(96)), CANVAS)
        assert v[0] == pytest.approx(0.8672, abs=5e-5)
        assert v[1] == pytest.approx(0.5039, abs=5e-5)
        assert v[2] == pytest.approx(162 / 512)
        assert v[3] == pytest.approx(76 / 512)

    def test_out_of_canvas_center_clamped(self):
        v = encode_parameter(BlobParameter(-2000, 5000, 50, 20), CANVAS)
        assert v[0] == -0.5 and v[1] == 1.5

    def test_full_turn_is_exact_after_canonicalization(self):
        # one and two full float turns both canonicalize to exactly 0.0
        p1 = BlobParameter(100, 100, 40, 20, 2 * math.pi)
        p2 = BlobParameter(100, 100, 40, 20, 4 * math.pi)
        assert p1.theta == 0.0 and p2.theta == 0.0
        assert np.array_equal(encode_parameter(p1, CANVAS), encode_parameter(p2, CANVAS))

    def test_full_turn_arbitrary_offset(self):
        # the float sum 0.7 + 2pi rounds, so equality is up to one ulp of angle
        p1 = BlobParameter(100, 100, 40, 20, 0.7)
        p2 = BlobParameter(100, 100, 40, 20, 0.7 + 2 * math.pi)
        v1, v2 = encode_parameter(p1, CANVAS), encode_parameter(p2, CANVAS)
        assert v2 == pytest.approx(v1, abs=1e-12)

    @given(st.floats(-math.pi, math.pi))
    def test_trig_components_bounded(self, theta):
        v = encode_parameter(BlobParameter(256, 256, 50, 25, theta), CANVAS)
        assert -1 <= v[4] <= 1 and -1 <= v[5] <= 1
        assert v[4] ** 2 + v[5] ** 2 == pytest.approx(1.0)


class TestFourierFeatures:
    def test_zero_vector(self):
        out = fourier_features(np.zeros(6), FourierConfig())
        assert out.shape == (96,)
        assert np.array_equal(out[0::2], np.zeros(48))  # sin slots
        assert np.array_equal(out[1::2], np.ones(48))  # cos slots

    def test_quarter_period(self):
        out = fourier_features(np.array([0.5]), FourierConfig(num_frequencies=1))
        assert out[0] == pytest.approx(1.0)  # sin(pi/2)
        assert out[1] == pytest.approx(0.0, abs=1e-12)  # cos(pi/2)

    def test_component_major_ordering(self):
        cfg = FourierConfig(num_frequencies=2, base=3.0, scale=1.0)
        out = fourier_features(np.array([0.25, 0.75]), cfg)
        expect = []
        for x in (0.25, 0.75):
            for w in (1.0, 3.0):
                expect += [math.sin(w * x), math.cos(w * x)]
        assert out == pytest.approx(expect)

    def test_frequency_schedule(self):
        cfg = FourierConfig(num_frequencies=4, base=2.0, scale=math.pi)
        assert cfg.frequencies == pytest.approx(
            [math.pi, 2 * math.pi, 4 * math.pi, 8 * math.pi]
        )

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            fourier_features(np.array([1.0, float("nan")]), FourierConfig())

    def test_config_validation(self):
        with pytest.raises(InvalidArgumentError):
            FourierConfig(num_frequencies=0)
        with pytest.raises(InvalidArgumentError):
            FourierConfig(base=-2.0)

    @settings(max_examples=30)
    @given(
        st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=8),
        st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=8),
    )
    def test_lipschitz_in_input(self, xs, ys):
        n = min(len(xs), len(ys))
        v1 = np.array(xs[:n])
        v2 = np.array(ys[:n])
        cfg = FourierConfig()
        lip = cfg.frequencies.max()  # |d sin(wx)/dx| <= w
        d_out = np.abs(fourier_features(v1, cfg) - fourier_features(v2, cfg)).max()
        d_in = np.abs(v1 - v2).max()
        assert d_out <= lip * d_in + 1e-9


def float32_rng_matrix(rng, rows, cols):
    return rng.standard_normal((rows, cols)).astype(np.float32).astype(np.float64)


class TestFusionMap:
    def test_identity_map(self):
        fm = FusionMap.identity(4)
        x = np.arange(8.0).reshape(2, 4)
        assert np.array_equal(fm.apply(x), x)

    def test_gelu_between_layers(self):
        # single input through [1] -> gelu -> [1]: gelu(1) = 0.5*(1+erf(1/sqrt 2))
        fm = FusionMap([(np.array([[1.0]]), np.zeros(1)), (np.array([[1.0]]), np.zeros(1))])
        out = fm.apply(np.array([[1.0]]))
        assert out[0, 0] == pytest.approx(0.8413447460685429)

    def test_no_gelu_after_last_layer(self):
        fm = FusionMap([(np.array([[1.0]]), np.zeros(1))])
        out = fm.apply(np.array([[-3.0]]))
        assert out[0, 0] == -3.0  # gelu would have shrunk this toward 0

    def test_dimension_chain_validation(self):
        with pytest.raises(InvalidArgumentError):
            FusionMap([(np.eye(3), np.zeros(3)), (np.eye(4), np.zeros(4))])

    def test_bias_shape_validation(self):
        with pytest.raises(InvalidArgumentError):
            FusionMap([(np.eye(3), np.zeros(2))])

    def test_bytes_roundtrip(self):
        rng = np.random.default_rng(11)
        layers = [
            (float32_rng_matrix(rng, 10, 7), float32_rng_matrix(rng, 1, 7)[0]),
            (float32_rng_matrix(rng, 7, 5), float32_rng_matrix(rng, 1, 5)[0]),
        ]
        fm = FusionMap(layers)
        fm2 = FusionMap.from_bytes(fm.to_bytes())
        assert fm2.input_dim == 10 and fm2.output_dim == 5
        for (w1, b1), (w2, b2) in zip(fm.layers, fm2.layers):
            assert np.array_equal(w1, w2)
            assert np.array_equal(b1, b2)

    def test_file_roundtrip(self, tmp_path):
        fm = FusionMap.identity(3)
        path = tmp_path / "fusion.bin"
        fm.save(path)
        fm2 = FusionMap.load(path)
        x = np.array([[0.5, -1.0, 2.0]])
        assert np.array_equal(fm.apply(x), fm2.apply(x))

    def test_truncated_bytes_rejected(self):
        data = FusionMap.identity(3).to_bytes()
        with pytest.raises(ParseError):
            FusionMap.from_bytes(data[:-2])

    def test_trailing_bytes_rejected(self):
        data = FusionMap.identity(3).to_bytes()
        with pytest.raises(ParseError):
            FusionMap.from_bytes(data + b"\x00")


class TestBlobEmbedding:
    def setup_method(self):
        self.fourier = FourierConfig(num_frequencies=2)  # d_tau = 24
        self.p = BlobParameter(256, 200, 80, 40, 0.5)

    def identity_fusion(self, d_s):
        return FusionMap.identity(d_s + 24)

    def test_identity_fusion_is_verbatim_concat(self):
        rng = np.random.default_rng(0)
        tokens = TokenEmbeddingMatrix(rng.standard_normal((3, 5)))
        out = blob_embedding(tokens, self.p, CANVAS, self.fourier, self.identity_fusion(5))
        e_tau = fourier_features(encode_parameter(self.p, CANVAS), self.fourier)
        assert out.shape == (3, 29)
        assert np.array_equal(out[:, :5], tokens.values)
        for row in out:
            assert np.array_equal(row[5:], e_tau)

    def test_same_text_different_parameters_differ(self):
        tokens = TokenEmbeddingMatrix(np.ones((2, 4)))
        fusion = self.identity_fusion(4)
        out1 = blob_embedding(tokens, self.p, CANVAS, self.fourier, fusion)
        out2 = blob_embedding(
            tokens, BlobParameter(100, 300, 60, 30, 1.2), CANVAS, self.fourier, fusion
        )
        assert not np.array_equal(out1, out2)

    def test_token_permutation_permutes_rows(self):
        rng = np.random.default_rng(1)
        mat = rng.standard_normal((4, 6))
        fusion = self.identity_fusion(6)
        out = blob_embedding(TokenEmbeddingMatrix(mat), self.p, CANVAS, self.fourier, fusion)
        perm = [2, 0, 3, 1]
        out_p = blob_embedding(
            TokenEmbeddingMatrix(mat[perm]), self.p, CANVAS, self.fourier, fusion
        )
        assert np.array_equal(out_p, out[perm])

    def test_row_locality(self):
        rng = np.random.default_rng(2)
        mat = rng.standard_normal((4, 6))
        changed = mat.copy()
        changed[2] += 1.0
        fusion = self.identity_fusion(6)
        out1 = blob_embedding(TokenEmbeddingMatrix(mat), self.p, CANVAS, self.fourier, fusion)
        out2 = blob_embedding(
            TokenEmbeddingMatrix(changed), self.p, CANVAS, self.fourier, fusion
        )
        for l in (0, 1, 3):
            assert np.array_equal(out1[l], out2[l])
        assert not np.array_equal(out1[2], out2[2])

    def test_dimension_mismatch(self):
        tokens = TokenEmbeddingMatrix(np.ones((2, 4)))
        with pytest.raises(InvalidArgumentError):
            blob_embedding(tokens, self.p, CANVAS, self.fourier, FusionMap.identity(10))

    def test_output_shape_with_mlp(self):
        rng = np.random.default_rng(3)
        fusion = FusionMap(
            [
                (rng.standard_normal((28, 16)), rng.standard_normal(16)),
                (rng.standard_normal((16, 7)), rng.standard_normal(7)),
            ]
        )
        tokens = TokenEmbeddingMatrix(rng.standard_normal((5, 4)))
        out = blob_embedding(tokens, self.p, CANVAS, self.fourier, fusion)
        assert out.shape == (5, 7)

    def test_token_matrix_validation(self):
        with pytest.raises(InvalidArgumentError):
            TokenEmbeddingMatrix(np.array([[1.0, float("inf")]]))
        with pytest.raises(InvalidArgumentError):
            TokenEmbeddingMatrix(np.zeros((0, 4)))
