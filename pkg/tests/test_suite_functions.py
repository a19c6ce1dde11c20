"""Tests for the benchmark function suites and instance generation."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funcid import rng
from funcid.suite import (
    EvalCounter,
    Suite,
    SuiteError,
    bbob_class,
    evaluate,
    list_functions,
    make_instance,
    problem,
    random_orthogonal,
)

BBOB = Suite.CONTINUOUS_BBOB
PB = Suite.DISCRETE_PB


# -- problem listing ---------------------------------------------------------


class TestListing:
    def test_bbob_has_24_functions(self):
        funcs = list_functions(BBOB)
        assert len(funcs) == 24
        assert funcs[0].display_name == "Sphere"
        assert funcs[4].display_name == "Linear Slope"

    def test_discrete_has_6_functions(self):
        funcs = list_functions(PB)
        assert len(funcs) == 6
        assert funcs[0].display_name == "OneMax"

    def test_listing_is_stable(self):
        assert list_functions(BBOB) == list_functions(BBOB)
        assert list_functions(PB) == list_functions(PB)

    def test_class_partitioning(self):
        # Five structural classes partition 1..24 as 5/4/5/5/5.
        tags = [bbob_class(k) for k in range(1, 25)]
        assert tags == ["i"] * 5 + ["ii"] * 4 + ["iii"] * 5 + ["iv"] * 5 + ["v"] * 5

    def test_unknown_index_rejected(self):
        with pytest.raises(SuiteError):
            problem(BBOB, 25)
        with pytest.raises(SuiteError):
            problem(PB, 0)


# -- instance construction ---------------------------------------------------


class TestMakeInstance:
    def test_seed_zero_sphere_optimum_at_origin(self):
        inst = make_instance(problem(BBOB, 1), 2, 0)
        assert np.array_equal(inst.translation, np.zeros(2))
        assert evaluate(inst, np.zeros(2)) == pytest.approx(inst.f_offset, abs=1e-12)

    def test_optimum_evaluates_to_offset(self):
        inst = make_instance(problem(BBOB, 1), 22, 7)
        assert abs(evaluate(inst, inst.x_opt) - inst.f_offset) < 1e-9

    @pytest.mark.parametrize("k", range(1, 25))
    @pytest.mark.parametrize("seed", [0, 1, 7, 2**62 + 11])
    def test_optimum_consistency_all_functions(self, k, seed):
        inst = make_instance(problem(BBOB, k), 5, seed)
        assert abs(evaluate(inst, inst.x_opt) - inst.f_offset) < 1e-9

    def test_rotation_orthogonality(self):
        inst = make_instance(problem(BBOB, 3), 5, 3)
        for r in inst.rotations:
            assert np.max(np.abs(r.T @ r - np.eye(5))) < 1e-9

    @pytest.mark.parametrize("d", [2, 8, 40, 64])
    def test_random_orthogonal_tolerance(self, d):
        r = random_orthogonal(d, rng.substream(17, rng.ROTATION_R, d))
        assert np.max(np.abs(r.T @ r - np.eye(d))) < 1e-9

    def test_bit_identical_rebuild(self):
        a = make_instance(problem(BBOB, 15), 22, 99)
        b = make_instance(problem(BBOB, 15), 22, 99)
        assert np.array_equal(a.translation, b.translation)
        assert a.f_offset == b.f_offset
        for ra, rb in zip(a.rotations, b.rotations):
            assert np.array_equal(ra, rb)
        x = rng.substream(4, rng.SAMPLES).random(22)
        assert evaluate(a, x) == evaluate(b, x)

    def test_translation_within_interior(self):
        # Drawn shifts stay inside [-4, 4]; structural optima inside [-5, 5].
        for k in range(1, 25):
            inst = make_instance(problem(BBOB, k), 6, 13)
            assert np.all(np.abs(inst.translation) <= 5.0)

    def test_offset_range_and_rounding(self):
        for seed in range(10):
            inst = make_instance(problem(BBOB, 2), 3, seed)
            assert -100.0 <= inst.f_offset <= 100.0
            assert inst.f_offset == round(inst.f_offset, 2)

    def test_continuous_rejects_d1(self):
        with pytest.raises(SuiteError):
            make_instance(problem(BBOB, 1), 1, 0)

    def test_discrete_dimension_cap(self):
        make_instance(problem(PB, 1), 64, 0)
        with pytest.raises(SuiteError):
            make_instance(problem(PB, 1), 65, 0)

    def test_ising_triangular_needs_square(self):
        make_instance(problem(PB, 6), 16, 0)
        with pytest.raises(SuiteError):
            make_instance(problem(PB, 6), 15, 0)


# -- evaluation --------------------------------------------------------------


class TestEvaluate:
    def test_raw_sphere_at_origin(self):
        inst = make_instance(problem(BBOB, 1), 2, 0)
        assert evaluate(inst, np.zeros(2)) - inst.f_offset == 0.0

    def test_raw_rastrigin_at_origin(self):
        inst = make_instance(problem(BBOB, 3), 2, 0)
        assert evaluate(inst, np.zeros(2)) - inst.f_offset == pytest.approx(0.0, abs=1e-12)

    def test_sphere_rotation_invariance(self):
        # Zero-translation sphere is invariant under any orthogonal map.
        inst = make_instance(problem(BBOB, 1), 5, 0)
        r = random_orthogonal(5, rng.substream(23, rng.ROTATION_R))
        x = rng.substream(29, rng.SAMPLES).random(5)
        assert evaluate(inst, r @ x) == pytest.approx(evaluate(inst, x), abs=1e-9)

    def test_dimension_mismatch(self):
        inst = make_instance(problem(BBOB, 1), 3, 0)
        with pytest.raises(SuiteError):
            evaluate(inst, np.zeros(4))

    def test_discrete_rejects_non_binary(self):
        inst = make_instance(problem(PB, 1), 4, 0)
        with pytest.raises(SuiteError):
            evaluate(inst, np.array([0.0, 0.5, 1.0, 0.0]))

    def test_onemax(self):
        inst = make_instance(problem(PB, 1), 4, 0)
        assert evaluate(inst, np.ones(4)) == 4.0

    def test_leading_ones(self):
        inst = make_instance(problem(PB, 2), 4, 0)
        assert evaluate(inst, np.array([1.0, 1.0, 0.0, 1.0])) == 2.0

    def test_linear_weighted_count(self):
        inst = make_instance(problem(PB, 3), 4, 0)
        assert evaluate(inst, np.array([1.0, 0.0, 0.0, 1.0])) == 5.0

    def test_ising_ring_against_bruteforce(self):
        inst = make_instance(problem(PB, 5), 4, 0)
        x = np.array([0.0, 1.0, 0.0, 1.0])
        expected = 0.0
        for i in range(4):  # ring-edge Hamiltonian, one term per edge
            a, b = x[i], x[(i + 1) % 4]
            expected += a * b + (1 - a) * (1 - b)
        assert evaluate(inst, x) == expected == 0.0

    def test_ising_ring_random_bruteforce(self):
        inst = make_instance(problem(PB, 5), 12, 0)
        gen = rng.substream(31, rng.SAMPLES)
        for _ in range(20):
            x = (gen.random(12) >= 0.5).astype(float)
            expected = sum(
                x[i] * x[(i + 1) % 12] + (1 - x[i]) * (1 - x[(i + 1) % 12])
                for i in range(12)
            )
            assert evaluate(inst, x) == expected

    def test_ising_triangular_bruteforce(self):
        inst = make_instance(problem(PB, 6), 9, 0)
        gen = rng.substream(37, rng.SAMPLES)
        for _ in range(10):
            x = (gen.random(9) >= 0.5).astype(float)
            grid = x.reshape(3, 3)
            expected = 0.0
            for i in range(3):
                for j in range(3):
                    for di, dj in ((1, 0), (0, 1), (1, 1)):
                        a, b = grid[i, j], grid[(i + di) % 3, (j + dj) % 3]
                        expected += a * b + (1 - a) * (1 - b)
            assert evaluate(inst, x) == expected

    def test_labs_merit_factor_bruteforce(self):
        inst = make_instance(problem(PB, 4), 8, 0)
        gen = rng.substream(41, rng.SAMPLES)
        for _ in range(10):
            x = (gen.random(8) >= 0.5).astype(float)
            s = 2 * x - 1
            energy = 0.0
            for k in range(1, 8):
                c_k = sum(s[i] * s[i + k] for i in range(8 - k))
                energy += c_k**2
            assert evaluate(inst, x) == pytest.approx(64.0 / (2.0 * energy))

    def test_all_ones_ising_ring_maximal(self):
        inst = make_instance(problem(PB, 5), 8, 0)
        assert evaluate(inst, np.ones(8)) == 8.0


# -- counters ----------------------------------------------------------------


class TestEvalCounter:
    def test_memoization_counts(self):
        inst = make_instance(problem(BBOB, 1), 3, 5)
        counter = EvalCounter()
        x = np.array([0.1, 0.2, 0.3])
        v1 = evaluate(inst, x, counter)
        v2 = evaluate(inst, x, counter)
        assert v1 == v2
        assert counter.distinct_queries == 1
        assert counter.total_queries == 2

    def test_distinct_points_both_counted(self):
        inst = make_instance(problem(BBOB, 1), 3, 5)
        counter = EvalCounter()
        evaluate(inst, np.zeros(3), counter)
        evaluate(inst, np.ones(3), counter)
        assert counter.distinct_queries == counter.total_queries == 2

    def test_counter_merge(self):
        a = EvalCounter(distinct_queries=2, total_queries=5)
        b = EvalCounter(distinct_queries=1, total_queries=3)
        a.merge(b)
        assert (a.distinct_queries, a.total_queries) == (3, 8)

    @given(st.integers(min_value=0, max_value=2**63 - 1), st.integers(1, 24))
    @settings(max_examples=25, deadline=None)
    def test_counter_invariant_distinct_le_total(self, seed, k):
        inst = make_instance(problem(BBOB, k), 2, seed % 1000)
        counter = EvalCounter()
        gen = rng.substream(seed, rng.SAMPLES)
        pts = gen.random((5, 2))
        for x in list(pts) + list(pts[:2]):
            evaluate(inst, x, counter)
        assert counter.distinct_queries <= counter.total_queries
        assert counter.total_queries == 7


# -- determinism properties ---------------------------------------------------


class TestDeterminism:
    @given(st.integers(1, 24), st.integers(0, 2**31 - 1))
    @settings(max_examples=20, deadline=None)
    def test_instance_evaluation_reproducible(self, k, seed):
        a = make_instance(problem(BBOB, k), 3, seed)
        b = make_instance(problem(BBOB, k), 3, seed)
        x = rng.substream(seed, rng.SAMPLES, k).random(3)
        assert evaluate(a, x) == evaluate(b, x)

    def test_different_seeds_differ(self):
        a = make_instance(problem(BBOB, 1), 4, 1)
        b = make_instance(problem(BBOB, 1), 4, 2)
        assert not np.array_equal(a.translation, b.translation)

    def test_translation_sensitivity_of_probe(self):
        # Two sphere instances differing in translation disagree at the origin.
        a = make_instance(problem(BBOB, 1), 4, 1)
        b = make_instance(problem(BBOB, 1), 4, 2)
        va = evaluate(a, np.zeros(4)) - a.f_offset
        vb = evaluate(b, np.zeros(4)) - b.f_offset
        assert va != vb
