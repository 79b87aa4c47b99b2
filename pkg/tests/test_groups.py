from collections import Counter

import numpy as np
import pytest
from scipy import stats

from qsflow.groups import (
    aggregate_increments,
    coupled_gaussian_increments,
    ctmc_walk_batch,
    ctmc_walk_oracle,
    free_group,
    group_walk_batch,
    heat_expectation_oracle,
    heisenberg_group,
    integer_lattice,
    lie_bm_batch,
    lie_bm_product,
    philox_stream,
    rho_convergence_diagnostic,
    rho_metric,
    rho_metric_batch,
    sample_group_walk_trotter,
    sample_lie_bm_trotter,
    slot_widths,
    so3,
    su2,
    torus,
    walk_product,
)
from qsflow.linalg import dagger, operator_norm


def empirical_tv(counter_a, counter_b, n_a, n_b):
    keys = set(counter_a) | set(counter_b)
    return 0.5 * sum(abs(counter_a[k] / n_a - counter_b[k] / n_b) for k in keys)


class TestLieModels:
    def test_generators_anti_selfadjoint_and_exp_unitary(self):
        for model in (torus(), su2(), so3()):
            for chi in model.basis:
                assert operator_norm(chi + dagger(chi)) <= 1e-12
            g = sample_lie_bm_trotter(model, 1.0, 3, np.random.default_rng(0))
            assert operator_norm(dagger(g) @ g - np.eye(model.dim)) <= 1e-10

    def test_su2_generator_sum_of_squares(self):
        acc = sum(chi @ chi for chi in su2().basis)
        np.testing.assert_allclose(acc, -0.75 * np.eye(2), atol=1e-14)

    def test_time_zero_identity(self):
        model = su2()
        g = sample_lie_bm_trotter(model, 0.0, 4, np.random.default_rng(1))
        assert np.array_equal(g, np.eye(2))


class TestHeatOracle:
    def test_time_zero(self):
        np.testing.assert_allclose(heat_expectation_oracle(su2(), 0.0), np.eye(2))

    def test_su2_scalar_form(self):
        np.testing.assert_allclose(
            heat_expectation_oracle(su2(), 1.3),
            np.exp(-3 * 1.3 / 8) * np.eye(2),
            atol=1e-13,
        )

    def test_torus_character(self):
        for t in (0.5, 2.0):
            np.testing.assert_allclose(
                heat_expectation_oracle(torus(), t), [[np.exp(-t / 2)]], atol=1e-14
            )

    def test_semigroup_law(self):
        model = so3()
        lhs = heat_expectation_oracle(model, 0.7) @ heat_expectation_oracle(model, 0.5)
        rhs = heat_expectation_oracle(model, 1.2)
        assert operator_norm(lhs - rhs) <= 1e-10


class TestLieSampling:
    def test_torus_product_telescopes(self):
        model = torus()
        rng = np.random.default_rng(2)
        dw = coupled_gaussian_increments(rng, 1, 1, 1.0, 6)[0]
        x = lie_bm_product(model, dw)
        expected = np.exp(1j * dw.sum())
        assert abs(complex(x[0, 0]) - expected) <= 1e-12

    def test_torus_wrapped_gaussian_fourier(self):
        # Fourier coefficients of the wrapped Gaussian: E e^{ik theta_t} = e^{-k^2 t/2}
        rng = philox_stream(123, 0)
        t, samples = 1.0, 40000
        dw = coupled_gaussian_increments(rng, samples, 1, t, 5)
        angles = dw.sum(axis=(1, 2))
        for k in (1, 2):
            emp = np.mean(np.exp(1j * k * angles))
            se = 1.0 / np.sqrt(samples)
            assert abs(emp - np.exp(-(k**2) * t / 2)) <= 4 * se

    def test_batch_matches_single(self):
        model = su2()
        rng = np.random.default_rng(3)
        dw = coupled_gaussian_increments(rng, 3, 3, 1.0, 3)
        batch = lie_bm_batch(model, dw)
        for s in range(3):
            single = lie_bm_product(model, dw[s])
            assert operator_norm(batch[s] - single) <= 1e-12

    def test_su2_sample_mean_matches_heat_oracle(self):
        model = su2()
        t, level, samples = 1.0, 5, 20000
        rng = philox_stream(7, 0)
        dw = coupled_gaussian_increments(rng, samples, 3, t, level)
        xs = lie_bm_batch(model, dw)
        mean = xs.mean(axis=0)
        oracle = heat_expectation_oracle(model, t)
        se = np.maximum(xs.std(axis=0) / np.sqrt(samples), 1e-12)
        assert np.all(np.abs(mean - oracle) <= 4 * se)

    def test_channel_block_order_telescopes_per_channel(self):
        model = su2()
        rng = np.random.default_rng(4)
        dw = coupled_gaussian_increments(rng, 1, 3, 1.0, 4)[0]
        x = lie_bm_product(model, dw, order="channel-blocks")
        from qsflow.linalg import expm

        want = np.eye(2, dtype=complex)
        for i, chi in enumerate(model.basis):
            want = want @ expm(dw[:, i].sum() * chi)
        assert operator_norm(x - want) <= 1e-10


class TestCoupling:
    def test_aggregation_exact(self):
        rng = np.random.default_rng(5)
        dw = coupled_gaussian_increments(rng, 2, 1, 1.0, 4)
        coarser = aggregate_increments(dw)
        assert coarser.shape == (2, 8, 1)
        np.testing.assert_array_equal(coarser[:, 0, :], dw[:, 0, :] + dw[:, 1, :])

    def test_coupled_sampler_consistency_commutative(self):
        # On the torus the product only sees the increment sum, so the
        # sampler at level n on aggregated noise equals the direct one.
        model = torus()
        rng = np.random.default_rng(6)
        fine = coupled_gaussian_increments(rng, 1, 1, 1.0, 5)
        coarse = aggregate_increments(fine)
        x_coarse = lie_bm_product(model, coarse[0])
        x_sum = np.exp(1j * fine[0].sum())
        assert abs(complex(x_coarse[0, 0]) - x_sum) <= 1e-12

    def test_rho_properties(self):
        model = su2()
        rng = np.random.default_rng(7)
        a = sample_lie_bm_trotter(model, 1.0, 3, rng)
        b = sample_lie_bm_trotter(model, 1.0, 3, rng)
        assert rho_metric(model, a, a) == 0.0
        assert 0.0 < rho_metric(model, a, b) < 1.0
        assert rho_metric(model, a, b) == pytest.approx(rho_metric(model, b, a))

    def test_rho_diagnostic_decreases(self):
        model = su2()
        table = rho_convergence_diagnostic(
            model, 1.0, range(2, 6), samples=2000, rng=philox_stream(11, 0)
        )
        assert table.columns == ["level", "mean_rho", "std_error"]
        means = [row[1] for row in table.rows]
        assert all(m1 > m2 for m1, m2 in zip(means, means[1:]))
        assert all(row[1] <= 1.0 for row in table.rows)

    def test_rho_diagnostic_zero_for_identical(self):
        model = su2()
        rng = np.random.default_rng(8)
        dw = coupled_gaussian_increments(rng, 4, 3, 1.0, 3)
        xs = lie_bm_batch(model, dw)
        assert np.all(rho_metric_batch(model, xs, xs) == 0.0)


class TestDiscreteGroups:
    @pytest.mark.parametrize(
        "model",
        [
            integer_lattice(2, [1.0, 0.5, 0.7, 0.3]),
            free_group(2, [0.5, 0.5, 0.5, 0.5]),
            heisenberg_group([0.4, 0.6, 0.4, 0.6]),
        ],
    )
    def test_group_axioms(self, model):
        rng = np.random.default_rng(9)
        elements = [
            walk_product(model, rng.integers(-2, 3, size=(4, model.n_gen)))
            for _ in range(30)
        ]
        for _ in range(1000):
            a, b, c = (elements[rng.integers(len(elements))] for _ in range(3))
            assert model.multiply(model.multiply(a, b), c) == model.multiply(
                a, model.multiply(b, c)
            )
            assert model.multiply(a, model.inverse(a)) == model.identity()

    def test_generator_inverse_pairing(self):
        model = free_group(2, [1, 1, 1, 1])
        g = model.generator_power(0, 1)
        ginv = model.generator_power(0, -1)
        assert model.multiply(g, ginv) == model.identity()

    def test_word_reduction_idempotent(self):
        model = free_group(2, [1, 1, 1, 1])
        w = model.multiply((1, 2, -1), (1, -2, -1))
        assert w == (1, 2, -2, -1) or w == model.multiply(w, model.identity())
        assert model.multiply(w, model.identity()) == w

    def test_time_zero(self):
        model = integer_lattice(1, [1.0, 0.5])
        assert sample_group_walk_trotter(model, 0.0, 3, np.random.default_rng(10)) == (0,)
        assert ctmc_walk_oracle(model, 0.0, np.random.default_rng(10)) == (0,)


class TestWalkLaws:
    def test_z1_exponent_is_skellam_any_level(self):
        lam1, lam2, t = 1.0, 0.5, 1.0
        model = integer_lattice(1, [lam1, lam2])
        samples = 20000
        for level in (0, 4):
            rng = philox_stream(21, level)
            draws = [
                sample_group_walk_trotter(model, t, level, rng)[0] for _ in range(samples)
            ]
            counts = Counter(draws)
            support = range(min(draws), max(draws) + 1)
            tv = 0.5 * sum(
                abs(counts[z] / samples - stats.skellam.pmf(z, lam1 * t, lam2 * t))
                for z in support
            ) + 0.5 * (1.0 - stats.skellam.cdf(max(draws), lam1 * t, lam2 * t)) + 0.5 * stats.skellam.cdf(min(draws) - 1, lam1 * t, lam2 * t)
            assert tv <= 0.02

    def test_batch_walk_matches_dense_law(self):
        model = free_group(2, [0.5, 0.5, 0.5, 0.5])
        t, level, samples = 1.0, 3, 8000
        dense = [
            sample_group_walk_trotter(model, t, level, philox_stream(31, i))
            for i in range(samples)
        ]
        sparse = group_walk_batch(model, t, level, philox_stream(32, 0), samples)
        tv = empirical_tv(Counter(dense), Counter(sparse), samples, samples)
        assert tv <= 0.08  # two-sample noise at 8k draws; full-size check in acceptance

    def test_ctmc_batch_matches_single(self):
        model = integer_lattice(1, [1.0, 0.5])
        t, samples = 1.0, 20000
        rng = philox_stream(41, 0)
        singles = Counter(ctmc_walk_oracle(model, t, rng) for _ in range(samples))
        batch = Counter(ctmc_walk_batch(model, t, philox_stream(42, 0), samples))
        assert empirical_tv(singles, batch, samples, samples) <= 0.03

    def test_ctmc_skellam_and_jump_count(self):
        lam1, lam2, t = 1.0, 0.5, 1.0
        model = integer_lattice(1, [lam1, lam2])
        samples = 30000
        rng = philox_stream(51, 0)
        total_rate = lam1 + lam2
        jump_counts = rng.poisson(total_rate * t, size=samples)
        assert abs(jump_counts.mean() - total_rate * t) <= 3 * np.sqrt(total_rate * t / samples)
        draws = ctmc_walk_batch(model, t, philox_stream(52, 0), samples)
        counts = Counter(z[0] for z in draws)
        zs = range(min(counts), max(counts) + 1)
        tv = 0.5 * sum(
            abs(counts[z] / samples - stats.skellam.pmf(z, lam1 * t, lam2 * t)) for z in zs
        )
        assert tv <= 0.01 + 0.5 * (1 - stats.skellam.cdf(max(counts), lam1 * t, lam2 * t))

    def test_f2_trotter_matches_ctmc_on_ball(self):
        model = free_group(2, [0.5, 0.5, 0.5, 0.5])
        t, level, samples = 1.0, 6, 20000
        walk = Counter(group_walk_batch(model, t, level, philox_stream(61, 0), samples))
        limit = Counter(ctmc_walk_batch(model, t, philox_stream(62, 0), samples))

        def ball_project(counter):
            out = Counter()
            for w, c in counter.items():
                out[w if len(w) <= 4 else "outside"] += c
            return out

        tv = empirical_tv(ball_project(walk), ball_project(limit), samples, samples)
        assert tv <= 0.05  # 20k-draw noise floor ~0.025; acceptance runs 1e5 at level 10

    def test_heisenberg_walk_noncommutative_consistency(self):
        model = heisenberg_group([0.5, 0.5, 0.5, 0.5])
        t, level, samples = 1.0, 5, 8000
        walk = Counter(group_walk_batch(model, t, level, philox_stream(71, 0), samples))
        limit = Counter(ctmc_walk_batch(model, t, philox_stream(72, 0), samples))
        assert empirical_tv(walk, limit, samples, samples) <= 0.08


class TestSampleDumps:
    def test_matrix_dump_one_row_per_trajectory(self):
        model = su2()
        rng = np.random.default_rng(12)
        dw = coupled_gaussian_increments(rng, 3, 3, 1.0, 2)
        xs = lie_bm_batch(model, dw)
        from qsflow.groups import matrix_samples_to_table

        table = matrix_samples_to_table(xs, {"group": "su2"})
        assert len(table.rows) == 3
        assert table.columns[0] == "trajectory"
        assert len(table.rows[0]) == 1 + 2 * 4
        assert "re_00" in table.columns and table.to_csv().startswith("#")

    def test_word_dump(self):
        from qsflow.groups import word_samples_to_table

        model = free_group(2, [1, 1, 1, 1])
        els = group_walk_batch(model, 1.0, 3, philox_stream(13, 0), 5)
        table = word_samples_to_table(els)
        assert len(table.rows) == 5
        assert table.columns == ["trajectory", "element"]


class TestDeterminism:
    def test_philox_streams_reproducible(self):
        a = philox_stream(99, 3).standard_normal(5)
        b = philox_stream(99, 3).standard_normal(5)
        c = philox_stream(99, 4).standard_normal(5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_slot_widths(self):
        w = slot_widths(1.0, 3)
        assert w.size == 8
        np.testing.assert_allclose(w, 0.125)
        w2 = slot_widths(0.3, 2)
        assert w2.sum() == pytest.approx(0.3)
