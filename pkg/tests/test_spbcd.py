import numpy as np
import pytest

from sepsaddle.baselines import preconditioned_pdcp_run
from sepsaddle.errors import ConfigError, NumericsError, RunAborted
from sepsaddle.functions import QuadraticDual, ZeroBlock
from sepsaddle.matrices import BlockPartition, DenseCoupling, DenseMatrix
from sepsaddle.problems import (
    SepCCSPInstance,
    gen_group_lasso,
    gen_lasso,
    make_group_lasso_hinge,
    make_lasso,
    make_rpca,
)
from sepsaddle.spbcd import (
    StepsizeConfig,
    compute_sigma_t,
    dual_step,
    extrapolate,
    initial_state,
    iterate,
    iterations_per_pass,
    primal_block_step,
    rbar_drift,
    run,
    sample_blocks,
    update_rbar,
)
from sepsaddle.verify import prox_oracle, resolvent_oracle


def hand_instance():
    """2x2 lasso used for the hand-executed trace."""
    return make_lasso(np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([1.0, -1.0]), 0.1)


class TestSampleBlocks:
    def test_full_set(self, rng):
        for _ in range(5):
            assert np.array_equal(sample_blocks(rng, 4, 4), [0, 1, 2, 3])

    def test_sorted_and_distinct(self, rng):
        for _ in range(100):
            s = sample_blocks(rng, 10, 4)
            assert np.all(np.diff(s) > 0)

    def test_marginal_frequencies(self):
        rng = np.random.Generator(np.random.PCG64(7))
        counts = np.zeros(3)
        draws = 30_000
        for _ in range(draws):
            counts[sample_blocks(rng, 3, 1)[0]] += 1
        assert np.all(np.abs(counts / draws - 1 / 3) <= 0.01)

    def test_same_seed_same_sequence(self):
        a = np.random.Generator(np.random.PCG64(5))
        b = np.random.Generator(np.random.PCG64(5))
        for _ in range(50):
            assert np.array_equal(sample_blocks(a, 7, 3), sample_blocks(b, 7, 3))

    def test_rejects_bad_K(self, rng):
        with pytest.raises(ValueError):
            sample_blocks(rng, 3, 4)
        with pytest.raises(ValueError):
            sample_blocks(rng, 3, 0)


class TestStepsizeConfig:
    def test_theta_is_K_over_J(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=5)
        assert config.theta == 5 / small_lasso.num_blocks

    def test_adaptive_h_is_column_sums(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=3)
        assert np.allclose(config.h, small_lasso.coupling.col_abs_sums)

    def test_block_spectral_h_is_blockwise_norms(self, rng):
        A = rng.standard_normal((4, 6))
        inst = SepCCSPInstance(
            coupling=DenseCoupling(DenseMatrix(A), BlockPartition([2, 2, 2])),
            block_fns=(ZeroBlock(),) * 3,
            dual_fn=QuadraticDual(np.zeros(4)),
            primal_objective=lambda x: 0.0,
            residual_kind="suboptimality",
        )
        config = StepsizeConfig.for_instance(inst, K=2, rule="block-spectral")
        for j in range(3):
            exact = np.linalg.svd(A[:, 2 * j:2 * j + 2], compute_uv=False)[0]
            assert np.allclose(config.h[2 * j:2 * j + 2], exact, rtol=1e-8)

    def test_zero_column_floored_with_warning(self):
        A = np.array([[1.0, 0.0], [2.0, 0.0]])
        inst = make_lasso(A, np.zeros(2), 0.5)
        with pytest.warns(RuntimeWarning, match="floored"):
            config = StepsizeConfig.for_instance(inst, K=2)
        assert config.h[1] == pytest.approx(1e-10)

    def test_group_blocks_get_uniform_h(self):
        features, labels, spec = gen_group_lasso(seed=0, n_samples=30)
        inst = make_group_lasso_hinge(features, labels, spec, 0.1)
        config = StepsizeConfig.for_instance(inst, K=3)
        for g in range(inst.num_blocks):
            sl = inst.block_slice(g)
            assert np.all(config.h[sl] == config.h[sl][0])
            assert config.h[sl][0] == pytest.approx(
                inst.coupling.col_abs_sums[sl].max())

    def test_rejects_bad_rule_and_K(self, small_lasso):
        with pytest.raises(ConfigError):
            StepsizeConfig.for_instance(small_lasso, K=0)
        with pytest.raises(ConfigError):
            StepsizeConfig.for_instance(small_lasso, K=1, rule="spectral")


class TestComputeSigmaT:
    def test_identity_stack_is_J(self, rng):
        inst = make_rpca(rng.standard_normal((3, 4)), 0.1, 0.1)
        for K, blocks in ((1, [2]), (2, [0, 2]), (3, [0, 1, 2])):
            sigma = compute_sigma_t(inst.coupling, blocks, K, 3)
            assert np.allclose(sigma, 3.0)

    def test_hand_example(self):
        A = DenseMatrix([[1.0, -2.0, 0.0], [0.0, 3.0, 1.0]])
        coupling = DenseCoupling(A, BlockPartition.singletons(3))
        sigma = compute_sigma_t(coupling, [0, 2], K=2, J=3)
        assert np.allclose(sigma, [1.5, 1.5])

    def test_zero_columns_hit_floor(self):
        A = DenseMatrix([[1.0, 0.0], [1.0, 0.0]])
        coupling = DenseCoupling(A, BlockPartition.singletons(2))
        sigma = compute_sigma_t(coupling, [1], K=1, J=2)
        assert np.allclose(sigma, 1e-10)

    def test_block_spectral_uses_selected_norm_sum(self, rng):
        A = rng.standard_normal((4, 6))
        coupling = DenseCoupling(DenseMatrix(A), BlockPartition([2, 2, 2]))
        sigma = compute_sigma_t(coupling, [0, 2], K=2, J=3, rule="block-spectral")
        expected = (3 / 2) * sum(
            np.linalg.svd(A[:, c:c + 2], compute_uv=False)[0] for c in (0, 4))
        assert np.allclose(sigma, expected, rtol=1e-8)


class TestPrimalBlockStep:
    def test_zero_function_gives_linear_step(self, rng):
        A = rng.standard_normal((3, 4))
        inst = SepCCSPInstance(
            coupling=DenseCoupling(DenseMatrix(A), BlockPartition([2, 2])),
            block_fns=(ZeroBlock(), ZeroBlock()),
            dual_fn=QuadraticDual(np.zeros(3)),
            primal_objective=lambda x: 0.0,
            residual_kind="suboptimality",
        )
        state = initial_state(inst, x0=rng.standard_normal(4),
                              y0=rng.standard_normal(3))
        h = np.array([2.0, 3.0])
        out = primal_block_step(inst, state, 1, h)
        expected = state.x[2:] - (A[:, 2:].T @ state.y) / h
        assert np.allclose(out, expected, atol=1e-14)

    def test_zero_dual_is_plain_shrink(self, small_lasso):
        state = initial_state(small_lasso,
                              x0=np.linspace(-1, 1, small_lasso.n))
        config = StepsizeConfig.for_instance(small_lasso, K=small_lasso.n)
        lam = small_lasso.meta["lam"]
        for j in (0, 3, 19):
            h = config.h[small_lasso.block_slice(j)]
            out = primal_block_step(small_lasso, state, j, h)
            x_j = state.x[small_lasso.block_slice(j)]
            expected = np.sign(x_j) * np.maximum(np.abs(x_j) - lam / h, 0)
            assert np.allclose(out, expected, atol=1e-15)

    def test_matches_numeric_oracle(self, small_lasso, rng):
        state = initial_state(small_lasso, x0=rng.standard_normal(small_lasso.n),
                              y0=rng.standard_normal(small_lasso.m))
        config = StepsizeConfig.for_instance(small_lasso, K=small_lasso.n)
        lam = small_lasso.meta["lam"]
        for j in (1, 7, 12):
            sl = small_lasso.block_slice(j)
            h = config.h[sl]
            out = primal_block_step(small_lasso, state, j, h)
            a_j = small_lasso.coupling.block(j)

            def subproblem(xj, j=j, sl=sl):
                return (lam * np.abs(xj).sum()
                        + float(state.y @ (a_j @ xj))
                        + 0.5 * float((xj - state.x[sl]) ** 2 @ h))

            ref = prox_oracle(subproblem, state.x[sl], 0.0)
            # metric folded into the subproblem; oracle sees the full objective
            assert np.allclose(out, ref, atol=1e-8)


class TestExtrapolate:
    def test_fixed_point(self, rng):
        v = rng.standard_normal(3)
        assert np.array_equal(extrapolate(v, v, 0.7), v)

    def test_doubling(self, rng):
        v = rng.standard_normal(3)
        assert np.allclose(extrapolate(v, np.zeros(3), 1.0), 2 * v)

    def test_third(self):
        assert extrapolate(np.array([6.0]), np.array([3.0]), 1 / 3)[0] == 7.0


class TestDualStep:
    def test_rpca_stationary(self, rng):
        B = rng.standard_normal((3, 4))
        inst = make_rpca(B, 0.1, 0.1)
        x = np.concatenate([B.ravel(), np.zeros(B.size), np.zeros(B.size)])
        state = initial_state(inst, x0=x, y0=rng.standard_normal(B.size))
        assert np.allclose(state.r_bar, B.ravel())
        sigma = compute_sigma_t(inst.coupling, [0], 1, 3)
        out = dual_step(inst, state, [0], sigma, np.zeros(inst.m))
        assert np.allclose(out, state.y, atol=1e-14)

    def test_matches_resolvent_oracle(self, rng):
        inst = make_lasso(rng.standard_normal((2, 3)), rng.standard_normal(2), 0.2)
        state = initial_state(inst, x0=rng.standard_normal(3),
                              y0=rng.standard_normal(2))
        blocks = [0, 2]
        sigma = compute_sigma_t(inst.coupling, blocks, 2, 3)
        delta = rng.standard_normal(2) * 0.1
        out = dual_step(inst, state, blocks, sigma, delta)
        u = state.r_bar + (3 / 2) * delta
        ref = resolvent_oracle(inst.dual_fn, state.y, u, sigma)
        assert np.allclose(out, ref, atol=1e-8)

    def test_hinge_output_in_box(self, rng):
        features, labels, spec = gen_group_lasso(seed=1, n_samples=20)
        inst = make_group_lasso_hinge(features, labels, spec, 0.05)
        state = initial_state(inst, y0=rng.uniform(0, 1, inst.m))
        blocks = [0, 5, 62]
        sigma = compute_sigma_t(inst.coupling, blocks, 3, 63)
        out = dual_step(inst, state, blocks, sigma, rng.standard_normal(inst.m))
        assert np.all(out >= 0) and np.all(out <= 1)


class TestUpdateRbar:
    def test_no_deltas_no_change(self, small_lasso, rng):
        state = initial_state(small_lasso, x0=rng.standard_normal(small_lasso.n))
        before = state.r_bar.copy()
        update_rbar(state, {})
        assert np.array_equal(state.r_bar, before)

    def test_recompute_after_random_run(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=4)
        state, _ = run(small_lasso, config, pass_budget=40, seed=3)
        assert rbar_drift(small_lasso, state) <= 1e-10

    def test_full_sweep_equals_fresh_matvec(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=small_lasso.num_blocks)
        state, _ = run(small_lasso, config, pass_budget=20, seed=0)
        fresh = small_lasso.coupling.matvec(state.x_bar)
        denom = 1.0 + np.linalg.norm(fresh)
        assert np.linalg.norm(state.r_bar - fresh) / denom <= 1e-12


class TestIterate:
    def test_hand_executed_trace(self):
        """Two full iterations on the 2x2 problem, checked against the
        hand-derived constants (h = (1,3), sigma = (3,1), theta = 1)."""
        inst = hand_instance()
        config = StepsizeConfig.for_instance(inst, K=2)
        assert np.allclose(config.h, [1.0, 3.0])
        state = initial_state(inst)
        rng = np.random.Generator(np.random.PCG64(0))

        iterate(inst, state, config, rng)
        assert np.allclose(state.x, [0.0, 0.0], atol=1e-15)
        assert np.allclose(state.y, [-0.25, 0.5], atol=1e-15)
        assert np.allclose(state.r_bar, [0.0, 0.0], atol=1e-15)

        iterate(inst, state, config, rng)
        assert np.allclose(state.x, [0.15, 0.0], atol=1e-12)
        assert np.allclose(state.x_bar, [0.30, 0.0], atol=1e-12)
        assert np.allclose(state.y, [-0.3625, 0.75], atol=1e-12)
        assert np.allclose(state.r_bar, [0.30, 0.0], atol=1e-12)

    def test_sigma_override_matches_manual(self):
        inst = hand_instance()
        config = StepsizeConfig.for_instance(inst, K=2, sigma_override=2.0)
        state = initial_state(inst)
        rng = np.random.Generator(np.random.PCG64(0))
        iterate(inst, state, config, rng)
        # y = (2*0 + 0 - b) / (2 + 1)
        assert np.allclose(state.y, [-1 / 3, 1 / 3], atol=1e-15)

    def test_rejects_nan_state(self, small_lasso, rng):
        config = StepsizeConfig.for_instance(small_lasso, K=2)
        state = initial_state(small_lasso)
        state.x[0] = np.nan
        with pytest.raises(NumericsError, match="non-finite"):
            iterate(small_lasso, state, config, rng)

    def test_full_selection_matches_preconditioned_twin(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=small_lasso.num_blocks)
        state, _ = run(small_lasso, config, pass_budget=100, seed=5)
        twin, _ = preconditioned_pdcp_run(small_lasso, passes=100)
        assert np.abs(state.x - twin.x).max() <= 1e-12
        assert np.abs(state.y - twin.y).max() <= 1e-12


class TestRun:
    def test_rejects_zero_budget(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=2)
        with pytest.raises(ValueError):
            run(small_lasso, config, pass_budget=0)

    def test_pass_accounting(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=3)
        state, trace = run(small_lasso, config, pass_budget=4,
                           metric_callback=lambda p, s, t: p)
        assert trace == [1, 2, 3, 4]
        assert state.t == 4 * iterations_per_pass(small_lasso.num_blocks, 3)

    def test_callback_failure_aborts_with_partial_trace(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=2)

        def callback(p, state, secs):
            if p == 3:
                raise RuntimeError("boom")
            return p

        with pytest.raises(RunAborted) as excinfo:
            run(small_lasso, config, pass_budget=5, metric_callback=callback)
        assert excinfo.value.trace == [1, 2]

    def test_objective_decreases_on_lasso(self, small_lasso):
        config = StepsizeConfig.for_instance(small_lasso, K=5)
        _, trace = run(small_lasso, config, pass_budget=30,
                       metric_callback=lambda p, s, t: small_lasso.objective(s.x))
        assert trace[-1] < trace[0]

    @pytest.mark.parametrize("workers", [2, 3])
    def test_worker_count_does_not_change_iterates(self, workers):
        A, b, lam = gen_lasso(8, 12, 3, seed=21)
        inst = make_lasso(A, b, lam)
        config = StepsizeConfig.for_instance(inst, K=5)
        ref_state, ref_trace = run(
            inst, config, pass_budget=10, seed=9,
            metric_callback=lambda p, s, t: (s.x.copy(), s.y.copy()))
        state, trace = run(
            inst, config, pass_budget=10, seed=9, workers=workers,
            metric_callback=lambda p, s, t: (s.x.copy(), s.y.copy()))
        for (x1, y1), (x2, y2) in zip(ref_trace, trace):
            assert np.array_equal(x1, x2)
            assert np.array_equal(y1, y2)

    def test_group_lasso_dual_stays_in_box(self):
        features, labels, spec = gen_group_lasso(seed=2, n_samples=40)
        inst = make_group_lasso_hinge(features, labels, spec, 0.02)
        config = StepsizeConfig.for_instance(inst, K=7)

        def check(p, state, secs):
            assert np.all(state.y >= 0.0) and np.all(state.y <= 1.0)
            return p

        run(inst, config, pass_budget=5, metric_callback=check, seed=1)
