import numpy as np
import pytest

import copulavar as cv
from copulavar.errors import CopulaVarError, NumericalError
from copulavar.precision import SparsePrecision, SupportPattern
from copulavar.scaling import ScalingMatrix
from copulavar.tuning import CvPlan


def full_precision(theta):
    theta = np.asarray(theta, dtype=float)
    d = theta.shape[0]
    return SparsePrecision(theta, SupportPattern(np.ones((d, d), bool), "lasso"), d)


def white_noise_panel(n=1500, k=4, seed=0):
    rng = np.random.default_rng(seed)
    return cv.Panel(rng.standard_normal((n, k)), [f"v{i}" for i in range(k)])


class TestCvScore:
    def test_identity_scores_dimension(self):
        sig = ScalingMatrix(np.eye(4), 0, 4)
        assert cv.cv_score(full_precision(np.eye(4)), sig) == pytest.approx(4.0)

    def test_inverse_scores_dim_plus_logdet(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((4, 8))
        spd = m @ m.T / 8 + 0.3 * np.eye(4)
        sig = ScalingMatrix(spd, 0, 4)
        theta = full_precision(np.linalg.inv(spd))
        expected = 4.0 + np.linalg.slogdet(spd)[1]
        assert cv.cv_score(theta, sig) == pytest.approx(expected)

    def test_scaling_identity_at_c_two(self):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((4, 9))
        spd = m @ m.T / 9 + 0.4 * np.eye(4)
        sig = ScalingMatrix(spd, 0, 4)
        theta = np.linalg.inv(spd) + 0.1 * np.eye(4)
        base = cv.cv_score(full_precision(theta), sig)
        doubled = cv.cv_score(full_precision(2.0 * theta), sig)
        trace_term = np.trace(spd @ theta)
        assert doubled - base == pytest.approx(trace_term - 4.0 * np.log(2.0))

    def test_nonpositive_definite_rejected(self):
        sig = ScalingMatrix(np.eye(3), 0, 3)
        bad = np.diag([1.0, 1.0, -0.5])
        with pytest.raises(NumericalError, match="invalid precision"):
            cv.cv_score(full_precision(bad), sig)

    def test_minimized_by_inverse_under_perturbation(self):
        # strict convexity: any perturbation of the inverse scores worse
        rng = np.random.default_rng(3)
        m = rng.standard_normal((4, 10))
        spd = m @ m.T / 10 + 0.3 * np.eye(4)
        sig = ScalingMatrix(spd, 0, 4)
        best = cv.cv_score(full_precision(np.linalg.inv(spd)), sig)
        for trial in range(8):
            bump = rng.standard_normal((4, 4)) * 0.05
            bump = (bump + bump.T) / 2
            perturbed = np.linalg.inv(spd) + bump
            if np.min(np.linalg.eigvalsh(perturbed)) <= 0:
                continue
            assert cv.cv_score(full_precision(perturbed), sig) > best


class TestLambdaZeroSearch:
    def test_white_noise_small_anchor(self):
        lam0 = cv.lambda_zero_search(white_noise_panel())
        assert lam0 <= 0.10

    def test_persistent_design_needs_larger_anchor(self):
        design = cv.SimDesign("v_structure", 0.75, 1, 1500, seed=2)
        panel, _ = cv.generate_cluster_var(design)
        lam_persistent = cv.lambda_zero_search(panel)
        lam_noise = cv.lambda_zero_search(white_noise_panel(seed=5))
        assert lam_persistent > lam_noise

    def test_deterministic(self):
        panel = white_noise_panel(seed=9)
        assert cv.lambda_zero_search(panel) == cv.lambda_zero_search(panel)

    def test_anchor_empties_but_half_does_not(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 2000, seed=4)
        panel, _ = cv.generate_cluster_var(design)
        lam0 = cv.lambda_zero_search(panel)
        sigma = cv.psd_repair(cv.scaling_matrix(cv.build_lagged(panel, 1)))

        def offdiag_max(lam):
            theta = cv.estimate_precision(sigma, "lasso", lam=lam, tau=2 * lam)
            block = np.abs(theta.theta11.copy())
            np.fill_diagonal(block, 0.0)
            return block.max()

        assert offdiag_max(lam0) < 1e-6
        assert offdiag_max(lam0 / 2) >= 1e-6


class TestCrossValidate:
    def test_single_element_grid(self):
        panel = white_noise_panel(n=600, seed=7)
        result = cv.cross_validate(panel, plan=CvPlan(lambda_grid=(0.05,)))
        assert result.lambda_star == 0.05
        assert result.tau_star == 0.1

    def test_grid_follows_halving_rule(self):
        panel = white_noise_panel(n=900, seed=8)
        result = cv.cross_validate(panel)
        lam0 = result.lambda_zero
        expected = tuple(lam0 / 2 ** (j + 1) for j in range(5))
        assert result.grid == expected

    def test_lambda_star_in_grid_and_tau_rule(self):
        panel = white_noise_panel(n=900, seed=10)
        result = cv.cross_validate(panel)
        assert result.lambda_star in result.grid
        assert result.tau_star == 2 * result.lambda_star

    def test_mean_is_fold_order_invariant(self):
        panel = white_noise_panel(n=900, seed=11)
        result = cv.cross_validate(panel)
        shuffled = result.fold_scores[::-1]
        np.testing.assert_allclose(
            shuffled.mean(axis=0), np.array(result.mean_scores)
        )

    def test_deterministic(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 1200, seed=13)
        panel, _ = cv.generate_cluster_var(design)
        r1 = cv.cross_validate(panel)
        r2 = cv.cross_validate(panel)
        assert r1.lambda_star == r2.lambda_star
        np.testing.assert_array_equal(r1.fold_scores, r2.fold_scores)

    def test_fold_too_small(self):
        panel = white_noise_panel(n=30, seed=1)
        with pytest.raises(CopulaVarError, match="fold too small"):
            cv.cross_validate(panel, plan=CvPlan(n_folds=8))

    def test_recovers_support_at_selected_penalty(self):
        # the paper-scale design: selected penalty reproduces the exact
        # support of the contemporaneous precision block
        design = cv.SimDesign("v_structure", 0.25, 3, 5000, seed=17)
        panel, truth = cv.generate_cluster_var(design)
        result = cv.cross_validate(panel)
        sigma = cv.psd_repair(cv.scaling_matrix(cv.build_lagged(panel, 1)))
        theta = cv.estimate_precision(
            sigma, "lasso", lam=result.lambda_star, tau=result.tau_star
        )
        tp_fp, fp, fn = cv.support_confusion(theta.theta11, truth.theta11_true)
        assert fp == 0
        assert fn == 0
        assert tp_fp == 18


class TestAicLagOrder:
    def test_white_noise_selects_one(self):
        hits = 0
        for seed in range(8):
            panel = white_noise_panel(n=2000, k=3, seed=3000 + seed)
            hits += cv.aic_lag_order(panel, 3, lam=0.0).p == 1
        assert hits >= 6

    def test_var1_modal_choice_is_one(self):
        picks = []
        for seed in range(6):
            design = cv.SimDesign("v_structure", 0.5, 1, 5000, seed=1000 + seed)
            panel, _ = cv.generate_cluster_var(design)
            picks.append(cv.aic_lag_order(panel, 3, lam=0.0).p)
        assert sum(p == 1 for p in picks) >= 4
        assert max(set(picks), key=picks.count) == 1

    def test_var2_selects_two(self):
        hits = 0
        for seed in range(8):
            rng = np.random.default_rng(2000 + seed)
            z = np.zeros((2700, 3))
            for t in range(2, 2700):
                z[t] = 0.3 * z[t - 1] + 0.4 * z[t - 2] + rng.standard_normal(3)
            panel = cv.Panel(z[200:], ["a", "b", "c"])
            hits += cv.aic_lag_order(panel, 3, lam=0.0).p == 2
        assert hits >= 7

    def test_table_shape_and_penalty_accounting(self):
        panel = white_noise_panel(n=800, k=3, seed=21)
        result = cv.aic_lag_order(panel, 2, lam=0.0)
        assert len(result.table) == 2
        for p, logdet, nonzeros, aic in result.table:
            # dense path: the cross-lag strip is fully selected
            assert nonzeros == 9 * p
            assert aic == pytest.approx(800 * logdet + 2 * nonzeros)

    def test_pmax_validation(self):
        with pytest.raises(CopulaVarError):
            cv.aic_lag_order(white_noise_panel(), 0)
