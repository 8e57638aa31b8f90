import numpy as np
import pytest

import copulavar as cv
from copulavar.errors import CopulaVarError, NumericalError
from copulavar.pcdag import Cpdag


class TestStructureH:
    def test_v_structure_matches_displayed_matrix(self):
        np.testing.assert_array_equal(
            cv.structure_h("v_structure"), [[1, 0, 0], [0, 1, 0], [1, 1, 1]]
        )

    def test_chain_cumulative_causation(self):
        h = cv.structure_h("chain")
        np.testing.assert_array_equal(h, [[1, 0, 0], [1, 1, 0], [1, 1, 1]])

    def test_common_cause_center_node(self):
        h = cv.structure_h("common_cause")
        np.testing.assert_array_equal(h, [[1, 1, 0], [0, 1, 0], [0, 1, 1]])

    def test_identity_structure(self):
        np.testing.assert_array_equal(cv.structure_h("identity"), np.eye(3))

    def test_diamonds_unit_diagonal_full_rank(self):
        for s in ("diamond1", "diamond2"):
            h = cv.structure_h(s)
            assert h.shape == (4, 4)
            np.testing.assert_array_equal(np.diag(h), np.ones(4))
            assert abs(np.linalg.det(h)) == pytest.approx(1.0)

    def test_unknown_structure(self):
        with pytest.raises(CopulaVarError):
            cv.structure_h("pentagon")


class TestLyapunov:
    def test_zero_a_returns_sigma(self):
        sigma = np.diag([1.0, 2.0])
        np.testing.assert_allclose(
            cv.lyapunov_variance(np.zeros((2, 2)), sigma), sigma
        )

    def test_scalar_geometric_series(self):
        gamma = cv.lyapunov_variance(np.array([[0.5]]), np.array([[2.0]]))
        assert gamma[0, 0] == pytest.approx(2.0 / (1 - 0.25))

    def test_truncated_series_oracle(self):
        rng = np.random.default_rng(4)
        a = 0.5 * rng.standard_normal((3, 3))
        a *= 0.9 / max(1e-9, np.max(np.abs(np.linalg.eigvals(a))))
        m = rng.standard_normal((3, 5))
        sigma = m @ m.T / 5 + 0.2 * np.eye(3)
        gamma = cv.lyapunov_variance(a, sigma)
        series = np.zeros((3, 3))
        power = np.eye(3)
        for _ in range(200):
            series += power @ sigma @ power.T
            power = a @ power
        np.testing.assert_allclose(gamma, series, atol=1e-8)

    def test_unstable_rejected(self):
        with pytest.raises(NumericalError, match="unstable"):
            cv.lyapunov_variance(np.eye(2), np.eye(2))

    def test_triangular_design_with_large_singular_value_accepted(self):
        # spectral radius 0.75 although the top singular value exceeds 1
        a = 0.75 * np.tril(np.ones((3, 3)))
        assert np.linalg.norm(a, 2) > 1.0
        gamma = cv.lyapunov_variance(a, np.eye(3))
        assert np.min(np.linalg.eigvalsh(gamma)) > 0


class TestGenerate:
    def test_zero_persistence(self):
        design = cv.SimDesign("v_structure", 0.0, 2, 4000, seed=1)
        panel, truth = cv.generate_cluster_var(design)
        np.testing.assert_array_equal(truth.a_true, np.zeros((6, 6)))
        assert np.all(np.abs(panel.values.var(axis=0, ddof=1) - 1) < 3 / np.sqrt(4000) * 3)

    def test_single_cluster_truth_oracle(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 1000, seed=2)
        _, truth = cv.generate_cluster_var(design)
        # dense-inverse oracle for the contemporaneous precision
        np.testing.assert_allclose(
            truth.theta11_true, np.linalg.inv(truth.sigma_eps_true), atol=1e-10
        )
        # the moral graph of the v-structure marries the parents: all six
        # off-diagonal entries are nonzero
        off = np.abs(truth.theta11_true[~np.eye(3, dtype=bool)])
        assert np.all(off > 1e-8)

    def test_variance_standardization_low_persistence(self):
        design = cv.SimDesign("v_structure", 0.25, 2, 5000, seed=30)
        panel, _ = cv.generate_cluster_var(design)
        assert np.all(np.abs(panel.values.var(axis=0, ddof=1) - 1) < 5 / np.sqrt(5000))

    def test_variance_standardization_high_persistence(self):
        # autocorrelation inflates the sampling noise of the variance, so
        # the bound carries a dependence factor
        design = cv.SimDesign("v_structure", 0.75, 2, 8000, seed=3)
        panel, _ = cv.generate_cluster_var(design)
        assert np.all(
            np.abs(panel.values.var(axis=0, ddof=1) - 1) < 3 * 5 / np.sqrt(8000)
        )

    def test_eq2_consistency(self):
        design = cv.SimDesign("diamond1", 0.5, 2, 500, seed=4)
        _, truth = cv.generate_cluster_var(design)
        lhs = truth.gamma_true - truth.a_true @ truth.gamma_true @ truth.a_true.T
        np.testing.assert_allclose(lhs, truth.sigma_eps_true, atol=1e-8)

    def test_seed_reproducibility(self):
        design = cv.SimDesign("chain", 0.25, 1, 200, seed=5)
        p1, _ = cv.generate_cluster_var(design)
        p2, _ = cv.generate_cluster_var(design)
        np.testing.assert_array_equal(p1.values, p2.values)

    def test_monotone_hook_changes_values_not_truth(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 300, seed=6)
        p1, t1 = cv.generate_cluster_var(design)
        p2, t2 = cv.generate_cluster_var(design, transform=np.exp)
        np.testing.assert_array_equal(np.exp(p1.values), p2.values)
        np.testing.assert_array_equal(t1.sigma_eps_true, t2.sigma_eps_true)


class TestReferenceCpdag:
    def test_v_structure_directed(self):
        ref = cv.reference_cpdag("v_structure")
        assert ref.directed == {(0, 2), (1, 2)}
        assert ref.undirected == set()

    def test_chain_undirected(self):
        ref = cv.reference_cpdag("chain")
        assert ref.directed == set()
        assert ref.undirected == {(0, 1), (1, 2)}

    def test_chain_equals_common_cause(self):
        assert cv.shd(cv.reference_cpdag("chain"), cv.reference_cpdag("common_cause")) == 0

    def test_block_replication(self):
        ref = cv.reference_cpdag("v_structure", n_clusters=2)
        assert ref.directed == {(0, 2), (1, 2), (3, 5), (4, 5)}


class TestShd:
    def test_identical_graphs(self):
        g = cv.reference_cpdag("diamond1")
        assert cv.shd(g, g) == 0

    def test_one_extra_undirected_edge(self):
        g1 = Cpdag(("a", "b", "c"))
        g2 = Cpdag(("a", "b", "c"))
        g2.undirected.add((0, 1))
        assert cv.shd(g1, g2) == 1

    def test_direction_mismatch_counts_one(self):
        g1 = Cpdag(("a", "b"))
        g1.directed.add((0, 1))
        g2 = Cpdag(("a", "b"))
        g2.undirected.add((0, 1))
        assert cv.shd(g1, g2) == 1
        g3 = Cpdag(("a", "b"))
        g3.directed.add((1, 0))
        assert cv.shd(g1, g3) == 1

    def test_node_mismatch_rejected(self):
        with pytest.raises(CopulaVarError):
            cv.shd(Cpdag(("a", "b")), Cpdag(("a", "c")))

    @staticmethod
    def random_graph(rng, k=4):
        g = Cpdag(tuple(f"n{i}" for i in range(k)))
        for i in range(k):
            for j in range(i + 1, k):
                kind = rng.integers(0, 4)
                if kind == 1:
                    g.undirected.add((i, j))
                elif kind == 2:
                    g.directed.add((i, j))
                elif kind == 3:
                    g.directed.add((j, i))
        return g

    def test_metric_properties_on_random_triples(self):
        rng = np.random.default_rng(8)
        for _ in range(40):
            g1, g2, g3 = (self.random_graph(rng) for _ in range(3))
            assert cv.shd(g1, g2) == cv.shd(g2, g1)
            assert (cv.shd(g1, g2) == 0) == (
                g1.directed == g2.directed and g1.undirected == g2.undirected
            )
            assert cv.shd(g1, g3) <= cv.shd(g1, g2) + cv.shd(g2, g3)


class TestSupportConfusion:
    def test_exact_match(self):
        truth = np.array([[2.0, 0.5], [0.5, 2.0]])
        assert cv.support_confusion(truth, truth) == (2, 0, 0)

    def test_dense_estimate_against_v_structure_truth(self):
        design = cv.SimDesign("v_structure", 0.25, 3, 1000, seed=9)
        _, truth = cv.generate_cluster_var(design)
        dense = np.ones((9, 9))
        tp_fp, fp, fn = cv.support_confusion(dense, truth.theta11_true)
        assert (tp_fp, fp, fn) == (72, 54, 0)

    def test_zero_estimate(self):
        design = cv.SimDesign("v_structure", 0.25, 3, 1000, seed=10)
        _, truth = cv.generate_cluster_var(design)
        tp_fp, fp, fn = cv.support_confusion(np.zeros((9, 9)), truth.theta11_true)
        assert (tp_fp, fp, fn) == (0, 0, 18)


class TestRunBenchmark:
    def test_single_rep_deterministic(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 1000, seed=11)
        r1 = cv.run_benchmark(design, reps=1, policy=0.05)
        r2 = cv.run_benchmark(design, reps=1, policy=0.05)
        assert r1.means == r2.means
        assert r1.policy == "fixed:0.05"

    def test_lambda_zero_policy_dense_confusion(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 1500, seed=12)
        row = cv.run_benchmark(design, reps=2, policy="lambda=0")
        assert row.means["tp_fp"] == pytest.approx(6.0)
        assert row.means["fp"] == pytest.approx(0.0)

    def test_a_zero_policy_reports_shd_only(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 1000, seed=13)
        row = cv.run_benchmark(design, reps=1, policy="A=0")
        assert np.isnan(row.means["dist_a"])
        assert row.means["shd"] >= 0

    def test_unknown_policy_rejected(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 1000, seed=14)
        with pytest.raises(CopulaVarError):
            cv.run_benchmark(design, reps=1, policy="bogus")

    def test_cv_presample_fixes_penalty_across_reps(self):
        design = cv.SimDesign("v_structure", 0.25, 1, 1200, seed=15)
        row = cv.run_benchmark(design, reps=2, policy="cv", cv_presample=True)
        lams = {r["lam"] for r in row.per_rep}
        assert len(lams) == 1
