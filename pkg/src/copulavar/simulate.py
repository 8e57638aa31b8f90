"""Cluster-structured Gaussian-copula VAR generator and benchmark metrics.

The generator builds independent clusters of a small recursive system,
stacks them block diagonally, and standardizes each coordinate with its
exact stationary standard deviation so the emitted series has unit
variance by construction.  The ground truth (autoregressive matrix,
innovation covariance and its inverse, and the reference equivalence
class of the causal structure) is carried alongside the sample, which is
what makes the benchmark metrics exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from .errors import CopulaVarError, NumericalError
from .pcdag import Cpdag, PcConfig, discover_cpdag, fixed_gaps_from_support
from .precision import estimate_precision, var_params
from .scaling import Panel, build_lagged, psd_repair, scaling_matrix

STRUCTURES = ("chain", "common_cause", "v_structure", "diamond1", "diamond2")

# Reference significance level: with the plug-in sample size below, only
# an exactly zero partial correlation passes the deletion test, so the PC
# run on an analytic covariance is deterministic.
REFERENCE_ALPHA = 1.0 - 1e-13
REFERENCE_N = 10**6


def _structure_parents(structure: str) -> tuple[int, list[tuple[int, int]]]:
    """Node count and directed edge list (tail, head) of each design."""
    if structure == "chain":
        return 3, [(0, 1), (1, 2)]
    if structure == "common_cause":
        return 3, [(1, 0), (1, 2)]
    if structure == "v_structure":
        return 3, [(0, 2), (1, 2)]
    if structure == "diamond1":
        return 4, [(0, 1), (2, 1), (0, 3), (2, 3)]
    if structure == "diamond2":
        return 4, [(0, 1), (2, 1), (1, 3)]
    if structure == "identity":
        return 3, []
    raise CopulaVarError(f"unknown structure {structure!r}")


def structure_h(structure: str) -> np.ndarray:
    """Unit-diagonal pass-through matrix of the cluster, (I - D)^-1 for the
    unit-weight coefficient matrix D of the design's edges."""
    n, edges = _structure_parents(structure)
    d = np.zeros((n, n))
    for tail, head in edges:
        d[head, tail] = 1.0
    return np.linalg.inv(np.eye(n) - d)


def lyapunov_variance(a_mat: np.ndarray, sigma_eps: np.ndarray) -> np.ndarray:
    """Stationary variance solving gamma = a gamma a' + sigma_eps.

    Stationarity is gated on the spectral radius of the autoregressive
    matrix; that is the sharp condition for the equation to have a unique
    positive semidefinite solution (a singular-value bound would falsely
    reject stable triangular designs).
    """
    a_mat = np.asarray(a_mat, dtype=float)
    sigma_eps = np.asarray(sigma_eps, dtype=float)
    radius = np.max(np.abs(np.linalg.eigvals(a_mat))) if a_mat.size else 0.0
    if radius >= 1.0:
        raise NumericalError("unstable autoregression")
    gamma = solve_discrete_lyapunov(a_mat, sigma_eps)
    gamma = (gamma + gamma.T) / 2.0
    residual = np.max(np.abs(gamma - a_mat @ gamma @ a_mat.T - sigma_eps))
    if residual > 1e-10 * max(1.0, np.max(np.abs(sigma_eps))):
        raise NumericalError(f"lyapunov solve residual too large: {residual:.3e}")
    return gamma


@dataclass(frozen=True)
class SimDesign:
    structure: str
    a: float
    n_clusters: int
    n: int
    seed: int

    def __post_init__(self):
        if self.structure not in STRUCTURES and self.structure != "identity":
            raise CopulaVarError(f"unknown structure {self.structure!r}")
        if not 0.0 <= self.a < 1.0:
            raise CopulaVarError("persistence must be in [0, 1)")
        if self.n_clusters < 1 or self.n < 8:
            raise CopulaVarError("degenerate simulation design")

    @property
    def cluster_size(self) -> int:
        return _structure_parents(self.structure)[0]

    @property
    def k(self) -> int:
        return self.cluster_size * self.n_clusters


@dataclass(frozen=True)
class SimTruth:
    a_true: np.ndarray
    sigma_eps_true: np.ndarray
    theta11_true: np.ndarray
    gamma_true: np.ndarray
    reference: Cpdag


def _block_diag(block: np.ndarray, copies: int) -> np.ndarray:
    n = block.shape[0]
    out = np.zeros((n * copies, n * copies))
    for c in range(copies):
        out[c * n : (c + 1) * n, c * n : (c + 1) * n] = block
    return out


def reference_cpdag(structure: str, n_clusters: int = 1, names=None) -> Cpdag:
    """Equivalence class the PC algorithm attains on the analytic cluster
    covariance with a near-deterministic significance level, replicated
    over the requested number of clusters."""
    h_tilde = structure_h(structure)
    sigma_eps = h_tilde @ h_tilde.T
    cluster = discover_cpdag(sigma_eps, REFERENCE_N, PcConfig(alpha=REFERENCE_ALPHA))
    n_block = h_tilde.shape[0]
    k = n_block * n_clusters
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(k))
    graph = Cpdag(tuple(names))
    for c in range(n_clusters):
        off = c * n_block
        for tail, head in cluster.directed:
            graph.directed.add((tail + off, head + off))
        for i, j in cluster.undirected:
            graph.undirected.add((i + off, j + off))
        for (i, j), sep in cluster.sepsets.items():
            graph.sepsets[(i + off, j + off)] = frozenset(s + off for s in sep)
    return graph


def generate_cluster_var(design: SimDesign, transform=None):
    """Simulate the design and return (panel, truth).

    Each cluster runs the recursion x_t = a_tilde x_{t-1} + h_tilde e_t
    from a stationary start plus 500 burn-in steps; the stacked system is
    rescaled by the exact inverse stationary standard deviations.  An
    optional strictly increasing ``transform`` is applied elementwise to
    the emitted panel (the truth is unchanged: everything downstream is
    rank-based).
    """
    n_block = design.cluster_size
    a_tilde = design.a * np.tril(np.ones((n_block, n_block)))
    h_tilde = structure_h(design.structure)
    gamma_x = lyapunov_variance(a_tilde, h_tilde @ h_tilde.T)

    rng = np.random.default_rng(design.seed)
    burn = 500
    copies = design.n_clusters
    chol = np.linalg.cholesky(gamma_x)
    state = rng.standard_normal((copies, n_block)) @ chol.T
    shocks = rng.standard_normal((burn + design.n, copies, n_block))
    rows = np.empty((design.n, copies, n_block))
    for t in range(burn + design.n):
        state = state @ a_tilde.T + shocks[t] @ h_tilde.T
        if t >= burn:
            rows[t - burn] = state
    x_full = rows.reshape(design.n, copies * n_block)

    inv_sd = 1.0 / np.sqrt(np.diag(gamma_x))
    s_full = np.tile(inv_sd, copies)
    z = x_full * s_full

    a_cluster = a_tilde * np.outer(inv_sd, 1.0 / inv_sd)
    sigma_cluster = (h_tilde @ h_tilde.T) * np.outer(inv_sd, inv_sd)
    theta_cluster = np.linalg.inv(sigma_cluster)
    gamma_cluster = gamma_x * np.outer(inv_sd, inv_sd)

    names = tuple(f"x{i + 1}" for i in range(design.k))
    truth = SimTruth(
        a_true=_block_diag(a_cluster, copies),
        sigma_eps_true=_block_diag(sigma_cluster, copies),
        theta11_true=_block_diag(theta_cluster, copies),
        gamma_true=_block_diag(gamma_cluster, copies),
        reference=reference_cpdag(design.structure, copies, names),
    )
    values = transform(z) if transform is not None else z
    return Panel(values, names), truth


def shd(g1: Cpdag, g2: Cpdag) -> int:
    """Structural Hamming distance: number of unordered pairs whose edge
    type (none / undirected / either direction) differs."""
    if g1.names != g2.names:
        raise CopulaVarError("graphs are defined on different node sets")
    k = g1.n_nodes
    count = 0
    for i in range(k):
        for j in range(i + 1, k):
            if g1.edge_type(i, j) != g2.edge_type(i, j):
                count += 1
    return count


def support_confusion(theta11_hat, theta11_true, tol: float = 1e-6):
    """Off-diagonal (tp_fp, fp, fn) entry counts between estimated and true
    contemporaneous precision blocks."""
    hat = np.asarray(theta11_hat, dtype=float)
    true = np.asarray(theta11_true, dtype=float)
    if hat.shape != true.shape:
        raise CopulaVarError("precision blocks have different shapes")
    off = ~np.eye(hat.shape[0], dtype=bool)
    est_nz = (np.abs(hat) > tol) & off
    true_nz = (np.abs(true) > tol) & off
    tp_fp = int(est_nz.sum())
    fp = int((est_nz & ~true_nz).sum())
    fn = int((~est_nz & true_nz).sum())
    return tp_fp, fp, fn


@dataclass
class BenchmarkRow:
    design: SimDesign
    method: str
    policy: str
    restricted: bool
    reps: int
    means: dict
    stderrs: dict
    per_rep: list = field(default_factory=list)


METRIC_KEYS = ("shd", "tp_fp", "fp", "fn", "dist_a", "dist_sigma")


def _operator_norm(mat: np.ndarray) -> float:
    return float(np.linalg.norm(mat, 2))


def _resolve_lambda(panel: Panel, method: str, policy: str, n_folds: int) -> float:
    from .tuning import CvPlan, cross_validate

    result = cross_validate(panel, method=method, plan=CvPlan(n_folds=n_folds))
    lam = result.lambda_star
    if policy == "cv/2":
        lam /= 2.0
    elif policy == "cv/4":
        lam /= 4.0
    return lam


def run_benchmark(
    design: SimDesign,
    method: str = "lasso",
    reps: int = 50,
    policy: str = "cv",
    restricted: bool = True,
    alpha: float | None = None,
    n_folds: int = 5,
    cv_presample: bool = False,
) -> BenchmarkRow:
    """Replicate generate -> estimate -> PC -> metrics and aggregate.

    ``policy`` is one of "cv", "cv/2", "cv/4", "lambda=0" (dense, no
    sparsity), "A=0" (PC straight on the observed panel, skipping the VAR
    step), or a number for a fixed penalty.  With ``cv_presample`` the
    penalty is cross-validated once on two extra samples of the same
    design and the average reused for every replication, instead of
    cross-validating inside each replication.

    When ``alpha`` is omitted the PC test level is 0.01 for up to 30
    variables and 0.001 above that: the number of pairwise tests grows
    quadratically with dimension, and high dimensional PC studies scale
    the level down accordingly.
    """
    if alpha is None:
        alpha = 0.01 if design.k <= 30 else 0.001
    known = ("cv", "cv/2", "cv/4", "lambda=0", "A=0")
    fixed_lam = None
    if isinstance(policy, (int, float)):
        fixed_lam = float(policy)
        policy = f"fixed:{fixed_lam:g}"
    elif policy not in known:
        raise CopulaVarError(f"unknown penalty policy {policy!r}")

    if cv_presample and policy.startswith("cv"):
        lams = []
        for extra in range(2):
            pre_design = SimDesign(
                design.structure,
                design.a,
                design.n_clusters,
                design.n,
                design.seed + 900_000 + extra,
            )
            pre_panel, _ = generate_cluster_var(pre_design)
            lams.append(_resolve_lambda(pre_panel, method, policy, n_folds))
        fixed_lam = float(np.mean(lams))

    per_rep = []
    for rep in range(reps):
        rep_design = SimDesign(
            design.structure, design.a, design.n_clusters, design.n, design.seed + rep
        )
        panel, truth = generate_cluster_var(rep_design)
        record = {"rep": rep, "seed": rep_design.seed}

        if policy == "A=0":
            flat = scaling_matrix(build_lagged(panel, 0))
            graph = discover_cpdag(
                flat.sigma, panel.n, PcConfig(alpha=alpha), panel.names
            )
            record.update(
                shd=shd(graph, truth.reference),
                tp_fp=np.nan, fp=np.nan, fn=np.nan,
                dist_a=np.nan, dist_sigma=np.nan,
            )
            per_rep.append(record)
            continue

        if policy == "lambda=0":
            lam = 0.0
        elif fixed_lam is not None:
            lam = fixed_lam
        else:
            lam = _resolve_lambda(panel, method, policy, n_folds)

        lagged = build_lagged(panel, 1)
        scal = scaling_matrix(lagged)
        if method == "lasso":
            scal = psd_repair(scal)
        theta = estimate_precision(scal, method=method, lam=lam, tau=2.0 * lam)
        params = var_params(theta)

        gaps = None
        if restricted and lam > 0:
            k = design.k
            gaps = fixed_gaps_from_support(theta.support.mask[:k, :k])
        graph = discover_cpdag(
            params.sigma_eps,
            lagged.values.shape[0],
            PcConfig(alpha=alpha, fixed_gaps=gaps),
            panel.names,
        )

        tp_fp, fp, fn = support_confusion(theta.theta11, truth.theta11_true)
        record.update(
            lam=lam,
            shd=shd(graph, truth.reference),
            tp_fp=tp_fp,
            fp=fp,
            fn=fn,
            dist_a=_operator_norm(params.a - truth.a_true),
            dist_sigma=_operator_norm(params.sigma_eps - truth.sigma_eps_true),
        )
        per_rep.append(record)

    means, stderrs = {}, {}
    for key in METRIC_KEYS:
        data = np.array([r[key] for r in per_rep], dtype=float)
        if np.isnan(data).all():
            means[key] = np.nan
            stderrs[key] = np.nan
        else:
            means[key] = float(np.mean(data))
            stderrs[key] = (
                float(np.std(data, ddof=1) / np.sqrt(len(data))) if len(data) > 1 else 0.0
            )
    return BenchmarkRow(design, method, policy, restricted, reps, means, stderrs, per_rep)
