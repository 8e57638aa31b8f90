"""Cross-validated penalty selection and information-criterion lag order.

The penalty grid is anchored at the smallest penalty that empties the
off-diagonal of the contemporaneous precision block (found by halving
from 0.10, or doubling upward when 0.10 is already too small), and the
grid then descends over five further halvings.  Folds are contiguous
time blocks; estimation samples are lag-stacked per contiguous segment
so that no design row straddles a fold boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CopulaVarError, NumericalError
from .precision import SparsePrecision, estimate_precision, var_params
from .scaling import (
    Panel,
    ScalingMatrix,
    build_lagged,
    lagged_from_segments,
    psd_repair,
    scaling_matrix,
)

LAMBDA_SEARCH_START = 0.10
LAMBDA_ZERO_TOL = 1e-6
MAX_SEARCH_STEPS = 30


@dataclass(frozen=True)
class CvPlan:
    """Contiguous equal-size time blocks and a descending penalty grid.

    When ``lambda_grid`` is omitted it is derived from the all-zero
    anchor: anchor/2, anchor/4, ..., anchor/2^grid_size.
    """

    n_folds: int = 5
    lambda_grid: tuple | None = None
    grid_size: int = 5

    def __post_init__(self):
        if self.n_folds < 2:
            raise CopulaVarError("need at least 2 folds")
        if self.lambda_grid is not None:
            grid = tuple(float(v) for v in self.lambda_grid)
            if not grid or any(v <= 0 for v in grid):
                raise CopulaVarError("penalty grid must be positive")
            object.__setattr__(self, "lambda_grid", grid)


@dataclass(frozen=True)
class CvResult:
    lambda_star: float
    tau_star: float
    lambda_zero: float | None
    grid: tuple
    fold_scores: np.ndarray  # n_folds x len(grid)
    mean_scores: tuple


@dataclass(frozen=True)
class AicResult:
    p: int
    table: tuple  # (p, log_det, nonzeros, aic) per candidate


def cv_score(theta_est: SparsePrecision, sigma_test: ScalingMatrix) -> float:
    """Gaussian negative loglikelihood of a precision estimate on held-out
    data: trace(sigma_test theta) - logdet(theta)."""
    theta = theta_est.theta
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0 or np.min(np.linalg.eigvalsh(theta)) <= 0:
        raise NumericalError("invalid precision for scoring")
    return float(np.trace(sigma_test.sigma @ theta) - logdet)


def _fit_sigma(values_segments, p: int, names, method: str) -> ScalingMatrix:
    lagged = lagged_from_segments(values_segments, p, names)
    sigma = scaling_matrix(lagged)
    if method == "lasso":
        sigma = psd_repair(sigma)
    return sigma


def _all_offdiag_zero(theta: SparsePrecision) -> bool:
    block = np.abs(theta.theta11.copy())
    np.fill_diagonal(block, 0.0)
    return bool(np.max(block) < LAMBDA_ZERO_TOL)


def lambda_zero_search(
    panel: Panel, method: str = "lasso", p: int = 1, start: float = LAMBDA_SEARCH_START
) -> float:
    """Smallest penalty in the halving sweep from ``start`` that zeroes
    every off-diagonal entry of the contemporaneous precision block;
    doubles upward first when ``start`` itself is not large enough."""
    sigma = _fit_sigma([panel.values], p, panel.names, method)

    def empties(lam: float) -> bool:
        theta = estimate_precision(sigma, method=method, lam=lam, tau=2.0 * lam)
        return _all_offdiag_zero(theta)

    lam = start
    if not empties(lam):
        for _ in range(MAX_SEARCH_STEPS):
            lam *= 2.0
            if empties(lam):
                return lam
        return lam
    for _ in range(MAX_SEARCH_STEPS):
        half = lam / 2.0
        if not empties(half):
            return lam
        lam = half
    return lam


def _fold_blocks(n: int, n_folds: int) -> list[tuple[int, int]]:
    size = n // n_folds
    return [(b * size, (b + 1) * size) for b in range(n_folds)]


def cross_validate(
    panel: Panel, method: str = "lasso", plan: CvPlan | None = None, p: int = 1
) -> CvResult:
    """Select the penalty minimizing mean held-out negative loglikelihood.

    Each fold's estimation sample is the complement of its block; scoring
    uses the scaling matrix of the block itself.  The threshold is tied
    to the penalty as tau = 2 lambda throughout.  A non positive definite
    refit is scored as +inf rather than aborting the search.
    """
    plan = plan or CvPlan()
    size = panel.n // plan.n_folds
    if size - p < 4:
        raise CopulaVarError("fold too small")

    if plan.lambda_grid is not None:
        grid = plan.lambda_grid
        lam0 = None
    else:
        lam0 = lambda_zero_search(panel, method=method, p=p)
        grid = tuple(lam0 / 2.0 ** (j + 1) for j in range(plan.grid_size))

    blocks = _fold_blocks(panel.n, plan.n_folds)
    scores = np.full((plan.n_folds, len(grid)), np.inf)
    for b, (lo, hi) in enumerate(blocks):
        segments = [panel.values[: lo], panel.values[hi : blocks[-1][1]]]
        segments = [seg for seg in segments if seg.shape[0] > p]
        sigma_est = _fit_sigma(segments, p, panel.names, method)
        test_lagged = lagged_from_segments([panel.values[lo:hi]], p, panel.names)
        sigma_test = scaling_matrix(test_lagged)
        warm = None
        for g, lam in enumerate(grid):
            theta = estimate_precision(
                sigma_est, method=method, lam=lam, tau=2.0 * lam, warm_start=warm
            )
            # Descending grid: the previous raw solution is a warm start
            # for the next, smaller penalty.  The optimum is unique, so
            # this changes speed, not results.
            warm = theta.raw_columns
            try:
                scores[b, g] = cv_score(theta, sigma_test)
            except NumericalError:
                scores[b, g] = np.inf

    mean_scores = scores.mean(axis=0)
    best = int(np.argmin(mean_scores))
    lam_star = grid[best]
    return CvResult(
        lambda_star=lam_star,
        tau_star=2.0 * lam_star,
        lambda_zero=lam0,
        grid=grid,
        fold_scores=scores,
        mean_scores=tuple(float(v) for v in mean_scores),
    )


def aic_lag_order(
    panel: Panel,
    p_max: int,
    method: str = "lasso",
    lam: float | None = None,
    plan: CvPlan | None = None,
) -> AicResult:
    """Lag order minimizing n log det(sigma_eps_bar) + 2 (nonzeros in the
    cross-lag precision strip), with no zero restriction imposed on the
    contemporaneous block.

    When ``lam`` is omitted it is cross-validated once at one lag and
    reused for every candidate order.
    """
    if p_max < 1:
        raise CopulaVarError("maximum lag order must be at least 1")
    if lam is None:
        lam = cross_validate(panel, method=method, plan=plan, p=1).lambda_star

    rows = []
    best_p, best_aic = 1, np.inf
    for p in range(1, p_max + 1):
        lagged = build_lagged(panel, p)
        sigma = scaling_matrix(lagged)
        if method == "lasso":
            sigma = psd_repair(sigma)
        theta = estimate_precision(
            sigma, method=method, lam=lam, tau=2.0 * lam, force_dense_block=panel.k
        )
        params = var_params(theta)
        nonzeros = int(theta.support.mask[: panel.k, panel.k :].sum())
        sign, logdet = np.linalg.slogdet(params.sigma_eps)
        if sign <= 0:
            aic, logdet = np.inf, np.nan
        else:
            aic = panel.n * logdet + 2.0 * nonzeros
        rows.append((p, float(logdet), nonzeros, float(aic)))
        if aic < best_aic:
            best_p, best_aic = p, aic
    return AicResult(p=best_p, table=tuple(rows))
