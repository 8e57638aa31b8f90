"""Rank-based scaling matrix of a lag-stacked panel.

The observed series are mapped to ranks, pairwise Spearman rho
coefficients are computed in the Hoeffding form

    rho_ij = 12 / (m^3 - m) * sum_t (R_t - (m+1)/2) (S_t - (m+1)/2),

and the latent Gaussian correlation is recovered entrywise through
``2 sin(pi/6 * rho)``.  Blocks at equal lag offset are averaged so the
result has the Toeplitz block structure of a stationary autocovariance.
Everything here is invariant under strictly increasing transforms of the
input columns, which is what makes the estimator robust to fat tails.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import CopulaVarError, NumericalError

DEFAULT_EIGENVALUE_FLOOR = 1e-6


@dataclass(frozen=True)
class Panel:
    """An n x K block of time-ordered observations with column names."""

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        if values.ndim != 2:
            raise CopulaVarError("panel values must be a 2-d array")
        n, k = values.shape
        if len(self.names) != k:
            raise CopulaVarError("panel needs one name per column")
        if n < 4:
            raise CopulaVarError("panel needs at least 4 rows")
        if k < 2:
            raise CopulaVarError("panel needs at least 2 columns")
        if not np.isfinite(values).all():
            raise CopulaVarError("panel contains missing or non-finite values")
        for j in range(k):
            if np.unique(values[:, j]).size < 2:
                raise CopulaVarError(
                    f"column {self.names[j]!r} has fewer than 2 distinct values"
                )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def difference(self, columns) -> "Panel":
        """First-difference the named columns, dropping the first row."""
        unknown = set(columns) - set(self.names)
        if unknown:
            raise CopulaVarError(f"unknown columns to difference: {sorted(unknown)}")
        out = self.values[1:].copy()
        for j, name in enumerate(self.names):
            if name in columns:
                out[:, j] = np.diff(self.values[:, j])
        return Panel(out, self.names)


def load_panel_csv(path_or_buffer) -> Panel:
    """Read a panel from UTF-8 CSV: header row, one column per variable,
    rows in time order, decimal point, no thousands separators."""
    if hasattr(path_or_buffer, "read"):
        text = path_or_buffer.read()
    else:
        with open(path_or_buffer, "r", encoding="utf-8") as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(field.strip() for field in r)]
    if len(rows) < 2:
        raise CopulaVarError("CSV must contain a header row and data rows")
    names = tuple(field.strip() for field in rows[0])
    try:
        values = np.array([[float(field) for field in row] for row in rows[1:]])
    except ValueError as exc:
        raise CopulaVarError(f"non-numeric CSV field: {exc}") from exc
    if values.shape[1] != len(names):
        raise CopulaVarError("CSV rows do not match header width")
    return Panel(values, names)


@dataclass(frozen=True)
class LaggedDesign:
    """Rows of (X_t', X_{t-1}', ..., X_{t-p}') stacked most recent first."""

    values: np.ndarray
    p: int
    block_size: int
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        if values.shape[1] != (self.p + 1) * self.block_size:
            raise CopulaVarError("lagged design width must be (p+1)*K")
        if values.shape[0] < 4:
            raise CopulaVarError("insufficient sample for lag order")

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def _lag_stack(values: np.ndarray, p: int) -> np.ndarray:
    n = values.shape[0]
    return np.hstack([values[p - d : n - d] for d in range(p + 1)])


def _lagged_names(names, p) -> tuple[str, ...]:
    return tuple(f"{name}_L{d}" for d in range(p + 1) for name in names)


def build_lagged(panel: Panel, p: int) -> LaggedDesign:
    """Stack ``p`` lags of the panel into an (n-p) x (p+1)K design.

    Row t holds the concatenation of panel rows t+p, t+p-1, ..., t, i.e.
    the current observation followed by increasingly old lags.
    """
    if p < 0:
        raise CopulaVarError("lag order must be nonnegative")
    if p >= panel.n - 3:
        raise CopulaVarError("insufficient sample for lag order")
    return LaggedDesign(
        _lag_stack(panel.values, p), p, panel.k, _lagged_names(panel.names, p)
    )


def lagged_from_segments(segments, p: int, names) -> LaggedDesign:
    """Lag-stack each contiguous segment separately and pool the rows.

    Used for cross-validation estimation samples, where the complement of
    a test block is a union of disjoint time stretches: stacking must not
    cross the gaps, so the first ``p`` rows of each segment are consumed
    by the lags of that segment only.
    """
    k = len(names)
    blocks = []
    for seg in segments:
        seg = np.asarray(seg, dtype=float)
        if seg.shape[0] > p:
            blocks.append(_lag_stack(seg, p))
    if not blocks:
        raise CopulaVarError("insufficient sample for lag order")
    pooled = np.vstack(blocks)
    if pooled.shape[0] < 4:
        raise CopulaVarError("insufficient sample for lag order")
    return LaggedDesign(pooled, p, k, _lagged_names(names, p))


@dataclass(frozen=True)
class ScalingMatrix:
    """Symmetric unit-diagonal latent correlation estimate with block structure."""

    sigma: np.ndarray
    p: int
    block_size: int
    names: tuple[str, ...] = ()

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "names", tuple(self.names))
        d = (self.p + 1) * self.block_size
        if sigma.shape != (d, d):
            raise CopulaVarError("scaling matrix has wrong shape")

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]


def spearman_rho(x, y) -> float:
    """Sample Spearman rho of two vectors, Hoeffding form with mid-ranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = x.shape[0]
    if y.shape[0] != m:
        raise CopulaVarError("vectors must have equal length")
    if m < 4:
        raise CopulaVarError("need at least 4 observations")
    rx = rankdata(x) - (m + 1) / 2.0
    ry = rankdata(y) - (m + 1) / 2.0
    if not rx.any() or not ry.any():
        raise NumericalError("zero rank variance")
    return 12.0 / (m**3 - m) * float(rx @ ry)


def _rho_matrix(values: np.ndarray) -> np.ndarray:
    """All pairwise Spearman rhos at once via centered-rank cross products."""
    m, d = values.shape
    ranks = rankdata(values, axis=0) - (m + 1) / 2.0
    dead = ~ranks.any(axis=0)
    if dead.any():
        raise NumericalError("zero rank variance")
    rho = (12.0 / (m**3 - m)) * (ranks.T @ ranks)
    return rho


def scaling_matrix(w: LaggedDesign) -> ScalingMatrix:
    """Entrywise 2 sin(pi/6 * rho) estimate with lag-offset block averaging.

    All (p+1) diagonal blocks are replaced by their common average and,
    for each offset d, the blocks at that offset are replaced by the
    average of each block with the transpose of its mirror image.
    """
    if w.values.shape[0] < 4:
        raise CopulaVarError("need at least 4 observations")
    rho = _rho_matrix(w.values)
    sigma = 2.0 * np.sin(np.pi / 6.0 * rho)
    sigma = (sigma + sigma.T) / 2.0
    np.fill_diagonal(sigma, 1.0)

    k, p = w.block_size, w.p
    block = lambda u, v: sigma[u * k : (u + 1) * k, v * k : (v + 1) * k]
    averaged = [None] * (p + 1)
    for d in range(p + 1):
        stack = [block(u, u + d) for u in range(p + 1 - d)]
        stack += [block(u + d, u).T for u in range(p + 1 - d)]
        averaged[d] = sum(stack) / len(stack)
    out = np.empty_like(sigma)
    for u in range(p + 1):
        for v in range(p + 1):
            d = v - u
            out[u * k : (u + 1) * k, v * k : (v + 1) * k] = (
                averaged[d] if d >= 0 else averaged[-d].T
            )
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return ScalingMatrix(out, p, k, w.names)


def psd_repair(
    sigma: ScalingMatrix, floor: float = DEFAULT_EIGENVALUE_FLOOR
) -> ScalingMatrix:
    """Clip eigenvalues below ``floor`` and rescale back to unit diagonal.

    The sine-transformed rank matrix need not be positive semidefinite in
    finite samples.  Inputs already satisfying the eigenvalue floor are
    returned unchanged, which makes the repair exactly idempotent.
    """
    if floor <= 0:
        raise CopulaVarError("eigenvalue floor must be positive")
    mat = sigma.sigma
    for _ in range(100):
        eigvals = np.linalg.eigvalsh(mat)
        if eigvals[0] >= floor:
            break
        w, v = np.linalg.eigh(mat)
        # Slight overshoot so the unit-diagonal rescale cannot dip back
        # under the floor; invisible once the loop exits.
        w = np.maximum(w, floor * 1.01)
        mat = (v * w) @ v.T
        mat = (mat + mat.T) / 2.0
        scale = 1.0 / np.sqrt(np.diag(mat))
        mat = mat * scale[:, None] * scale[None, :]
        np.fill_diagonal(mat, 1.0)
    if mat is sigma.sigma:
        return sigma
    return ScalingMatrix(mat, sigma.p, sigma.block_size, sigma.names)
