"""Impulse responses of the latent recursive system, mapped back to the
observed scale through empirical marginals.

The latent model is linear Gaussian, so the conditional expectation of a
future observation given a structural shock is a Monte Carlo average of
the marginal quantile transform applied to simulated latent paths.  The
shocked and baseline arms share every random draw, which cancels the
simulation noise common to both and makes a zero-sized shock return an
exact zero.  A closed-form linearized response is available as the
small-shock limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import CopulaVarError, NumericalError
from .precision import companion_matrix
from .simulate import lyapunov_variance
from .svar import StructuralModel, ma_coefficients

MODES = ("conditional", "unconditional", "linearized")


@dataclass(frozen=True)
class EmpiricalMarginal:
    """Sorted sample used as a truncated empirical quantile function."""

    sorted_values: np.ndarray

    def __post_init__(self):
        values = np.sort(np.asarray(self.sorted_values, dtype=float))
        object.__setattr__(self, "sorted_values", values)
        if values.size == 0:
            raise CopulaVarError("marginal sample must be nonempty")

    @property
    def n(self) -> int:
        return self.sorted_values.size


def marginal_inverse(marginal: EmpiricalMarginal, z):
    """Map latent Gaussian values to the observed scale.

    The Gaussian cdf value is clipped to [1/(n+1), n/(n+1)] and the
    ceil(u * n)-th order statistic returned, so round trips through the
    inverse normal cdf never produce infinities.
    """
    n = marginal.n
    u = np.clip(norm.cdf(np.asarray(z, dtype=float)), 1.0 / (n + 1), n / (n + 1))
    idx = np.ceil(u * n).astype(int)
    idx = np.clip(idx, 1, n)
    return marginal.sorted_values[idx - 1]


def rank_to_latent(marginal: EmpiricalMarginal, x):
    """In-sample rank plug-in for the forward transform: z = PhiInv(rank/(n+1))."""
    n = marginal.n
    rank = np.searchsorted(marginal.sorted_values, np.asarray(x, dtype=float), "right")
    rank = np.clip(rank, 1, n)
    return norm.ppf(rank / (n + 1.0))


@dataclass(frozen=True)
class IrfRequest:
    """Shock/response specification.

    ``shock_index`` names the variable whose structural shock is moved
    (original coordinates; the permutation maps it to the corresponding
    entry of the structural shock vector).  ``x`` is the conditioning
    state for the conditional mode, one value per lagged coordinate.
    """

    shock_index: int
    response_index: int
    delta: float
    horizons: tuple[int, ...] = tuple(range(11))
    mc_draws: int = 10_000
    seed: int | None = None
    mode: str = "unconditional"
    x: np.ndarray | None = None
    unit_variance: bool = False

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(int(s) for s in self.horizons))
        if not self.horizons:
            raise CopulaVarError("need at least one horizon")
        if any(s < 0 for s in self.horizons):
            raise CopulaVarError("horizons must be nonnegative")
        if self.mode not in MODES:
            raise CopulaVarError(f"unknown mode {self.mode!r}")
        if self.mode != "linearized" and self.mc_draws < 1:
            raise CopulaVarError("need at least one Monte Carlo draw")


def sigma_xi_from_model(model: StructuralModel, sigma_eps: np.ndarray) -> np.ndarray:
    """Diagonal structural shock covariance implied by an innovation
    covariance; off-diagonals of the transform are dropped after the
    diagnostic residual is computed."""
    k = model.k
    h_inv_pi = (np.eye(k) - model.d) @ model.pi
    full = h_inv_pi @ np.asarray(sigma_eps, dtype=float) @ h_inv_pi.T
    return np.diag(np.diag(full))


def _shock_position(model: StructuralModel, variable: int) -> int:
    """Index of the structural shock that is specific to the given variable."""
    return model.order.index(variable)


def irf_linearized(model: StructuralModel, request: IrfRequest) -> np.ndarray:
    """Small-shock response: delta times the (response, shock) entry of the
    horizon-s moving average coefficient, optionally scaled to
    unit-variance shocks."""
    k = model.k
    col = _shock_position(model, request.shock_index)
    scale = np.sqrt(model.sigma_xi[col]) if request.unit_variance else 1.0
    out = np.empty(len(request.horizons))
    for pos, s in enumerate(request.horizons):
        upsilon = ma_coefficients(model, s)
        out[pos] = request.delta * scale * upsilon[request.response_index, col]
    return out


def _check_stationary(model: StructuralModel) -> None:
    if model.a.size == 0:
        return
    comp = companion_matrix(model.a, model.k)
    if np.max(np.abs(np.linalg.eigvals(comp))) >= 1.0:
        raise NumericalError("nonstationary model")


def irf_mc(model: StructuralModel, marginals, request: IrfRequest):
    """Monte Carlo impulse response on the observed scale.

    Returns (values, stderrs), one entry per horizon.  ``marginals`` is a
    sequence of :class:`EmpiricalMarginal`, one per variable, or None to
    treat the latent scale as observed (identity marginals).
    """
    if request.mode == "linearized":
        raise CopulaVarError("use irf_linearized for the linearized mode")
    _check_stationary(model)
    k = model.k
    p = max(model.n_lags, 1)
    ktot = p * k
    m = request.mc_draws
    horizons = request.horizons
    s_max = max(horizons)
    rng = np.random.default_rng(request.seed)

    col = _shock_position(model, request.shock_index)
    resp = request.response_index
    xi_sd = np.sqrt(model.sigma_xi)

    comp = companion_matrix(model.a, k) if model.a.size else np.zeros((k, k))
    if comp.shape[0] != ktot:
        comp = np.zeros((ktot, ktot))

    # Conditioning state, stacked over lags, on the latent scale.
    if request.mode == "conditional":
        if request.x is None:
            raise CopulaVarError("conditional mode needs a conditioning state x")
        x = np.asarray(request.x, dtype=float)
        if x.size != ktot:
            raise CopulaVarError("conditioning state must cover every lag")
        if marginals is None:
            z_state = np.tile(x, (m, 1))
        else:
            z_state = np.tile(
                [
                    rank_to_latent(marginals[j % k], x[j])
                    for j in range(ktot)
                ],
                (m, 1),
            )
    else:
        sigma_state = np.zeros((ktot, ktot))
        sigma_state[:k, :k] = model.sigma_eps
        gamma = lyapunov_variance(comp, sigma_state)
        chol = np.linalg.cholesky(gamma + 1e-12 * np.eye(ktot))
        z_state = rng.standard_normal((m, ktot)) @ chol.T

    # One set of structural shock draws shared by both arms.
    xi_draws = rng.standard_normal((m, s_max + 1, k)) * xi_sd

    upsilons = [ma_coefficients(model, s) for s in range(s_max + 1)]

    values = np.empty(len(horizons))
    stderrs = np.empty(len(horizons))
    for pos, s in enumerate(horizons):
        base = z_state @ _state_power(comp, k, s + 1).T
        for r in range(s):
            base += xi_draws[:, s - r, :] @ upsilons[r].T
        pinned_delta = xi_draws[:, 0, :].copy()
        pinned_delta[:, col] = request.delta
        pinned_zero = xi_draws[:, 0, :].copy()
        pinned_zero[:, col] = 0.0

        latent_shocked = base[:, resp] + pinned_delta @ upsilons[s].T[:, resp]
        latent_baseline = base[:, resp] + pinned_zero @ upsilons[s].T[:, resp]
        if marginals is None:
            obs_shocked = latent_shocked
            obs_baseline = latent_baseline
        else:
            marg = marginals[resp]
            obs_shocked = marginal_inverse(marg, latent_shocked)
            obs_baseline = marginal_inverse(marg, latent_baseline)
        diff = obs_shocked - obs_baseline
        values[pos] = float(np.mean(diff))
        stderrs[pos] = float(np.std(diff, ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    return values, stderrs


def _state_power(comp: np.ndarray, k: int, s: int) -> np.ndarray:
    """K x (pK) map from the stacked state to the horizon-s latent mean."""
    power = np.linalg.matrix_power(comp, s)
    return power[:k, :]
