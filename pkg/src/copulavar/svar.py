"""Structural coefficients from a fully directed contemporaneous DAG.

Each row of the contemporaneous coefficient matrix is the population
regression of an innovation on its parents, read directly off the
innovation covariance.  The permutation that realizes the (lexicographic
minimum) topological order makes the permuted coefficient matrix
strictly lower triangular, and the moving average coefficients of the
latent process follow as powers of the autoregressive matrix times the
contemporaneous pass-through.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CopulaVarError, IdentificationError, NumericalError
from .pcdag import Cpdag
from .precision import companion_matrix


@dataclass(frozen=True)
class StructuralModel:
    """Everything needed to simulate and shock the recursive system.

    ``order`` is the topological order of the variables; ``pi`` the
    corresponding permutation matrix; ``delta`` holds the contemporaneous
    regression coefficients in original coordinates, ``d`` its permuted,
    strictly lower triangular image; ``h`` is (I - d)^-1 with unit
    diagonal; ``sigma_xi`` the diagonal of the structural shock
    covariance in permuted order.  ``a`` is the K x pK autoregressive
    strip (zero when unknown).
    """

    order: tuple[int, ...]
    pi: np.ndarray
    delta: np.ndarray
    d: np.ndarray
    h: np.ndarray
    sigma_xi: np.ndarray
    a: np.ndarray
    sigma_eps: np.ndarray
    names: tuple[str, ...] = ()
    residual_offdiag_max: float = 0.0

    @property
    def k(self) -> int:
        return self.pi.shape[0]

    @property
    def n_lags(self) -> int:
        return self.a.shape[1] // self.k if self.a.size else 0

    def to_json_dict(self) -> dict:
        names = self.names or tuple(f"x{i + 1}" for i in range(self.k))
        return {
            "topological_order": [names[i] for i in self.order],
            "pi": self.pi.tolist(),
            "delta": self.delta.tolist(),
            "d": self.d.tolist(),
            "h": self.h.tolist(),
            "sigma_xi": self.sigma_xi.tolist(),
            "a": self.a.tolist(),
            "sigma_eps": self.sigma_eps.tolist(),
            "names": list(names),
            "residual_offdiag_max": self.residual_offdiag_max,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def model_from_json_dict(doc: dict) -> StructuralModel:
    names = tuple(doc["names"])
    order = tuple(names.index(n) for n in doc["topological_order"])
    return StructuralModel(
        order=order,
        pi=np.array(doc["pi"], dtype=float),
        delta=np.array(doc["delta"], dtype=float),
        d=np.array(doc["d"], dtype=float),
        h=np.array(doc["h"], dtype=float),
        sigma_xi=np.array(doc["sigma_xi"], dtype=float),
        a=np.array(doc["a"], dtype=float),
        sigma_eps=np.array(doc["sigma_eps"], dtype=float),
        names=names,
        residual_offdiag_max=float(doc.get("residual_offdiag_max", 0.0)),
    )


def parent_sets(dag: Cpdag) -> list[frozenset]:
    """Parent set of every node; the graph must be fully directed."""
    if not dag.is_fully_directed():
        raise IdentificationError("CPDAG not fully directed; SVAR not identified")
    return [dag.parents(i) for i in range(dag.n_nodes)]


def _permutation_matrix(order) -> np.ndarray:
    k = len(order)
    pi = np.zeros((k, k))
    for row, node in enumerate(order):
        pi[row, node] = 1.0
    return pi


def structural_coefficients(
    sigma_eps: np.ndarray, dag: Cpdag, a: np.ndarray | None = None
) -> StructuralModel:
    """Recover the recursive system implied by the DAG.

    Row i of the coefficient matrix regresses innovation i on its
    parents; the structural shock variances are the diagonal of the
    transformed innovation covariance, whose off-diagonal leakage is
    reported as a diagnostic rather than hidden.
    """
    sigma_eps = np.asarray(sigma_eps, dtype=float)
    k = sigma_eps.shape[0]
    if dag.n_nodes != k:
        raise CopulaVarError("graph and covariance dimensions differ")
    parents = parent_sets(dag)

    delta = np.zeros((k, k))
    for i, pset in enumerate(parents):
        if not pset:
            continue
        sel = sorted(pset)
        sub = sigma_eps[np.ix_(sel, sel)]
        try:
            coef = np.linalg.solve(sub, sigma_eps[sel, i])
        except np.linalg.LinAlgError as exc:
            raise NumericalError("degenerate parent covariance") from exc
        delta[i, sel] = coef

    order = dag.topological_order()
    pi = _permutation_matrix(order)
    d = pi @ delta @ pi.T
    if np.any(np.abs(np.triu(d)) > 0):
        raise NumericalError("permuted coefficient matrix is not lower triangular")
    h = np.linalg.inv(np.eye(k) - d)

    transformed = (np.eye(k) - d) @ pi @ sigma_eps @ pi.T @ (np.eye(k) - d).T
    sigma_xi = np.diag(transformed).copy()
    if np.any(sigma_xi <= 0):
        raise NumericalError("nonpositive structural shock variance")
    off = transformed - np.diag(sigma_xi)
    residual = float(np.max(np.abs(off))) if off.size else 0.0

    if a is None:
        a = np.zeros((k, k))
    return StructuralModel(
        order=tuple(order),
        pi=pi,
        delta=delta,
        d=d,
        h=h,
        sigma_xi=sigma_xi,
        a=np.asarray(a, dtype=float),
        sigma_eps=sigma_eps,
        names=dag.names,
        residual_offdiag_max=residual,
    )


def ma_coefficients(model: StructuralModel, s: int) -> np.ndarray:
    """Horizon-s moving average coefficient mapping structural shocks to
    the latent process: (power of A) @ pi' @ h, with the companion form
    supplying the power when more than one lag is present."""
    if s < 0:
        raise CopulaVarError("horizon must be nonnegative")
    k = model.k
    psi = var_power(model.a, k, s)
    return psi @ model.pi.T @ model.h


def var_power(a: np.ndarray, k: int, s: int) -> np.ndarray:
    """Top-left K x K block of the s-th companion matrix power."""
    a = np.asarray(a, dtype=float)
    if a.size == 0 or a.shape[1] == k:
        return np.linalg.matrix_power(a if a.size else np.zeros((k, k)), s)
    comp = companion_matrix(a, k)
    return np.linalg.matrix_power(comp, s)[:k, :k]
