"""Classical matrix factorization baseline trained by gradient descent.

No sigmoid and no priors here: the predicted (normalized) rating is the
raw dot product, and training minimizes the plain sum of squared
residuals over observed entries. Serves as a point-estimate anchor for
the Bayesian engines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DivergenceError
from .model import LatentState, RatingDataset


@dataclass(frozen=True)
class MfConfig:
    k: int = 10
    alpha: float = 0.002
    epochs: int = 200
    init_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.init_scale < 0:
            raise ValueError("init_scale must be >= 0")


def mf_loss(state: LatentState, data: RatingDataset) -> float:
    """Sum of squared residuals over observed (normalized) ratings."""
    _check_shapes(state, data)
    if data.n_ratings == 0:
        return 0.0
    with np.errstate(over="ignore"):
        dots = np.einsum("ij,ij->i", state.u[data.user_idx], state.v[data.item_idx])
        return float(np.sum((data.rating - dots) ** 2))


def _check_shapes(state: LatentState, data: RatingDataset):
    if state.u.shape[0] != data.n_users or state.v.shape[0] != data.n_items:
        raise ValueError(
            f"state rows {state.u.shape[0]}/{state.v.shape[0]} do not match "
            f"dataset ({data.n_users}, {data.n_items})"
        )


def _incidence(data: RatingDataset):
    """CSR scatter matrices: rows accumulate per-rating terms by user / item."""
    ones = np.ones(data.n_ratings)
    arange = np.arange(data.n_ratings)
    by_user = sparse.csr_matrix(
        (ones, (data.user_idx, arange)), shape=(data.n_users, data.n_ratings)
    )
    by_item = sparse.csr_matrix(
        (ones, (data.item_idx, arange)), shape=(data.n_items, data.n_ratings)
    )
    return by_user, by_item


def mf_epoch(state: LatentState, data: RatingDataset, cfg: MfConfig,
             _scatter=None, _epoch=0) -> LatentState:
    """One full-batch update: the U block first, then V against the new U."""
    _check_shapes(state, data)
    if data.n_ratings == 0:
        return state.copy()
    by_user, by_item = _scatter if _scatter is not None else _incidence(data)
    ii, jj, rr = data.user_idx, data.item_idx, data.rating

    # overflow here is reported as a divergence error, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        resid = rr - np.einsum("ij,ij->i", state.u[ii], state.v[jj])
        u_new = state.u + cfg.alpha * (by_user @ (resid[:, None] * state.v[jj]))

        resid = rr - np.einsum("ij,ij->i", u_new[ii], state.v[jj])
        v_new = state.v + cfg.alpha * (by_item @ (resid[:, None] * u_new[ii]))

    if not (np.isfinite(u_new).all() and np.isfinite(v_new).all()):
        raise DivergenceError("matrix factorization diverged (reduce alpha)", _epoch)
    return LatentState(u_new, v_new)


def init_state(n_users: int, n_items: int, cfg: MfConfig) -> LatentState:
    rng = np.random.default_rng(cfg.seed)
    return LatentState(
        rng.normal(0.0, cfg.init_scale, size=(n_users, cfg.k)),
        rng.normal(0.0, cfg.init_scale, size=(n_items, cfg.k)),
    )


def mf_train(data: RatingDataset, cfg: MfConfig):
    """Train from a seeded random init; returns (state, per-epoch loss trace)."""
    state = init_state(data.n_users, data.n_items, cfg)
    scatter = _incidence(data) if data.n_ratings else None
    trace = []
    for epoch in range(cfg.epochs):
        state = mf_epoch(state, data, cfg, _scatter=scatter, _epoch=epoch)
        trace.append(mf_loss(state, data))
    return state, trace
