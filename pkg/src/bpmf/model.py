"""Probabilistic rating model shared by every inference engine.

Latent user/item factors carry independent standard-normal priors; an
observed (normalized) rating is Gaussian around ``sigmoid(u_i . v_j)``
with variance ``sigma2``. Everything here is a pure function; all
normalization constants are kept so log densities are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class RatingScale:
    """Original rating scale {r_min, r_min+step, ..., r_max}.

    ``r_min`` is 1 for classic integer ratings and 0.5 for half-star data.
    """

    r_max: int
    r_min: float = 1.0

    def __post_init__(self):
        if self.r_max < 2:
            raise ValueError(f"r_max must be >= 2, got {self.r_max}")
        if not 0.0 < self.r_min < self.r_max:
            raise ValueError(f"r_min must lie in (0, r_max), got {self.r_min}")

    @property
    def span(self) -> float:
        return self.r_max - self.r_min


@dataclass
class RatingDataset:
    """Sparse observed ratings with dense 0-based indices.

    ``rating`` holds values already normalized to [0, 1]; the original
    scale travels along so predictions can be mapped back.
    """

    n_users: int
    n_items: int
    user_idx: np.ndarray
    item_idx: np.ndarray
    rating: np.ndarray
    scale: RatingScale

    def __post_init__(self):
        self.user_idx = np.asarray(self.user_idx, dtype=np.int64)
        self.item_idx = np.asarray(self.item_idx, dtype=np.int64)
        self.rating = np.asarray(self.rating, dtype=np.float64)
        if not (self.user_idx.shape == self.item_idx.shape == self.rating.shape):
            raise ValueError("user_idx, item_idx, rating must have equal length")
        if self.user_idx.size:
            if self.user_idx.min() < 0 or self.user_idx.max() >= self.n_users:
                raise ValueError("user index out of range")
            if self.item_idx.min() < 0 or self.item_idx.max() >= self.n_items:
                raise ValueError("item index out of range")
            if self.rating.min() < 0.0 or self.rating.max() > 1.0:
                raise ValueError("normalized ratings must lie in [0, 1]")
            keys = self.user_idx * self.n_items + self.item_idx
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate (user, item) pair in dataset")

    @classmethod
    def from_triples(cls, n_users, n_items, triples, scale):
        """Build from an iterable of (user_idx, item_idx, normalized_rating)."""
        triples = list(triples)
        if triples:
            ii, jj, rr = (np.asarray(col) for col in zip(*triples))
        else:
            ii = jj = np.zeros(0, dtype=np.int64)
            rr = np.zeros(0)
        return cls(n_users, n_items, ii, jj, rr, scale)

    @property
    def n_ratings(self) -> int:
        return int(self.rating.size)

    def triples(self):
        return list(zip(self.user_idx.tolist(), self.item_idx.tolist(), self.rating.tolist()))


@dataclass
class LatentState:
    """A concrete (U, V) factor pair: U is N x K, V is M x K."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.u.ndim != 2 or self.v.ndim != 2 or self.u.shape[1] != self.v.shape[1]:
            raise ValueError("u and v must be 2-D with matching latent width")
        if not (np.isfinite(self.u).all() and np.isfinite(self.v).all()):
            raise ValueError("latent factors must be finite")

    @property
    def k(self) -> int:
        return self.u.shape[1]

    def copy(self) -> "LatentState":
        return LatentState(self.u.copy(), self.v.copy())


@dataclass(frozen=True)
class ModelHyperparams:
    k: int
    sigma2: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")


def sigmoid(x):
    """Numerically stable logistic function, elementwise on arrays."""
    return expit(x)


def normalize_rating(r, scale: RatingScale) -> float:
    """Map an original-scale rating onto [0, 1]."""
    if r < scale.r_min or r > scale.r_max:
        raise ValueError(
            f"rating {r} outside the scale [{scale.r_min}, {scale.r_max}]"
        )
    return (r - scale.r_min) / scale.span


def denormalize_rating(r_star, scale: RatingScale):
    """Inverse of :func:`normalize_rating`; input must lie in [0, 1]."""
    r_star = np.asarray(r_star, dtype=np.float64)
    if np.any(r_star < 0.0) or np.any(r_star > 1.0):
        raise ValueError("normalized rating outside [0, 1]")
    out = scale.span * r_star + scale.r_min
    return float(out) if out.ndim == 0 else out


def log_likelihood_entry(u_i, v_j, r, sigma2) -> float:
    """Log density of one normalized rating given its two latent rows."""
    u_i = np.asarray(u_i, dtype=np.float64)
    v_j = np.asarray(v_j, dtype=np.float64)
    if u_i.shape != v_j.shape:
        raise ValueError("u_i and v_j must have the same length")
    mean = sigmoid(float(u_i @ v_j))
    return float(-0.5 * np.log(2.0 * np.pi * sigma2) - (r - mean) ** 2 / (2.0 * sigma2))


def _log_likelihood_sum(u, v, data: RatingDataset, sigma2: float) -> float:
    """Vectorized sum of per-entry log likelihoods over observed ratings."""
    if data.n_ratings == 0:
        return 0.0
    dots = np.einsum("ij,ij->i", u[data.user_idx], v[data.item_idx])
    resid = data.rating - sigmoid(dots)
    return float(
        -0.5 * data.n_ratings * np.log(2.0 * np.pi * sigma2)
        - np.sum(resid**2) / (2.0 * sigma2)
    )


def log_joint(state: LatentState, data: RatingDataset, hp: ModelHyperparams) -> float:
    """Exact log of prior times likelihood (all constants included)."""
    if state.u.shape != (data.n_users, hp.k) or state.v.shape != (data.n_items, hp.k):
        raise ValueError(
            f"state shapes {state.u.shape}/{state.v.shape} do not match "
            f"dataset ({data.n_users}, {data.n_items}) with k={hp.k}"
        )
    log_prior = (
        -0.5 * (np.sum(state.u**2) + np.sum(state.v**2))
        - (data.n_users + data.n_items) * (hp.k / 2.0) * LOG_2PI
    )
    return float(log_prior + _log_likelihood_sum(state.u, state.v, data, hp.sigma2))


def predict_point(u_i, v_j, scale: RatingScale) -> float:
    """Point prediction on the original scale for one latent row pair.

    The Gaussian predictive is centered at sigmoid(u.v), so its mode is
    the mean and no search is needed.
    """
    u_i = np.asarray(u_i, dtype=np.float64)
    v_j = np.asarray(v_j, dtype=np.float64)
    if u_i.shape != v_j.shape:
        raise ValueError("u_i and v_j must have the same length")
    return float(denormalize_rating(sigmoid(float(u_i @ v_j)), scale))
