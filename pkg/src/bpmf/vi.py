"""Mean-field Gaussian variational inference for the factor posterior.

Each latent row gets an independent diagonal-Gaussian factor with free
means and log-standard-deviations. The objective is the evidence lower
bound with the KL-to-prior part computed in closed form and the
likelihood expectation estimated by reparameterized Monte Carlo; both
the estimate and its pathwise gradient share the same base noise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DivergenceError
from .model import (
    ModelHyperparams,
    RatingDataset,
    RatingScale,
    denormalize_rating,
    sigmoid,
)


@dataclass
class VariationalParams:
    """Diagonal-Gaussian factor parameters for all user and item rows."""

    mu_u: np.ndarray
    log_s_u: np.ndarray
    mu_v: np.ndarray
    log_s_v: np.ndarray

    def __post_init__(self):
        for name in ("mu_u", "log_s_u", "mu_v", "log_s_v"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.mu_u.shape != self.log_s_u.shape or self.mu_v.shape != self.log_s_v.shape:
            raise ValueError("mean and log-std blocks must have matching shapes")
        if self.mu_u.shape[1] != self.mu_v.shape[1]:
            raise ValueError("user and item blocks must share the latent width")

    @property
    def k(self) -> int:
        return self.mu_u.shape[1]

    def copy(self) -> "VariationalParams":
        return VariationalParams(
            self.mu_u.copy(), self.log_s_u.copy(), self.mu_v.copy(), self.log_s_v.copy()
        )


@dataclass(frozen=True)
class ViConfig:
    k: int = 10
    learning_rate: float = 0.02
    epochs: int = 300
    mc_samples: int = 2
    seed: int = 0
    init_mu_scale: float = 0.5
    init_log_s: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")


def kl_gaussian_vs_standard(mu, log_s):
    """KL(N(mu, sigma^2) || N(0, 1)) elementwise: (sigma^2 + mu^2 - 1 - 2 log sigma)/2."""
    mu = np.asarray(mu, dtype=np.float64)
    log_s = np.asarray(log_s, dtype=np.float64)
    out = 0.5 * (np.exp(2.0 * log_s) + mu**2 - 1.0 - 2.0 * log_s)
    return float(out) if out.ndim == 0 else out


def _total_kl(params: VariationalParams) -> float:
    return float(
        np.sum(kl_gaussian_vs_standard(params.mu_u, params.log_s_u))
        + np.sum(kl_gaussian_vs_standard(params.mu_v, params.log_s_v))
    )


def _scatter_matrices(data: RatingDataset):
    ones = np.ones(data.n_ratings)
    arange = np.arange(data.n_ratings)
    by_user = sparse.csr_matrix(
        (ones, (data.user_idx, arange)), shape=(data.n_users, data.n_ratings)
    )
    by_item = sparse.csr_matrix(
        (ones, (data.item_idx, arange)), shape=(data.n_items, data.n_ratings)
    )
    return by_user, by_item


def draw_noise(params: VariationalParams, mc_samples: int, rng):
    """Base noise for reparameterized samples; one (eps_u, eps_v) pair per draw."""
    return [
        (rng.standard_normal(params.mu_u.shape), rng.standard_normal(params.mu_v.shape))
        for _ in range(mc_samples)
    ]


def elbo_with_noise(params: VariationalParams, data: RatingDataset,
                    hp: ModelHyperparams, noise, _scatter=None):
    """ELBO estimate and its pathwise gradient for explicit base noise.

    The KL-to-prior part is analytic; only the likelihood expectation is
    averaged over the supplied noise draws. Returns (value, gradient)
    with the gradient shaped like ``params``.
    """
    s_u = np.exp(params.log_s_u)
    s_v = np.exp(params.log_s_v)
    grad = VariationalParams(
        np.zeros_like(params.mu_u), np.zeros_like(params.log_s_u),
        np.zeros_like(params.mu_v), np.zeros_like(params.log_s_v),
    )
    loglik = 0.0
    if data.n_ratings:
        by_user, by_item = _scatter if _scatter is not None else _scatter_matrices(data)
        ii, jj, rr = data.user_idx, data.item_idx, data.rating
        const = -0.5 * data.n_ratings * np.log(2.0 * np.pi * hp.sigma2)
        for eps_u, eps_v in noise:
            u = params.mu_u + s_u * eps_u
            v = params.mu_v + s_v * eps_v
            dots = np.einsum("ij,ij->i", u[ii], v[jj])
            mean = sigmoid(dots)
            resid = rr - mean
            loglik += const - np.sum(resid**2) / (2.0 * hp.sigma2)
            # d(log lik)/d(dot) for each observation
            coef = resid * mean * (1.0 - mean) / hp.sigma2
            g_u = by_user @ (coef[:, None] * v[jj])
            g_v = by_item @ (coef[:, None] * u[ii])
            grad.mu_u += g_u
            grad.mu_v += g_v
            grad.log_s_u += g_u * (u - params.mu_u)
            grad.log_s_v += g_v * (v - params.mu_v)
        n = len(noise)
        loglik /= n
        grad.mu_u /= n
        grad.mu_v /= n
        grad.log_s_u /= n
        grad.log_s_v /= n
    # analytic KL part: d/dmu = mu, d/dlog_s = sigma^2 - 1
    grad.mu_u -= params.mu_u
    grad.mu_v -= params.mu_v
    grad.log_s_u -= s_u**2 - 1.0
    grad.log_s_v -= s_v**2 - 1.0
    return float(loglik - _total_kl(params)), grad


def elbo_value_with_noise(params: VariationalParams, data: RatingDataset,
                          hp: ModelHyperparams, noise) -> float:
    """ELBO estimate only (no gradient work) for explicit base noise."""
    loglik = 0.0
    if data.n_ratings:
        s_u = np.exp(params.log_s_u)
        s_v = np.exp(params.log_s_v)
        ii, jj, rr = data.user_idx, data.item_idx, data.rating
        const = -0.5 * data.n_ratings * np.log(2.0 * np.pi * hp.sigma2)
        for eps_u, eps_v in noise:
            u = params.mu_u + s_u * eps_u
            v = params.mu_v + s_v * eps_v
            resid = rr - sigmoid(np.einsum("ij,ij->i", u[ii], v[jj]))
            loglik += const - np.sum(resid**2) / (2.0 * hp.sigma2)
        loglik /= len(noise)
    return float(loglik - _total_kl(params))


def elbo_estimate(params: VariationalParams, data: RatingDataset,
                  hp: ModelHyperparams, mc_samples: int, rng) -> float:
    """Monte Carlo ELBO with analytic KL; exact when there are no ratings."""
    return elbo_value_with_noise(params, data, hp, draw_noise(params, mc_samples, rng))


def elbo_gradient(params: VariationalParams, data: RatingDataset,
                  hp: ModelHyperparams, mc_samples: int, rng) -> VariationalParams:
    """Pathwise ELBO gradient; same-seeded rng reproduces the estimate's noise."""
    _, grad = elbo_with_noise(params, data, hp, draw_noise(params, mc_samples, rng))
    return grad


def init_params(n_users: int, n_items: int, cfg: ViConfig) -> VariationalParams:
    rng = np.random.default_rng(cfg.seed)
    return VariationalParams(
        rng.normal(0.0, cfg.init_mu_scale, size=(n_users, cfg.k)),
        np.full((n_users, cfg.k), cfg.init_log_s),
        rng.normal(0.0, cfg.init_mu_scale, size=(n_items, cfg.k)),
        np.full((n_items, cfg.k), cfg.init_log_s),
    )


def vi_train(data: RatingDataset, hp: ModelHyperparams, cfg: ViConfig):
    """Fixed-rate gradient ascent on the ELBO; returns (params, elbo trace).

    Gradients use fresh noise every epoch; the per-epoch trace entry is
    recorded with the same fixed monitoring noise each time (common
    random numbers), so trace movement reflects parameter movement
    rather than estimator jitter. Fully deterministic given the seed.
    """
    params = init_params(data.n_users, data.n_items, cfg)
    rng = np.random.default_rng(cfg.seed + 1)
    monitor_seed = cfg.seed + 2
    scatter = _scatter_matrices(data) if data.n_ratings else None
    trace = []
    for epoch in range(cfg.epochs):
        noise = draw_noise(params, cfg.mc_samples, rng)
        value, grad = elbo_with_noise(params, data, hp, noise, _scatter=scatter)
        if not np.isfinite(value):
            raise DivergenceError("ELBO became non-finite (reduce learning_rate)", epoch)
        params.mu_u += cfg.learning_rate * grad.mu_u
        params.log_s_u += cfg.learning_rate * grad.log_s_u
        params.mu_v += cfg.learning_rate * grad.mu_v
        params.log_s_v += cfg.learning_rate * grad.log_s_v
        monitor = draw_noise(params, 1, np.random.default_rng(monitor_seed))
        trace.append(elbo_value_with_noise(params, data, hp, monitor))
    return params, trace



def vi_predict(params: VariationalParams, i: int, j: int, scale: RatingScale,
               mc_samples: int = 0, rng=None) -> float:
    """Predicted rating for one pair; mc_samples=0 is plug-in at the means."""
    if mc_samples == 0:
        return float(denormalize_rating(sigmoid(float(params.mu_u[i] @ params.mu_v[j])), scale))
    if rng is None:
        rng = np.random.default_rng(0)
    u = params.mu_u[i] + np.exp(params.log_s_u[i]) * rng.standard_normal((mc_samples, params.k))
    v = params.mu_v[j] + np.exp(params.log_s_v[j]) * rng.standard_normal((mc_samples, params.k))
    return float(denormalize_rating(float(np.mean(sigmoid(np.einsum("sk,sk->s", u, v)))), scale))


def vi_predict_batch(params: VariationalParams, user_idx, item_idx,
                     scale: RatingScale, mc_samples: int = 0, rng=None):
    """Vectorized :func:`vi_predict` over paired index arrays."""
    user_idx = np.asarray(user_idx)
    item_idx = np.asarray(item_idx)
    mu_dots = np.einsum("ij,ij->i", params.mu_u[user_idx], params.mu_v[item_idx])
    if mc_samples == 0:
        return denormalize_rating(sigmoid(mu_dots), scale)
    if rng is None:
        rng = np.random.default_rng(0)
    acc = np.zeros(user_idx.shape, dtype=np.float64)
    mu_u, s_u = params.mu_u[user_idx], np.exp(params.log_s_u[user_idx])
    mu_v, s_v = params.mu_v[item_idx], np.exp(params.log_s_v[item_idx])
    for _ in range(mc_samples):
        u = mu_u + s_u * rng.standard_normal(mu_u.shape)
        v = mu_v + s_v * rng.standard_normal(mu_v.shape)
        acc += sigmoid(np.einsum("ij,ij->i", u, v))
    return denormalize_rating(acc / mc_samples, scale)


def export_trace(trace, path):
    """Write the per-epoch ELBO sidecar: epoch,elbo."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "elbo"])
        for epoch, value in enumerate(trace):
            writer.writerow([epoch, repr(float(value))])
