"""Metropolis-Hastings sampler for the factor posterior.

The proposal is a symmetric Gaussian random walk over every entry of
(U, V) jointly, so the proposal densities cancel in the acceptance
ratio. Samples are retained after burn-in with an optional thinning
stride; predictions average sigmoid(u.v) over retained samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import BpmfError
from .model import (
    LatentState,
    ModelHyperparams,
    RatingDataset,
    RatingScale,
    denormalize_rating,
    log_joint,
    sigmoid,
)


@dataclass(frozen=True)
class McmcConfig:
    n_steps: int = 20_000
    burn_in: int = 12_000
    thin: int = 1
    proposal_std: float = 0.004
    seed: int = 0
    init_scale: float = 1.0

    def __post_init__(self):
        if not 0 <= self.burn_in < self.n_steps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_steps")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not self.proposal_std > 0:
            raise ValueError("proposal_std must be positive")
        if self.init_scale < 0:
            raise ValueError("init_scale must be >= 0")


@dataclass
class ChainTrace:
    """Post-burn-in thinned samples plus per-step bookkeeping."""

    samples: list
    energies: np.ndarray
    accepted: np.ndarray

    @property
    def accept_count(self) -> int:
        return int(np.sum(self.accepted))

    @property
    def step_count(self) -> int:
        return int(self.accepted.size)

    @property
    def acceptance_rate(self) -> float:
        return self.accept_count / self.step_count if self.step_count else 0.0


def acceptance_ratio(log_g_current: float, log_g_proposed: float) -> float:
    """min(1, g(z')/g(z)) for a symmetric proposal, from log densities."""
    return float(min(1.0, np.exp(min(0.0, log_g_proposed - log_g_current))))


def mh_step(state: LatentState, data: RatingDataset, hp: ModelHyperparams,
            cfg: McmcConfig, rng, log_g_current=None):
    """One Metropolis-Hastings step.

    Draw order is fixed (U noise, V noise, then the acceptance uniform)
    so a seeded generator reproduces the chain exactly. Returns
    (retained state, accepted flag, log_joint of the retained state).
    """
    if log_g_current is None:
        log_g_current = log_joint(state, data, hp)
    proposed = LatentState(
        state.u + rng.normal(0.0, cfg.proposal_std, size=state.u.shape),
        state.v + rng.normal(0.0, cfg.proposal_std, size=state.v.shape),
    )
    log_g_proposed = log_joint(proposed, data, hp)
    if rng.uniform() < acceptance_ratio(log_g_current, log_g_proposed):
        return proposed, True, log_g_proposed
    return state, False, log_g_current


def run_chain(data: RatingDataset, hp: ModelHyperparams, cfg: McmcConfig) -> ChainTrace:
    """Run the full chain; deterministic for a given seed (PCG64).

    Retains the states at steps burn_in, burn_in + thin, ... (0-based).
    """
    rng = np.random.default_rng(cfg.seed)
    state = LatentState(
        rng.normal(0.0, cfg.init_scale, size=(data.n_users, hp.k)),
        rng.normal(0.0, cfg.init_scale, size=(data.n_items, hp.k)),
    )
    log_g = log_joint(state, data, hp)
    if not np.isfinite(log_g):
        raise BpmfError("non-finite log joint at initialization")

    samples = []
    energies = np.empty(cfg.n_steps)
    accepted = np.zeros(cfg.n_steps, dtype=bool)
    for t in range(cfg.n_steps):
        state, acc, log_g = mh_step(state, data, hp, cfg, rng, log_g_current=log_g)
        energies[t] = log_g
        accepted[t] = acc
        if t >= cfg.burn_in and (t - cfg.burn_in) % cfg.thin == 0:
            samples.append(state.copy())
    return ChainTrace(samples=samples, energies=energies, accepted=accepted)


def mcmc_predict(trace: ChainTrace, i: int, j: int, scale: RatingScale) -> float:
    """Posterior-predictive mean rating for one (user, item) pair."""
    if not trace.samples:
        raise BpmfError("cannot predict from an empty chain trace")
    vals = [sigmoid(float(s.u[i] @ s.v[j])) for s in trace.samples]
    return float(denormalize_rating(float(np.mean(vals)), scale))


def mcmc_predict_batch(trace: ChainTrace, user_idx, item_idx, scale: RatingScale):
    """Vectorized :func:`mcmc_predict` over paired index arrays."""
    if not trace.samples:
        raise BpmfError("cannot predict from an empty chain trace")
    user_idx = np.asarray(user_idx)
    item_idx = np.asarray(item_idx)
    acc = np.zeros(user_idx.shape, dtype=np.float64)
    for s in trace.samples:
        acc += sigmoid(np.einsum("ij,ij->i", s.u[user_idx], s.v[item_idx]))
    return denormalize_rating(acc / len(trace.samples), scale)


def export_energies(trace: ChainTrace, path):
    """Write the per-step energy sidecar: step,log_joint,accepted."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "log_joint", "accepted"])
        for t, (e, a) in enumerate(zip(trace.energies, trace.accepted)):
            writer.writerow([t, repr(float(e)), int(a)])


def discrete_mh_kernel(target: np.ndarray, proposal: np.ndarray) -> np.ndarray:
    """Exact MH transition matrix for a finite-state target.

    ``proposal[a, b]`` is q(b | a); the target need not be normalized.
    Off-diagonal: T[a, b] = q(b|a) * min(1, (g_b q(a|b)) / (g_a q(b|a)));
    the diagonal absorbs the rejection mass. Used to verify detailed
    balance and stationarity in closed form.
    """
    target = np.asarray(target, dtype=np.float64)
    proposal = np.asarray(proposal, dtype=np.float64)
    n = target.size
    kernel = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            if a == b or proposal[a, b] == 0.0:
                continue
            ratio = (target[b] * proposal[b, a]) / (target[a] * proposal[a, b])
            kernel[a, b] = proposal[a, b] * min(1.0, ratio)
        kernel[a, a] = 1.0 - kernel[a].sum()
    return kernel
