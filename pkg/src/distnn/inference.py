"""Posterior sampling of (beta, sigma) from training labels.

Two samplers over the doubly-intractable posterior: the exchange algorithm
(auxiliary label field drawn at the proposed parameters, all normalizing
constants cancel in the acceptance ratio) and a pseudolikelihood
Metropolis-Hastings approximation (product of full-conditionals, no auxiliary
draws).  A discrete-grid variant of the exchange sampler backs the
exact-enumeration oracle checks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .mrf import agreement_sum, enumerate_log_z, sample_field
from .weights import WeightModel, compute_weights


@dataclass(frozen=True)
class Priors:
    """beta ~ Normal(0, beta_sd^2); sigma ~ Uniform(0, sigma_upper)."""

    beta_sd: float = 50.0
    sigma_upper: float = 100.0

    def __post_init__(self):
        if self.beta_sd <= 0 or self.sigma_upper <= 0:
            raise ValueError("prior scale parameters must be positive")


@dataclass(frozen=True)
class ProposalConfig:
    """Standard deviations of the symmetric Gaussian random-walk proposal."""

    beta_step: float = 0.5
    sigma_step: float = 0.1

    def __post_init__(self):
        if self.beta_step <= 0 or self.sigma_step <= 0:
            raise ValueError("proposal steps must be positive")


@dataclass(frozen=True)
class ChainConfig:
    n_iterations: int
    n_burnin: int
    aux_sweeps: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.n_iterations > self.n_burnin >= 0:
            raise ValueError("need n_iterations > n_burnin >= 0")
        if self.aux_sweeps < 1:
            raise ValueError("aux_sweeps must be >= 1")


@dataclass
class PosteriorTrace:
    """Full per-iteration record of a chain, burn-in included.

    ``samples`` and ``acceptance_rate`` only look at the post-burn-in part;
    ``log_q`` holds beta * S(y_train, w_sigma) at the state of each iteration.
    """

    beta: np.ndarray
    sigma: np.ndarray
    accepted: np.ndarray
    log_q: np.ndarray
    n_burnin: int
    interrupted: bool = False

    @property
    def n_iterations(self) -> int:
        return len(self.beta)

    @property
    def samples(self) -> np.ndarray:
        """Post-burn-in (beta, sigma) pairs, shape (J, 2)."""
        return np.column_stack([self.beta, self.sigma])[self.n_burnin:]

    @property
    def acceptance_rate(self) -> float:
        post = self.accepted[self.n_burnin:]
        return float(post.mean()) if post.size else 0.0


def median_offdiag_distance(distances: np.ndarray) -> float:
    """Median of the strictly-upper-triangle entries; the sampler's scale anchor."""
    iu = np.triu_indices_from(distances, k=1)
    med = float(np.median(distances[iu]))
    if not np.isfinite(med) or med <= 0:
        raise ValueError("median pairwise distance must be positive and finite")
    return med


def default_proposal(distances: np.ndarray) -> ProposalConfig:
    """beta_step 0.5; sigma_step at 10% of the median pairwise distance."""
    return ProposalConfig(beta_step=0.5, sigma_step=0.1 * median_offdiag_distance(distances))


def log_exchange_ratio(
    beta: float,
    beta_prop: float,
    s_obs_cur: float,
    s_obs_prop: float,
    s_aux_cur: float,
    s_aux_prop: float,
    priors: Priors,
) -> float:
    """Log acceptance ratio of the exchange move.

    s_obs_* are agreement sums of the observed labels under the current and
    proposed weight matrices; s_aux_* likewise for the auxiliary labels.
    Written so that swapping the roles of current and proposed states negates
    the result exactly.
    """
    t_like = (beta_prop * s_obs_prop - beta * s_obs_cur) + (
        beta * s_aux_cur - beta_prop * s_aux_prop
    )
    t_prior = (beta * beta - beta_prop * beta_prop) / (2.0 * priors.beta_sd * priors.beta_sd)
    return t_like + t_prior


def _exchange_move(
    beta: float,
    sigma: float,
    w: np.ndarray,
    s_obs: float,
    y: np.ndarray,
    model: WeightModel,
    distances: np.ndarray,
    priors: Priors,
    proposal: ProposalConfig,
    aux_sweeps: int,
    n_classes: int,
    rng: np.random.Generator,
):
    """One exchange transition given cached weights/statistics for the current
    state.  Returns (beta, sigma, w, s_obs, accepted)."""
    beta_prop = beta + rng.normal(0.0, proposal.beta_step)
    sigma_prop = sigma + rng.normal(0.0, proposal.sigma_step)
    if not 0.0 < sigma_prop < priors.sigma_upper:
        return beta, sigma, w, s_obs, False
    try:
        w_prop = compute_weights(model, distances, sigma_prop)
    except ValueError:
        # numerically unevaluable proposal (total kernel underflow): reject
        return beta, sigma, w, s_obs, False
    s_obs_prop = agreement_sum(y, w_prop)
    y_aux = sample_field(w_prop, beta_prop, aux_sweeps, y, n_classes, rng)
    s_aux_cur = agreement_sum(y_aux, w)
    s_aux_prop = agreement_sum(y_aux, w_prop)
    log_r = log_exchange_ratio(
        beta, beta_prop, s_obs, s_obs_prop, s_aux_cur, s_aux_prop, priors
    )
    if np.log(rng.random()) < log_r:
        return beta_prop, sigma_prop, w_prop, s_obs_prop, True
    return beta, sigma, w, s_obs, False


def exchange_step(
    state,
    y: np.ndarray,
    model: WeightModel,
    distances: np.ndarray,
    priors: Priors,
    proposal: ProposalConfig,
    aux_sweeps: int,
    n_classes: int,
    rng: np.random.Generator,
):
    """Single exchange update from ``state`` (anything with .beta/.sigma).

    Returns (MrfParams, accepted).  Proposals with sigma outside the prior
    support are immediate rejections.  Convenience wrapper; a long chain
    should use run_exchange, which caches the current-state weight matrix.
    """
    from .mrf import MrfParams

    w = compute_weights(model, distances, state.sigma)
    s_obs = agreement_sum(y, w)
    beta, sigma, _, _, accepted = _exchange_move(
        state.beta, state.sigma, w, s_obs, y, model, distances,
        priors, proposal, aux_sweeps, n_classes, rng,
    )
    return MrfParams(beta=beta, sigma=sigma), accepted


def run_exchange(
    y: np.ndarray,
    model: WeightModel,
    distances: np.ndarray,
    priors: Priors,
    proposal: ProposalConfig,
    chain: ChainConfig,
    n_classes: int,
    max_seconds: float | None = None,
) -> PosteriorTrace:
    """Exchange-algorithm chain over (beta, sigma).

    Starts at beta = 0 and sigma = median pairwise distance (clamped inside
    the prior support).  One weight-matrix build per proposal; the
    current-state matrix is carried between iterations.  If ``max_seconds``
    elapses the trace is truncated at the completed iteration and flagged.
    """
    rng = np.random.default_rng(chain.seed)
    t0 = time.perf_counter()
    beta = 0.0
    sigma = min(median_offdiag_distance(distances), 0.5 * priors.sigma_upper)
    w = compute_weights(model, distances, sigma)
    s_obs = agreement_sum(y, w)

    T = chain.n_iterations
    betas = np.empty(T)
    sigmas = np.empty(T)
    accepts = np.zeros(T, dtype=bool)
    log_qs = np.empty(T)
    done = T
    for t in range(T):
        if max_seconds is not None and time.perf_counter() - t0 > max_seconds:
            done = t
            break
        beta, sigma, w, s_obs, acc = _exchange_move(
            beta, sigma, w, s_obs, y, model, distances,
            priors, proposal, chain.aux_sweeps, n_classes, rng,
        )
        betas[t] = beta
        sigmas[t] = sigma
        accepts[t] = acc
        log_qs[t] = beta * s_obs
    return PosteriorTrace(
        beta=betas[:done],
        sigma=sigmas[:done],
        accepted=accepts[:done],
        log_q=log_qs[:done],
        n_burnin=min(chain.n_burnin, done),
        interrupted=done < T,
    )


def log_pseudolikelihood(
    y: np.ndarray, w: np.ndarray, beta: float, n_classes: int
) -> float:
    """Sum over sites of the log full-conditional of the observed label:
    the product-of-conditionals approximation to log pi(y)."""
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    wsym = w + w.T
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y - 1] = 1.0
    scores = beta * (wsym @ onehot)
    lse = logsumexp(scores, axis=1)
    return float((scores[np.arange(n), y - 1] - lse).sum())


def run_pseudo_mh(
    y: np.ndarray,
    model: WeightModel,
    distances: np.ndarray,
    priors: Priors,
    proposal: ProposalConfig,
    chain: ChainConfig,
    n_classes: int,
    max_seconds: float | None = None,
) -> PosteriorTrace:
    """Random-walk Metropolis-Hastings on (beta, sigma) with the
    pseudolikelihood in place of the intractable likelihood.  No auxiliary
    draws; ``chain.aux_sweeps`` is ignored.  Same initialization, proposal
    mechanics, and trace format as run_exchange."""
    rng = np.random.default_rng(chain.seed)
    t0 = time.perf_counter()
    beta = 0.0
    sigma = min(median_offdiag_distance(distances), 0.5 * priors.sigma_upper)
    w = compute_weights(model, distances, sigma)
    lpl = log_pseudolikelihood(y, w, beta, n_classes)
    s_obs = agreement_sum(y, w)

    T = chain.n_iterations
    betas = np.empty(T)
    sigmas = np.empty(T)
    accepts = np.zeros(T, dtype=bool)
    log_qs = np.empty(T)
    done = T
    for t in range(T):
        if max_seconds is not None and time.perf_counter() - t0 > max_seconds:
            done = t
            break
        beta_prop = beta + rng.normal(0.0, proposal.beta_step)
        sigma_prop = sigma + rng.normal(0.0, proposal.sigma_step)
        try:
            in_support = 0.0 < sigma_prop < priors.sigma_upper
            w_prop = compute_weights(model, distances, sigma_prop) if in_support else None
        except ValueError:
            w_prop = None
        if w_prop is not None:
            lpl_prop = log_pseudolikelihood(y, w_prop, beta_prop, n_classes)
            log_r = (lpl_prop - lpl) + (beta * beta - beta_prop * beta_prop) / (
                2.0 * priors.beta_sd * priors.beta_sd
            )
            if np.log(rng.random()) < log_r:
                beta, sigma, w, lpl = beta_prop, sigma_prop, w_prop, lpl_prop
                s_obs = agreement_sum(y, w)
                accepts[t] = True
        betas[t] = beta
        sigmas[t] = sigma
        log_qs[t] = beta * s_obs
    return PosteriorTrace(
        beta=betas[:done],
        sigma=sigmas[:done],
        accepted=accepts[:done],
        log_q=log_qs[:done],
        n_burnin=min(chain.n_burnin, done),
        interrupted=done < T,
    )


@dataclass
class GridExchangeResult:
    beta_grid: np.ndarray
    visit_freq: np.ndarray
    exact_posterior: np.ndarray
    acceptance_rate: float

    @property
    def tv_distance(self) -> float:
        return 0.5 * float(np.abs(self.visit_freq - self.exact_posterior).sum())


def exact_beta_grid_posterior(
    y: np.ndarray,
    w: np.ndarray,
    beta_grid: np.ndarray,
    n_classes: int,
    max_configs: int | None = None,
) -> np.ndarray:
    """Exact posterior over a discrete flat prior on ``beta_grid`` (sigma
    fixed through ``w``), computed by brute-force enumeration of z(beta)."""
    kwargs = {} if max_configs is None else {"max_configs": max_configs}
    s_obs = agreement_sum(y, w)
    log_p = np.array(
        [b * s_obs - enumerate_log_z(w, b, n_classes, **kwargs) for b in beta_grid]
    )
    log_p -= logsumexp(log_p)
    return np.exp(log_p)


def run_beta_grid_exchange(
    y: np.ndarray,
    w: np.ndarray,
    beta_grid: np.ndarray,
    n_steps: int,
    aux_sweeps: int,
    n_classes: int,
    seed: int,
    n_burnin: int = 1000,
) -> tuple[np.ndarray, float]:
    """Exchange sampler restricted to a discrete flat prior on ``beta_grid``.

    The proposal draws uniformly among the other grid points (symmetric), so
    only the exchange likelihood term survives in the acceptance ratio:
    (beta' - beta) * (S(y) - S(y_aux)).  Returns post-burn-in visit
    frequencies per grid point and the acceptance rate.
    """
    rng = np.random.default_rng(seed)
    K = len(beta_grid)
    s_obs = agreement_sum(y, w)
    k = 0
    counts = np.zeros(K)
    n_accept = 0
    for t in range(n_steps):
        j = int(rng.integers(K - 1))
        l = j + 1 if j >= k else j
        y_aux = sample_field(w, beta_grid[l], aux_sweeps, y, n_classes, rng)
        log_r = (beta_grid[l] - beta_grid[k]) * (s_obs - agreement_sum(y_aux, w))
        if np.log(rng.random()) < log_r:
            k = l
            if t >= n_burnin:
                n_accept += 1
        if t >= n_burnin:
            counts[k] += 1
    return counts / counts.sum(), n_accept / max(n_steps - n_burnin, 1)
