#!/usr/bin/env python3
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Adaptive independent Metropolis-within-Gibbs sampler for linear SEP
quantile regression.

One sweep updates beta (one joint Gaussian block), sigma (log-normal
proposal) and alpha (normal proposal truncated to (0, 2)) with independence
Metropolis steps, then draws the Bayesian lasso mixing layer (omega,
gamma^2) from its full conditionals. After every sweep the proposal moments
move toward the current state with step 1 / (C sqrt(i + 1))."""

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg

from sepqrlib import SamplerError, SpecError
from sepqrlib.diagnostics import PosteriorDraws
from sepqrlib.distributions import (
    LOG_2PI,
    GigParams,
    beta_log_pdf,
    beta_sample,
    exponential_log_pdf,
    gamma_log_pdf,
    gamma_sample,
    gig_sample,
    inverse_gamma_log_pdf,
    inverse_gamma_sample,
    normal_log_pdf,
    sep_log_kappa,
    sep_log_kernel,
    truncated_normal_log_pdf,
    truncated_normal_sample,
)

ALPHA_LOWER = 0.0
ALPHA_UPPER = 2.0
COVARIANCE_FLOOR = 1e-10
MAD_FLOOR = 1e-8
MAX_INIT_TRIES = 100
LOG_FLOAT_MAX = math.log(np.finfo(float).max)

# Called with (block label, state before the move, candidate state,
# log acceptance ratio, accepted flag) after every Metropolis decision.
StepMonitor = Callable[[str, "ChainState", "ChainState", float, bool], None]
# Called with (iteration, total iterations, acceptance rates so far).
ProgressCallback = Callable[[int, int, Dict[str, float]], None]


class PriorHyper(NamedTuple):
    psi: float = 0.1
    varpi: float = 0.1
    a: float = 0.001
    b: float = 0.001
    c: float = 2.0
    d: float = 2.0
    a_h: float = 0.001
    b_h: float = 0.001
    beta_prior: str = "lasso"
    beta_prior_variance: float = 100.0

    @classmethod
    def from_mapping(cls, mapping) -> "PriorHyper":
        """Build from any mapping holding some of the field names; missing
        or None values keep their defaults."""
        return cls(**{k: mapping[k] for k in cls._fields if mapping.get(k) is not None})

    def validate(self) -> "PriorHyper":
        for name in ("psi", "varpi", "a", "b", "c", "d", "a_h", "b_h"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise SpecError(f"hyperparameter {name} must be positive, got {value}")
        if self.beta_prior not in ("lasso", "gaussian"):
            raise SpecError(f"Unknown beta prior '{self.beta_prior}'")
        if not self.beta_prior_variance > 0.0:
            raise SpecError("beta_prior_variance must be positive")
        return self


class SamplerSettings(NamedTuple):
    iterations: int = 50000
    burn_in: int = 10000
    seed: int = 0
    adapt_C: float = 10.0
    fixed_alpha: Optional[float] = None
    adaptation: str = "accumulate"

    @classmethod
    def from_mapping(cls, mapping) -> "SamplerSettings":
        """As PriorHyper.from_mapping. An explicit iteration count without a
        burn-in keeps the default burn-in, capped at half the chain."""
        values = {k: mapping[k] for k in cls._fields if mapping.get(k) is not None}
        if "iterations" in values and "burn_in" not in values:
            default = cls._field_defaults["burn_in"]
            values["burn_in"] = min(default, values["iterations"] // 2)
        return cls(**values)

    def validate(self) -> "SamplerSettings":
        if not self.iterations > self.burn_in >= 0:
            raise SpecError(
                f"need iterations > burn_in >= 0, got {self.iterations}, "
                f"{self.burn_in}"
            )
        if not self.adapt_C > 0.0:
            raise SpecError("adapt_C must be positive")
        if self.fixed_alpha is not None and not (
            ALPHA_LOWER < self.fixed_alpha <= ALPHA_UPPER
        ):
            raise SpecError(f"fixed_alpha must lie in (0, 2], got {self.fixed_alpha}")
        if self.adaptation not in ("accumulate", "average"):
            raise SpecError(f"Unknown adaptation rule '{self.adaptation}'")
        return self


class LinearModelSpec:
    """Data, quantile level, hyperparameters and sampler settings of a
    linear quantile regression."""

    model_kind = "linear"

    def __init__(
        self,
        X,
        y,
        tau: float,
        prior_hyper: Optional[PriorHyper] = None,
        sampler: Optional[SamplerSettings] = None,
        names: Optional[List[str]] = None,
    ):
        self.X = np.array(X, dtype=float, ndmin=2)
        self.y = np.array(y, dtype=float).ravel()
        if self.X.shape[0] != self.y.size:
            raise SpecError(
                f"design has {self.X.shape[0]} rows but response has {self.y.size}"
            )
        T, p = self.X.shape
        if not T >= p >= 1:
            raise SpecError(f"need T >= p >= 1, got T={T}, p={p}")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise SpecError("design and response must be finite")
        if not 0.0 < tau < 1.0:
            raise SpecError(f"tau must lie in (0, 1), got {tau}")
        self.tau = float(tau)
        self.prior_hyper = (prior_hyper or PriorHyper()).validate()
        self.sampler = (sampler or SamplerSettings()).validate()
        self.names = list(names) if names else [f"x{j + 1}" for j in range(p)]
        if len(self.names) != p:
            raise SpecError(f"{len(self.names)} names for {p} columns")

    @property
    def T(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def lasso(self) -> bool:
        return self.prior_hyper.beta_prior == "lasso"


@dataclass
class ChainState:
    beta: np.ndarray
    sigma: float
    alpha: float
    omega: np.ndarray
    gamma_sq: np.ndarray
    # Contribution of the smooth terms to the location; None for linear models.
    offset: Optional[np.ndarray] = None
    log_lik: float = float("nan")


# Likelihood and priors


def sep_log_likelihood(
    beta, sigma: float, alpha: float, spec: LinearModelSpec, offset=None
) -> float:
    """Sum over observations of the SEP log density with location
    x_t' beta (+ offset_t)."""
    if not (sigma > 0.0 and alpha > 0.0 and math.isfinite(sigma)):
        return -math.inf
    location = spec.X @ beta
    if offset is not None:
        location = location + offset
    kernel = sep_log_kernel(spec.y - location, sigma, alpha, spec.tau)
    return float(spec.T * (sep_log_kappa(alpha) - math.log(sigma)) + kernel.sum())


def beta_log_prior(beta: np.ndarray, omega: np.ndarray) -> float:
    """log N(beta; 0, diag(omega))"""
    return float(np.sum(normal_log_pdf(beta, 0.0, omega)))


def log_prior(state: ChainState, spec: LinearModelSpec) -> float:
    """Joint log prior of the linear parameters and the lasso layer."""
    hyper = spec.prior_hyper
    if not (state.sigma > 0.0 and np.all(state.omega > 0.0)):
        return -math.inf
    if spec.lasso and not np.all(state.gamma_sq > 0.0):
        return -math.inf
    total = beta_log_prior(state.beta, state.omega)
    if spec.lasso:
        for omega_j, gamma_sq_j in zip(state.omega, state.gamma_sq):
            total += exponential_log_pdf(omega_j, 2.0 / gamma_sq_j)
            total += gamma_log_pdf(gamma_sq_j, hyper.psi, hyper.varpi)
    total += inverse_gamma_log_pdf(state.sigma, hyper.a, hyper.b)
    if spec.sampler.fixed_alpha is None:
        # alpha lives on the open interval whatever the Beta shape
        if not ALPHA_LOWER < state.alpha < ALPHA_UPPER:
            return -math.inf
        total += beta_log_pdf(state.alpha, hyper.c, hyper.d, ALPHA_LOWER, ALPHA_UPPER)
    return float(total)


# Proposals


def adaptation_step(i: int, C: float = 10.0) -> float:
    """Diminishing adaptation step 1 / (C sqrt(i))."""
    return 1.0 / (C * math.sqrt(i))


class GaussianBlockProposal:
    """Adapted multivariate Gaussian independence proposal."""

    def __init__(self, mean, cov):
        self.mean = np.array(mean, dtype=float)
        self.cov = np.array(cov, dtype=float)
        try:
            self.chol = np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError as err:
            raise SamplerError("Initial proposal covariance is not definite") from err
        self.resets = 0

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self.chol @ rng.standard_normal(self.mean.size)

    def log_density(self, x: np.ndarray) -> float:
        z = linalg.solve_triangular(self.chol, x - self.mean, lower=True)
        log_det = 2.0 * np.sum(np.log(np.diag(self.chol)))
        return float(-0.5 * (self.mean.size * LOG_2PI + log_det + z @ z))

    def adapt(self, x: np.ndarray, step: float, rule: str = "accumulate"):
        innovation = np.asarray(x, dtype=float) - self.mean
        outer = np.outer(innovation, innovation)
        self.mean = self.mean + step * innovation
        if rule == "accumulate":
            cov = self.cov + step * outer
        else:
            cov = self.cov + step * (outer - self.cov)
        cov = 0.5 * (cov + cov.T) + COVARIANCE_FLOOR * np.eye(self.mean.size)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            # keep the last definite matrix
            self.resets += 1
            return
        self.cov, self.chol = cov, chol


class ScalarProposal:
    """Adapted mean and variance of a univariate proposal."""

    def __init__(self, mean: float, variance: float):
        self.mean = float(mean)
        self.variance = float(variance)

    def adapt(self, x: float, step: float, rule: str = "accumulate"):
        innovation = x - self.mean
        self.mean += step * innovation
        if rule == "accumulate":
            variance = self.variance + step * innovation ** 2
        else:
            variance = self.variance + step * (innovation ** 2 - self.variance)
        variance += COVARIANCE_FLOOR
        if variance > 0.0 and math.isfinite(variance):
            self.variance = variance


class AdaptiveProposal:
    """Independence proposals of the beta, sigma and alpha blocks."""

    def __init__(
        self,
        beta: GaussianBlockProposal,
        log_sigma: ScalarProposal,
        alpha: ScalarProposal,
    ):
        self.beta = beta
        self.log_sigma = log_sigma
        self.alpha = alpha
        self.iteration = 0

    @property
    def mu_beta(self) -> np.ndarray:
        return self.beta.mean

    @property
    def Sigma_beta(self) -> np.ndarray:
        return self.beta.cov

    @property
    def mu_sigma_log(self) -> float:
        return self.log_sigma.mean

    @property
    def psi_sigma_log(self) -> float:
        return self.log_sigma.variance

    @property
    def mu_alpha(self) -> float:
        return self.alpha.mean

    @property
    def psi_alpha(self) -> float:
        return self.alpha.variance

    def draw_sigma(self, rng: np.random.Generator) -> float:
        scale = math.sqrt(self.log_sigma.variance)
        log_sigma = rng.normal(self.log_sigma.mean, scale)
        # exp underflows to 0.0 on its own; overflow is mapped to inf
        return math.exp(log_sigma) if log_sigma < LOG_FLOAT_MAX else math.inf

    def sigma_log_density(self, sigma: float) -> float:
        """Density of sigma = exp(N(m, v)), Jacobian 1/sigma included.
        -inf for a sigma that underflowed to 0 or overflowed."""
        if not 0.0 < sigma < math.inf:
            return -math.inf
        log_sigma = math.log(sigma)
        moments = self.log_sigma.mean, self.log_sigma.variance
        density = normal_log_pdf(log_sigma, *moments)
        return float(density) - log_sigma

    def draw_alpha(self, rng: np.random.Generator) -> float:
        return truncated_normal_sample(
            self.alpha.mean, self.alpha.variance, ALPHA_LOWER, ALPHA_UPPER, rng
        )

    def alpha_log_density(self, alpha: float) -> float:
        return truncated_normal_log_pdf(
            alpha, self.alpha.mean, self.alpha.variance, ALPHA_LOWER, ALPHA_UPPER
        )


def least_squares_fit(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return coef


def initial_proposal(spec: LinearModelSpec, offset=None) -> AdaptiveProposal:
    """Beta proposal centred on least squares with covariance 0.1 I, log
    sigma centred on the log residual MAD with variance 0.25, alpha centred
    on 1 with variance 0.25."""
    target = spec.y if offset is None else spec.y - offset
    beta_ls = least_squares_fit(spec.X, target)
    resid = target - spec.X @ beta_ls
    mad = float(np.median(np.abs(resid - np.median(resid))))
    return AdaptiveProposal(
        GaussianBlockProposal(beta_ls, 0.1 * np.eye(spec.p)),
        ScalarProposal(math.log(max(mad, MAD_FLOOR)), 0.25),
        ScalarProposal(1.0, 0.25),
    )


def initial_state(
    spec: LinearModelSpec, rng: np.random.Generator, offset=None
) -> ChainState:
    """Draw beta ~ N(0, 1), sigma ~ IG(a, b) and alpha ~ Beta(c, d) on (0, 2)
    until the likelihood and prior are finite."""
    hyper = spec.prior_hyper
    fixed_alpha = spec.sampler.fixed_alpha
    if spec.lasso:
        omega = np.ones(spec.p)
    else:
        omega = np.full(spec.p, hyper.beta_prior_variance)
    gamma_sq = np.ones(spec.p)
    for _ in range(MAX_INIT_TRIES):
        beta = rng.standard_normal(spec.p)
        sigma = float(inverse_gamma_sample(hyper.a, hyper.b, rng))
        if fixed_alpha is None:
            alpha = float(beta_sample(hyper.c, hyper.d, rng, ALPHA_LOWER, ALPHA_UPPER))
        else:
            alpha = float(fixed_alpha)
        state = ChainState(beta, sigma, alpha, omega, gamma_sq, offset)
        if not (math.isfinite(sigma) and sigma > 0.0):
            continue
        state.log_lik = sep_log_likelihood(beta, sigma, alpha, spec, offset)
        if math.isfinite(state.log_lik) and math.isfinite(log_prior(state, spec)):
            return state
    raise SamplerError(
        f"No finite starting point after {MAX_INIT_TRIES} initial draws"
    )


# Metropolis steps


def _metropolis(
    label: str,
    state: ChainState,
    candidate: ChainState,
    log_ratio: float,
    rng: np.random.Generator,
    monitor: Optional[StepMonitor] = None,
) -> Tuple[ChainState, bool]:
    u = rng.uniform()
    accepted = bool(u < math.exp(min(log_ratio, 0.0)))
    if monitor is not None:
        monitor(label, state, candidate, log_ratio, accepted)
    return (candidate if accepted else state), accepted


def beta_log_acceptance(
    state: ChainState, candidate: ChainState, proposal: AdaptiveProposal
) -> float:
    return (
        candidate.log_lik
        - state.log_lik
        + beta_log_prior(candidate.beta, state.omega)
        - beta_log_prior(state.beta, state.omega)
        + proposal.beta.log_density(state.beta)
        - proposal.beta.log_density(candidate.beta)
    )


def img_step_beta(
    state: ChainState,
    proposal: AdaptiveProposal,
    spec: LinearModelSpec,
    rng: np.random.Generator,
    monitor: Optional[StepMonitor] = None,
) -> Tuple[ChainState, bool]:
    """Independence Metropolis move of the whole coefficient vector, with
    the Gaussian prior given the current omega."""
    beta_star = proposal.beta.draw(rng)
    candidate = replace(
        state,
        beta=beta_star,
        log_lik=sep_log_likelihood(
            beta_star, state.sigma, state.alpha, spec, state.offset
        ),
    )
    log_ratio = beta_log_acceptance(state, candidate, proposal)
    return _metropolis("beta", state, candidate, log_ratio, rng, monitor)


def sigma_log_acceptance(
    state: ChainState,
    candidate: ChainState,
    proposal: AdaptiveProposal,
    spec: LinearModelSpec,
) -> float:
    if candidate.log_lik == -math.inf:
        return -math.inf
    hyper = spec.prior_hyper
    return (
        candidate.log_lik
        - state.log_lik
        + inverse_gamma_log_pdf(candidate.sigma, hyper.a, hyper.b)
        - inverse_gamma_log_pdf(state.sigma, hyper.a, hyper.b)
        + proposal.sigma_log_density(state.sigma)
        - proposal.sigma_log_density(candidate.sigma)
    )


def img_step_sigma(
    state: ChainState,
    proposal: AdaptiveProposal,
    spec: LinearModelSpec,
    rng: np.random.Generator,
    monitor: Optional[StepMonitor] = None,
) -> Tuple[ChainState, bool]:
    sigma_star = proposal.draw_sigma(rng)
    candidate = replace(
        state,
        sigma=sigma_star,
        log_lik=sep_log_likelihood(
            state.beta, sigma_star, state.alpha, spec, state.offset
        ),
    )
    log_ratio = sigma_log_acceptance(state, candidate, proposal, spec)
    return _metropolis("sigma", state, candidate, log_ratio, rng, monitor)


def alpha_log_acceptance(
    state: ChainState,
    candidate: ChainState,
    proposal: AdaptiveProposal,
    spec: LinearModelSpec,
) -> float:
    hyper = spec.prior_hyper
    if not ALPHA_LOWER < candidate.alpha < ALPHA_UPPER:
        return -math.inf
    prior_star = beta_log_pdf(
        candidate.alpha, hyper.c, hyper.d, ALPHA_LOWER, ALPHA_UPPER
    )
    if prior_star == -math.inf:
        return -math.inf
    return (
        candidate.log_lik
        - state.log_lik
        + prior_star
        - beta_log_pdf(state.alpha, hyper.c, hyper.d, ALPHA_LOWER, ALPHA_UPPER)
        + proposal.alpha_log_density(state.alpha)
        - proposal.alpha_log_density(candidate.alpha)
    )


def img_step_alpha(
    state: ChainState,
    proposal: AdaptiveProposal,
    spec: LinearModelSpec,
    rng: np.random.Generator,
    monitor: Optional[StepMonitor] = None,
) -> Tuple[ChainState, bool]:
    """Truncated normal independence move of alpha. Callers skip it when
    alpha is fixed."""
    alpha_star = proposal.draw_alpha(rng)
    candidate = replace(
        state,
        alpha=alpha_star,
        log_lik=sep_log_likelihood(
            state.beta, state.sigma, alpha_star, spec, state.offset
        ),
    )
    log_ratio = alpha_log_acceptance(state, candidate, proposal, spec)
    return _metropolis("alpha", state, candidate, log_ratio, rng, monitor)


# Gibbs steps


def gibbs_update_lasso(
    state: ChainState, spec: LinearModelSpec, rng: np.random.Generator
) -> ChainState:
    """omega_j ~ GIG(1/2, chi=beta_j^2, psi=gamma_j^2), then
    gamma_j^2 ~ Gamma(psi + 1, rate varpi + omega_j / 2), coordinate by
    coordinate. A beta_j of exactly 0 falls to the Gamma(1/2) limit inside
    gig_sample."""
    if not spec.lasso:
        return state
    hyper = spec.prior_hyper
    omega = np.empty(spec.p)
    gamma_sq = np.empty(spec.p)
    for j in range(spec.p):
        omega[j] = gig_sample(
            GigParams(0.5, float(state.beta[j]) ** 2, float(state.gamma_sq[j])), rng
        )
        gamma_sq[j] = gamma_sample(hyper.psi + 1.0, hyper.varpi + omega[j] / 2.0, rng)
    return replace(state, omega=omega, gamma_sq=gamma_sq)


def adapt(
    proposal: AdaptiveProposal, state: ChainState, i: int, spec: LinearModelSpec
) -> AdaptiveProposal:
    """Move the proposal moments toward the state reached after sweep i.
    The proposal is updated in place and returned."""
    if i < 1:
        raise SamplerError(f"adaptation index must be positive, got {i}")
    settings = spec.sampler
    step = adaptation_step(i + 1, settings.adapt_C)
    proposal.beta.adapt(state.beta, step, settings.adaptation)
    proposal.log_sigma.adapt(math.log(state.sigma), step, settings.adaptation)
    if settings.fixed_alpha is None:
        proposal.alpha.adapt(state.alpha, step, settings.adaptation)
    proposal.iteration = i
    return proposal


class AcceptanceCounter:
    """Accepted / proposed tallies per block."""

    def __init__(self, labels):
        self.counts: Dict[str, List[int]] = {label: [0, 0] for label in labels}

    def add(self, label: str, accepted: bool):
        tally = self.counts.setdefault(label, [0, 0])
        tally[0] += int(accepted)
        tally[1] += 1

    def rates(self) -> Dict[str, float]:
        return {k: a / n for k, (a, n) in self.counts.items() if n}

    def as_dict(self) -> Dict[str, Tuple[int, int]]:
        return {k: (a, n) for k, (a, n) in self.counts.items()}


def linear_sweep(
    state: ChainState,
    proposal: AdaptiveProposal,
    spec: LinearModelSpec,
    rng: np.random.Generator,
    counter: AcceptanceCounter,
    monitor: Optional[StepMonitor] = None,
) -> ChainState:
    """beta, sigma and (unless fixed) alpha moves, then the lasso layer."""
    state, accepted = img_step_beta(state, proposal, spec, rng, monitor)
    counter.add("beta", accepted)
    state, accepted = img_step_sigma(state, proposal, spec, rng, monitor)
    counter.add("sigma", accepted)
    if spec.sampler.fixed_alpha is None:
        state, accepted = img_step_alpha(state, proposal, spec, rng, monitor)
        counter.add("alpha", accepted)
    return gibbs_update_lasso(state, spec, rng)


def linear_parameter_labels(spec: LinearModelSpec) -> List[str]:
    labels = [f"beta[{name}]" for name in spec.names] + ["sigma", "alpha"]
    if spec.lasso:
        labels += [f"omega[{name}]" for name in spec.names]
        labels += [f"gamma_sq[{name}]" for name in spec.names]
    return labels


def linear_state_row(state: ChainState, spec: LinearModelSpec) -> List[float]:
    row = list(state.beta) + [state.sigma, state.alpha]
    if spec.lasso:
        row += list(state.omega) + list(state.gamma_sq)
    return row


def chain_meta(spec: LinearModelSpec) -> Dict:
    settings = spec.sampler
    return {
        "N": settings.iterations,
        "M": settings.burn_in,
        "seed": settings.seed,
        "tau": spec.tau,
        "model": spec.model_kind,
        "fixed_alpha": settings.fixed_alpha,
    }


def run_linear_sampler(
    spec: LinearModelSpec,
    progress: Optional[ProgressCallback] = None,
    monitor: Optional[StepMonitor] = None,
) -> PosteriorDraws:
    """Run one chain and keep iterations M+1..N. Deterministic given the
    seed in spec.sampler."""
    settings = spec.sampler
    rng = np.random.default_rng(settings.seed)
    state = initial_state(spec, rng)
    proposal = initial_proposal(spec)
    blocks = ["beta", "sigma"] + (["alpha"] if settings.fixed_alpha is None else [])
    counter = AcceptanceCounter(blocks)

    keep = settings.iterations - settings.burn_in
    labels = linear_parameter_labels(spec)
    draws = np.empty((keep, len(labels)))
    log_lik = np.empty(keep)
    for i in range(1, settings.iterations + 1):
        state = linear_sweep(state, proposal, spec, rng, counter, monitor)
        adapt(proposal, state, i, spec)
        if i > settings.burn_in:
            row = i - settings.burn_in - 1
            draws[row] = linear_state_row(state, spec)
            log_lik[row] = state.log_lik
        if progress is not None:
            progress(i, settings.iterations, counter.rates())

    meta = chain_meta(spec)
    meta["proposal_resets"] = proposal.beta.resets
    return PosteriorDraws(
        labels,
        draws,
        counter.as_dict(),
        meta,
        iterations=np.arange(settings.burn_in + 1, settings.iterations + 1),
        log_likelihood=log_lik,
    )
