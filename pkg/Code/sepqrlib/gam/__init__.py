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

"""P-spline additive quantile regression with group lasso priors.

Each smooth term f_j(z) = B_j theta_j uses a centred B-spline basis and a
difference penalty D'D. The coefficient block is moved with an adapted
Gaussian independence proposal, and the group lasso mixing variables
phi_j and h_j^2 are drawn from their GIG full conditionals. The linear part
reuses the linear sampler sweep unchanged."""

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.interpolate import BSpline

from sepqrlib import SamplerError, SpecError
from sepqrlib.diagnostics import PosteriorDraws
from sepqrlib.distributions import (
    GigParams,
    gamma_log_pdf,
    gig_sample,
    inverse_gamma_log_pdf,
)
from sepqrlib.linearmodel import (
    AcceptanceCounter,
    AdaptiveProposal,
    ChainState,
    GaussianBlockProposal,
    LinearModelSpec,
    PriorHyper,
    ProgressCallback,
    SamplerSettings,
    StepMonitor,
    _metropolis,
    adapt,
    adaptation_step,
    chain_meta,
    initial_proposal,
    initial_state,
    least_squares_fit,
    linear_parameter_labels,
    linear_state_row,
    linear_sweep,
    log_prior,
    sep_log_likelihood,
)

PENALTY_RIDGE = 1e-8
RESIDUAL_VARIANCE_FLOOR = 1e-6


# Basis and penalty


def bspline_knots(z: np.ndarray, k: int, d: int) -> np.ndarray:
    """k interior knots equally spaced on [min z, max z], extended by d - 1
    equally spaced knots on each side for a spline of order d."""
    z = np.asarray(z, dtype=float)
    if k < 1 or d < 1:
        raise SpecError(f"need k >= 1 and d >= 1, got k={k}, d={d}")
    if not np.all(np.isfinite(z)):
        raise SpecError("spline covariate must be finite")
    z_min, z_max = float(z.min()), float(z.max())
    if not z_max > z_min:
        raise SpecError("spline covariate is constant")
    step = (z_max - z_min) / (k + 1)
    degree = d - 1
    return np.concatenate(
        (
            z_min - step * np.arange(degree, 0, -1),
            np.linspace(z_min, z_max, k + 2),
            z_max + step * np.arange(1, degree + 1),
        )
    )


def build_bspline_basis(z: np.ndarray, k: int, d: int, center: bool = True):
    """T x (k + d) B-spline design of order d (degree d - 1), column-centred
    unless center is False."""
    z = np.asarray(z, dtype=float)
    knots = bspline_knots(z, k, d)
    m = k + d
    basis = BSpline(knots, np.eye(m), d - 1, extrapolate=False)(z)
    basis = np.nan_to_num(basis, nan=0.0)
    if center:
        basis = basis - basis.mean(axis=0)
    return basis


def build_difference_matrix(m: int, delta: int = 2) -> np.ndarray:
    """(m - delta) x m matrix of delta-th order differences."""
    if delta < 1 or m <= delta:
        raise SpecError(f"need m > delta >= 1, got m={m}, delta={delta}")
    return np.diff(np.eye(m), n=delta, axis=0)


class SplineBlock:
    """Basis and penalty of one smooth term. Immutable once built, so one
    block can be shared by concurrent chains; the chain-specific theta,
    phi and h^2 live in BlockState."""

    def __init__(self, z, k: int = 20, d: int = 4, delta: int = 2, name: str = "z"):
        self.name = name
        self.z = np.array(z, dtype=float).ravel()
        self.k = k
        self.d = d
        self.delta = delta
        self.B = build_bspline_basis(self.z, k, d)
        self.D = build_difference_matrix(self.m, delta)
        self.penalty = self.D.T @ self.D
        # Orthonormal basis of the sum-to-zero coefficients. The centred
        # basis and the penalty both annihilate the constant vector, so
        # the block is sampled in these coordinates.
        self.constraint_basis = linalg.null_space(np.ones((1, self.m)))
        for array in (self.z, self.B, self.D, self.penalty, self.constraint_basis):
            array.setflags(write=False)

    @property
    def m(self) -> int:
        return self.k + self.d

    def quadratic_form(self, theta: np.ndarray) -> float:
        """theta' D'D theta, clipped at zero."""
        return max(float(theta @ self.penalty @ theta), 0.0)


class GamModelSpec(LinearModelSpec):
    """A LinearModelSpec plus smooth terms."""

    model_kind = "gam"

    def __init__(
        self,
        X,
        y,
        tau: float,
        blocks: List[SplineBlock],
        prior_hyper: Optional[PriorHyper] = None,
        sampler: Optional[SamplerSettings] = None,
        names: Optional[List[str]] = None,
    ):
        super().__init__(X, y, tau, prior_hyper, sampler, names)
        self.blocks = list(blocks)
        for block in self.blocks:
            if block.B.shape[0] != self.T:
                raise SpecError(
                    f"smooth term {block.name} has {block.B.shape[0]} rows, "
                    f"expected {self.T}"
                )


@dataclass
class BlockState:
    theta: np.ndarray
    phi: float = 1.0
    h_sq: float = 1.0


@dataclass
class GamChainState(ChainState):
    blocks: List[BlockState] = field(default_factory=list)


def smooth_offset(thetas: List[np.ndarray], spec: GamModelSpec):
    """sum_j B_j theta_j, or None without smooth terms."""
    if not spec.blocks:
        return None
    offset = np.zeros(spec.T)
    for block, theta in zip(spec.blocks, thetas):
        offset = offset + block.B @ theta
    return offset


def gam_log_likelihood(beta, thetas, sigma, alpha, spec: GamModelSpec) -> float:
    """SEP log likelihood with location x_t' beta + sum_j B_j[t] theta_j."""
    return sep_log_likelihood(beta, sigma, alpha, spec, smooth_offset(thetas, spec))


# Priors


def theta_log_prior_kernel(theta: np.ndarray, phi: float, block: SplineBlock) -> float:
    """-theta' D'D theta / (2 phi), the theta-dependent part of the
    conditional Gaussian prior."""
    return -block.quadratic_form(theta) / (2.0 * phi)


def block_log_prior(state: BlockState, block: SplineBlock, spec: GamModelSpec) -> float:
    """log pi(theta | phi) + log pi(phi | h^2) + log pi(h^2), up to the
    constant |D'D| term of the improper Gaussian layer.

    theta | phi ~ N(0, phi (D'D)^-), phi | h^2 ~ Gamma((m + 1)/2, rate h^2/2)
    and h^2 ~ IG(a_h / 2, b_h / 2)."""
    hyper = spec.prior_hyper
    if not (state.phi > 0.0 and state.h_sq > 0.0):
        return -math.inf
    m = block.m
    total = -0.5 * m * math.log(state.phi) + theta_log_prior_kernel(
        state.theta, state.phi, block
    )
    total += gamma_log_pdf(state.phi, (m + 1.0) / 2.0, state.h_sq / 2.0)
    total += inverse_gamma_log_pdf(state.h_sq, hyper.a_h / 2.0, hyper.b_h / 2.0)
    return float(total)


def gam_log_joint(state: GamChainState, spec: GamModelSpec) -> float:
    """Unnormalized log posterior of the whole hierarchical model."""
    total = state.log_lik + log_prior(state, spec)
    for block_state, block in zip(state.blocks, spec.blocks):
        total += block_log_prior(block_state, block, spec)
    return float(total)


# Block moves


class ThetaProposal:
    """Gaussian independence proposal of one coefficient block, adapted in
    sum-to-zero coordinates eta = Z' theta."""

    def __init__(self, block: SplineBlock, mean_theta, cov_eta):
        self.basis = block.constraint_basis
        self.gaussian = GaussianBlockProposal(self.basis.T @ mean_theta, cov_eta)

    @property
    def mean(self) -> np.ndarray:
        return self.basis @ self.gaussian.mean

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        return self.basis @ self.gaussian.draw(rng)

    def log_density(self, theta: np.ndarray) -> float:
        return self.gaussian.log_density(self.basis.T @ theta)

    def adapt(self, theta: np.ndarray, step: float, rule: str = "accumulate"):
        self.gaussian.adapt(self.basis.T @ theta, step, rule)


def theta_log_acceptance(
    j: int,
    state: GamChainState,
    candidate: GamChainState,
    proposal_j: ThetaProposal,
    spec: GamModelSpec,
) -> float:
    block = spec.blocks[j]
    phi = state.blocks[j].phi
    theta, theta_star = state.blocks[j].theta, candidate.blocks[j].theta
    return (
        candidate.log_lik
        - state.log_lik
        + theta_log_prior_kernel(theta_star, phi, block)
        - theta_log_prior_kernel(theta, phi, block)
        + proposal_j.log_density(theta)
        - proposal_j.log_density(theta_star)
    )


def img_step_theta_block(
    j: int,
    state: GamChainState,
    proposal_j: ThetaProposal,
    spec: GamModelSpec,
    rng: np.random.Generator,
    monitor: Optional[StepMonitor] = None,
) -> Tuple[GamChainState, bool]:
    """Independence Metropolis move of the j-th coefficient block."""
    block = spec.blocks[j]
    theta_star = proposal_j.draw(rng)
    offset = state.offset + block.B @ (theta_star - state.blocks[j].theta)
    blocks = list(state.blocks)
    blocks[j] = replace(blocks[j], theta=theta_star)
    candidate = replace(
        state,
        blocks=blocks,
        offset=offset,
        log_lik=sep_log_likelihood(
            state.beta, state.sigma, state.alpha, spec, offset
        ),
    )
    log_ratio = theta_log_acceptance(j, state, candidate, proposal_j, spec)
    label = f"theta[{block.name}]"
    return _metropolis(label, state, candidate, log_ratio, rng, monitor)


def phi_full_conditional(j: int, state: GamChainState, spec: GamModelSpec):
    """GIG(1/2, chi=theta' D'D theta, psi=h^2)"""
    block_state = state.blocks[j]
    chi = spec.blocks[j].quadratic_form(block_state.theta)
    return GigParams(0.5, chi, block_state.h_sq)


def gibbs_update_phi(
    j: int, state: GamChainState, spec: GamModelSpec, rng: np.random.Generator
) -> float:
    """Exact phi_j draw; a theta in the penalty null space gives the
    Gamma(1/2, rate h^2/2) limit."""
    return gig_sample(phi_full_conditional(j, state, spec), rng)


def h_sq_full_conditional(j: int, state: GamChainState, spec: GamModelSpec):
    """GIG((m + 1 - a_h)/2, chi=b_h, psi=phi), from the Gamma((m + 1)/2,
    h^2/2) mixing layer times the IG(a_h/2, b_h/2) prior."""
    hyper = spec.prior_hyper
    m = spec.blocks[j].m
    return GigParams((m + 1.0 - hyper.a_h) / 2.0, hyper.b_h, state.blocks[j].phi)


def gibbs_update_h_sq(
    j: int, state: GamChainState, spec: GamModelSpec, rng: np.random.Generator
) -> float:
    return gig_sample(h_sq_full_conditional(j, state, spec), rng)


def block_sweep(
    state: GamChainState,
    proposals: List[ThetaProposal],
    spec: GamModelSpec,
    rng: np.random.Generator,
    counter: AcceptanceCounter,
    monitor: Optional[StepMonitor] = None,
) -> GamChainState:
    """theta_j move, then phi_j and h_j^2 draws, for every smooth term."""
    for j, block in enumerate(spec.blocks):
        state, accepted = img_step_theta_block(
            j, state, proposals[j], spec, rng, monitor
        )
        counter.add(f"theta[{block.name}]", accepted)
        blocks = list(state.blocks)
        blocks[j] = replace(blocks[j], phi=gibbs_update_phi(j, state, spec, rng))
        state = replace(state, blocks=blocks)
        blocks = list(state.blocks)
        blocks[j] = replace(blocks[j], h_sq=gibbs_update_h_sq(j, state, spec, rng))
        state = replace(state, blocks=blocks)
    return state


# Initialisation


def penalized_least_squares(
    B: np.ndarray, target: np.ndarray, penalty: np.ndarray, weight: float = 1.0
) -> np.ndarray:
    """argmin |target - B theta|^2 + weight theta' penalty theta"""
    m = B.shape[1]
    lhs = B.T @ B + weight * penalty + PENALTY_RIDGE * np.eye(m)
    return linalg.solve(lhs, B.T @ target, assume_a="pos")


def initial_thetas(spec: GamModelSpec) -> List[np.ndarray]:
    """One backfitting pass of penalized least squares (weight 1) on the
    least-squares residual of the linear part."""
    resid = spec.y - spec.X @ least_squares_fit(spec.X, spec.y)
    thetas = []
    for block in spec.blocks:
        theta = penalized_least_squares(block.B, resid, block.penalty)
        theta = theta - theta.mean()
        resid = resid - block.B @ theta
        thetas.append(theta)
    return thetas


def initial_theta_proposals(
    spec: GamModelSpec, thetas: List[np.ndarray], offset
) -> List[ThetaProposal]:
    """Mean at the penalized fit; covariance (Z'(B'B / s^2 + D'D)Z)^-1 with
    s^2 the residual variance of the initial fit."""
    if not spec.blocks:
        return []
    target = spec.y - offset
    resid = target - spec.X @ least_squares_fit(spec.X, target)
    s_sq = max(float(np.var(resid)), RESIDUAL_VARIANCE_FLOOR)
    proposals = []
    for block, theta in zip(spec.blocks, thetas):
        Z = block.constraint_basis
        precision = Z.T @ (block.B.T @ block.B / s_sq + block.penalty) @ Z
        precision += PENALTY_RIDGE * np.eye(Z.shape[1])
        cov = linalg.inv(precision)
        proposals.append(ThetaProposal(block, theta, 0.5 * (cov + cov.T)))
    return proposals


def gam_parameter_labels(spec: GamModelSpec) -> List[str]:
    labels = linear_parameter_labels(spec)
    for block in spec.blocks:
        labels += [f"theta[{block.name}][{i}]" for i in range(block.m)]
        labels += [f"phi[{block.name}]", f"h_sq[{block.name}]"]
    return labels


def gam_state_row(state: GamChainState, spec: GamModelSpec) -> List[float]:
    row = linear_state_row(state, spec)
    for block_state in state.blocks:
        row += list(block_state.theta) + [block_state.phi, block_state.h_sq]
    return row


def run_gam_sampler(
    spec: GamModelSpec,
    progress: Optional[ProgressCallback] = None,
    monitor: Optional[StepMonitor] = None,
) -> PosteriorDraws:
    """Run one chain of the additive model and keep iterations M+1..N.

    The random stream is consumed in the same order as the linear sampler,
    followed by the block moves, so a spec without smooth terms reproduces
    run_linear_sampler draw for draw. meta["fitted"] holds the posterior
    mean of the fitted quantile at every observation."""
    settings = spec.sampler
    rng = np.random.default_rng(settings.seed)
    thetas = initial_thetas(spec)
    offset = smooth_offset(thetas, spec)
    linear_state = initial_state(spec, rng, offset)
    state = GamChainState(
        **vars(linear_state), blocks=[BlockState(theta) for theta in thetas]
    )
    proposal: AdaptiveProposal = initial_proposal(spec, offset)
    theta_proposals = initial_theta_proposals(spec, thetas, offset)
    blocks = ["beta", "sigma"] + (["alpha"] if settings.fixed_alpha is None else [])
    blocks += [f"theta[{block.name}]" for block in spec.blocks]
    counter = AcceptanceCounter(blocks)

    keep = settings.iterations - settings.burn_in
    labels = gam_parameter_labels(spec)
    draws = np.empty((keep, len(labels)))
    log_lik = np.empty(keep)
    fitted_sum = np.zeros(spec.T)
    for i in range(1, settings.iterations + 1):
        state = linear_sweep(state, proposal, spec, rng, counter, monitor)
        state = block_sweep(state, theta_proposals, spec, rng, counter, monitor)
        adapt(proposal, state, i, spec)
        step = adaptation_step(i + 1, settings.adapt_C)
        for theta_proposal, block_state in zip(theta_proposals, state.blocks):
            theta_proposal.adapt(block_state.theta, step, settings.adaptation)
        if i > settings.burn_in:
            row = i - settings.burn_in - 1
            draws[row] = gam_state_row(state, spec)
            log_lik[row] = state.log_lik
            fitted = spec.X @ state.beta
            if state.offset is not None:
                fitted = fitted + state.offset
            fitted_sum += fitted
        if progress is not None:
            progress(i, settings.iterations, counter.rates())

    if not np.all(np.isfinite(draws)):
        raise SamplerError("Chain produced non-finite draws")
    meta = chain_meta(spec)
    meta["fitted"] = fitted_sum / keep
    meta["proposal_resets"] = proposal.beta.resets + sum(
        p.gaussian.resets for p in theta_proposals
    )
    return PosteriorDraws(
        labels,
        draws,
        counter.as_dict(),
        meta,
        iterations=np.arange(settings.burn_in + 1, settings.iterations + 1),
        log_likelihood=log_lik,
    )
