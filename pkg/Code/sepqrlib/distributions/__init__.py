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

"""Densities, distribution functions and random variates of the skew
exponential power (SEP) family and of the helper laws the samplers need.

Every function is pure given its explicit `rng` (a numpy Generator). Log
densities return -inf outside the support; invalid parameters raise
DomainError."""

import math
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy import special, stats

from sepqrlib import DomainError

ArrayLike = Union[float, np.ndarray]

LOG_2PI = math.log(2.0 * math.pi)
# Below this chi * psi a GIG with p > 0 is drawn from its Gamma limit.
GIG_GAMMA_LIMIT = 1e-14


def _check_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise DomainError(f"{name} must be finite, got {value}")


def _check_positive(name, value):
    if not (np.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be positive, got {value}")


def _scalar_or_array(values, like):
    """Return a float when the caller passed a scalar."""
    if np.ndim(like) == 0:
        return float(values)
    return values


class SepParams(NamedTuple):
    """Location mu (the tau-quantile), scale sigma, tail shape alpha and
    skewness tau of a SEP distribution."""

    mu: float
    sigma: float
    alpha: float
    tau: float

    def validate(self) -> "SepParams":
        _check_finite("mu", self.mu)
        _check_positive("sigma", self.sigma)
        _check_positive("alpha", self.alpha)
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}")
        return self


class GigParams(NamedTuple):
    """Generalized inverse Gaussian with kernel
    x**(p - 1) * exp(-(chi / x + psi * x) / 2) on x > 0."""

    p: float
    chi: float
    psi: float

    def validate(self) -> "GigParams":
        _check_finite("p", self.p)
        _check_finite("chi", self.chi)
        _check_finite("psi", self.psi)
        if self.chi < 0.0 or self.psi < 0.0:
            raise DomainError(f"GIG chi and psi must be nonnegative: {self}")
        if self.p <= 0.0 and self.chi <= 0.0:
            raise DomainError(f"GIG with p <= 0 needs chi > 0: {self}")
        if self.p >= 0.0 and self.psi <= 0.0:
            raise DomainError(f"GIG with p >= 0 needs psi > 0: {self}")
        return self


# SEP family


def sep_log_kappa(alpha: float) -> float:
    """log of the normalizer 1 / (2 alpha**(1/alpha) Gamma(1 + 1/alpha))."""
    log_gamma = float(special.gammaln(1.0 + 1.0 / alpha))
    return -(math.log(2.0) + math.log(alpha) / alpha + log_gamma)


def sep_log_kernel(resid: np.ndarray, sigma: float, alpha: float, tau: float):
    """-(1/alpha) * (|r| / (2 c sigma))**alpha with c = tau for r <= 0 and
    c = 1 - tau for r > 0, computed through exp/log so small alpha does not
    overflow."""
    resid = np.asarray(resid, dtype=float)
    scale = np.where(resid <= 0.0, 2.0 * tau * sigma, 2.0 * (1.0 - tau) * sigma)
    with np.errstate(divide="ignore"):
        log_z = np.log(np.abs(resid) / scale)
    return -np.exp(alpha * log_z) / alpha


def sep_log_pdf(y: ArrayLike, params: SepParams) -> ArrayLike:
    """Log density of SEP(mu, sigma, alpha, tau) at y."""
    mu, sigma, alpha, tau = params.validate()
    _check_finite("y", y)
    values = (
        sep_log_kappa(alpha)
        - math.log(sigma)
        + sep_log_kernel(np.asarray(y, dtype=float) - mu, sigma, alpha, tau)
    )
    return _scalar_or_array(values, y)


def sep_cdf(y: ArrayLike, params: SepParams) -> ArrayLike:
    """Distribution function. Both branches use the upper regularized
    incomplete gamma Q so the far tails keep full relative precision;
    F(mu) is tau exactly."""
    mu, sigma, alpha, tau = params.validate()
    y_arr = np.asarray(y, dtype=float)
    if np.any(np.isnan(y_arr)):
        raise DomainError("y must not be NaN")
    shape = 1.0 / alpha
    lower = y_arr <= mu
    u = np.where(lower, (mu - y_arr) / (2.0 * tau * sigma), 0.0)
    v = np.where(lower, 0.0, (y_arr - mu) / (2.0 * (1.0 - tau) * sigma))
    lower_cdf = tau * special.gammaincc(shape, u ** alpha / alpha)
    upper_cdf = 1.0 - (1.0 - tau) * special.gammaincc(shape, v ** alpha / alpha)
    return _scalar_or_array(np.where(lower, lower_cdf, upper_cdf), y)


def sep_quantile(p: ArrayLike, params: SepParams) -> ArrayLike:
    """Inverse of sep_cdf through the inverse incomplete gamma function."""
    mu, sigma, alpha, tau = params.validate()
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    shape = 1.0 / alpha
    lower = p_arr <= tau
    g_lower = special.gammainccinv(shape, np.where(lower, p_arr / tau, 1.0))
    g_upper = special.gammainccinv(
        shape, np.where(lower, 1.0, (1.0 - p_arr) / (1.0 - tau))
    )
    left = mu - 2.0 * tau * sigma * (alpha * g_lower) ** shape
    right = mu + 2.0 * (1.0 - tau) * sigma * (alpha * g_upper) ** shape
    return _scalar_or_array(np.where(lower, left, right), p)


def sep_sample(params: SepParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n SEP variates with the gamma transform: pick the side of mu
    with probability tau, then a Gamma(1/alpha) draw G sets the distance
    2 c sigma (alpha G)**(1/alpha)."""
    mu, sigma, alpha, tau = params.validate()
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    u = rng.uniform(size=n)
    g = rng.gamma(1.0 / alpha, 1.0, size=n)
    x = (alpha * g) ** (1.0 / alpha)
    left = mu - 2.0 * tau * sigma * x
    right = mu + 2.0 * (1.0 - tau) * sigma * x
    return np.where(u <= tau, left, right)


# Generalized inverse Gaussian


def gig_log_pdf(x: ArrayLike, params: GigParams) -> ArrayLike:
    """Normalized GIG log density. The chi = 0 and psi = 0 limits are the
    Gamma and inverse-Gamma densities."""
    p, chi, psi = params.validate()
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if chi == 0.0:
            values = gamma_log_pdf(x_arr, p, psi / 2.0)
        elif psi == 0.0:
            values = inverse_gamma_log_pdf(x_arr, -p, chi / 2.0)
        else:
            omega = math.sqrt(chi * psi)
            log_norm = (
                0.5 * p * math.log(psi / chi)
                - math.log(2.0)
                - (math.log(special.kve(p, omega)) - omega)
            )
            values = np.where(
                x_arr > 0.0,
                log_norm
                + (p - 1.0) * np.log(np.where(x_arr > 0.0, x_arr, 1.0))
                - 0.5 * (chi / np.where(x_arr > 0.0, x_arr, 1.0) + psi * x_arr),
                -np.inf,
            )
    return _scalar_or_array(values, x)


def _gig_log_envelope(x, alpha, lam):
    return -alpha * (math.cosh(x) - 1.0) - lam * (math.exp(x) - x - 1.0)


def _gig_dlog_envelope(x, alpha, lam):
    return -alpha * math.sinh(x) - lam * (math.exp(x) - 1.0)


def _gig_devroye(p: float, chi: float, psi: float, rng: np.random.Generator) -> float:
    """Devroye's rejection sampler for GIG with chi, psi > 0, valid for
    every index p."""
    lam = abs(p)
    omega = math.sqrt(chi * psi)
    alpha = math.sqrt(omega ** 2 + lam ** 2) - lam

    x = -_gig_log_envelope(1.0, alpha, lam)
    if 0.5 <= x <= 2.0:
        t = 1.0
    elif x > 2.0:
        t = 1.0 if alpha == 0.0 and lam == 0.0 else math.sqrt(2.0 / (alpha + lam))
    else:
        t = 1.0 if alpha == 0.0 and lam == 0.0 else math.log(4.0 / (alpha + 2.0 * lam))

    x = -_gig_log_envelope(-1.0, alpha, lam)
    if 0.5 <= x <= 2.0:
        s = 1.0
    elif x > 2.0:
        s = (
            1.0
            if alpha == 0.0 and lam == 0.0
            else math.sqrt(4.0 / (alpha * math.cosh(1.0) + lam))
        )
    elif alpha == 0.0 and lam == 0.0:
        s = 1.0
    elif alpha == 0.0:
        s = 1.0 / lam
    else:
        s = math.log(1.0 + 1.0 / alpha + math.sqrt(1.0 / alpha ** 2 + 2.0 / alpha))
        if lam > 0.0:
            s = min(1.0 / lam, s)

    eta = -_gig_log_envelope(t, alpha, lam)
    zeta = -_gig_dlog_envelope(t, alpha, lam)
    theta = -_gig_log_envelope(-s, alpha, lam)
    xi = _gig_dlog_envelope(-s, alpha, lam)
    p_len = 1.0 / xi
    r_len = 1.0 / zeta
    td = t - r_len * eta
    sd = s - p_len * theta
    q_len = td + sd
    total = p_len + q_len + r_len

    while True:
        u, v, w = rng.random(3)
        if u < q_len / total:
            candidate = -sd + q_len * v
        elif u < (q_len + r_len) / total:
            candidate = td - r_len * math.log(v)
        else:
            candidate = -sd + p_len * math.log(v)
        if candidate > td:
            bound = math.exp(-eta - zeta * (candidate - t))
        elif candidate < -sd:
            bound = math.exp(-theta + xi * (candidate + s))
        else:
            bound = 1.0
        if w * bound <= math.exp(_gig_log_envelope(candidate, alpha, lam)):
            break

    draw = math.exp(candidate) * (lam / omega + math.sqrt(1.0 + (lam / omega) ** 2))
    if p < 0.0:
        draw = 1.0 / draw
    return draw * math.sqrt(chi / psi)


def gig_sample(params: GigParams, rng: np.random.Generator) -> float:
    """One exact GIG draw.

    chi = 0, or a negligible chi * psi with p > 0, is the Gamma(p, rate
    psi/2) limit and psi = 0 the inverse-Gamma limit; p = +-1/2 are
    inverse-Gaussian draws and everything else goes through Devroye's
    rejection sampler."""
    p, chi, psi = params.validate()
    if chi == 0.0 or (p > 0.0 and chi * psi < GIG_GAMMA_LIMIT):
        return float(rng.gamma(p, 2.0 / psi))
    if psi == 0.0:
        return float(1.0 / rng.gamma(-p, 2.0 / chi))
    if p == 0.5:
        return float(1.0 / rng.wald(math.sqrt(psi / chi), psi))
    if p == -0.5:
        return float(rng.wald(math.sqrt(chi / psi), chi))
    return _gig_devroye(p, chi, psi, rng)


# Multivariate Laplace (group lasso) prior


def mvlaplace_log_kernel(theta: np.ndarray, h: float, penalty: np.ndarray) -> float:
    """m log(h) - h sqrt(theta' P theta), the theta-dependent part of the
    group lasso log prior on an m-vector theta with penalty matrix P."""
    theta = np.asarray(theta, dtype=float)
    penalty = np.asarray(penalty, dtype=float)
    if theta.ndim != 1 or penalty.shape != (theta.size, theta.size):
        raise DomainError(
            f"penalty of shape {penalty.shape} does not match theta of "
            f"length {theta.size}"
        )
    _check_positive("h", h)
    quad = max(float(theta @ penalty @ theta), 0.0)
    return theta.size * math.log(h) - h * math.sqrt(quad)


# Helper laws


def normal_log_pdf(x: ArrayLike, mean: ArrayLike, variance: ArrayLike) -> ArrayLike:
    """Gaussian log density parametrized by its variance."""
    variance = np.asarray(variance, dtype=float)
    if np.any(~(variance > 0.0)):
        raise DomainError(f"variance must be positive, got {variance}")
    x_arr = np.asarray(x, dtype=float)
    values = -0.5 * (LOG_2PI + np.log(variance) + (x_arr - mean) ** 2 / variance)
    return _scalar_or_array(values, values)


def normal_sample(mean, variance, rng: np.random.Generator, size=None):
    _check_positive("variance", variance)
    return rng.normal(mean, math.sqrt(variance), size=size)


def gamma_log_pdf(x: ArrayLike, shape: float, rate: float) -> ArrayLike:
    """Gamma(shape, rate) log density."""
    _check_positive("shape", shape)
    _check_positive("rate", rate)
    x_arr = np.asarray(x, dtype=float)
    positive = x_arr > 0.0
    safe = np.where(positive, x_arr, 1.0)
    values = np.where(
        positive,
        shape * math.log(rate)
        - special.gammaln(shape)
        + (shape - 1.0) * np.log(safe)
        - rate * safe,
        -np.inf,
    )
    return _scalar_or_array(values, x)


def gamma_sample(shape: float, rate: float, rng: np.random.Generator, size=None):
    _check_positive("shape", shape)
    _check_positive("rate", rate)
    return rng.gamma(shape, 1.0 / rate, size=size)


def inverse_gamma_log_pdf(x: ArrayLike, shape: float, scale: float) -> ArrayLike:
    """Inverse-Gamma log density with kernel x**(-shape-1) exp(-scale/x)."""
    _check_positive("shape", shape)
    _check_positive("scale", scale)
    x_arr = np.asarray(x, dtype=float)
    positive = x_arr > 0.0
    safe = np.where(positive, x_arr, 1.0)
    values = np.where(
        positive,
        shape * math.log(scale)
        - special.gammaln(shape)
        - (shape + 1.0) * np.log(safe)
        - scale / safe,
        -np.inf,
    )
    return _scalar_or_array(values, x)


def inverse_gamma_sample(
    shape: float, scale: float, rng: np.random.Generator, size=None
):
    _check_positive("shape", shape)
    _check_positive("scale", scale)
    return 1.0 / rng.gamma(shape, 1.0 / scale, size=size)


def beta_log_pdf(
    x: ArrayLike, c: float, d: float, lower: float = 0.0, upper: float = 1.0
) -> ArrayLike:
    """Beta(c, d) log density, optionally stretched onto (lower, upper).

    The alpha prior uses the (0, 2) stretch. The endpoints are part of the
    support formula, so Beta(2, 2) gives -inf there."""
    _check_positive("c", c)
    _check_positive("d", d)
    width = upper - lower
    _check_positive("upper - lower", width)
    u = (np.asarray(x, dtype=float) - lower) / width
    inside = (u >= 0.0) & (u <= 1.0)
    safe = np.where(inside, u, 0.5)
    with np.errstate(divide="ignore"):
        values = np.where(
            inside,
            special.xlogy(c - 1.0, safe)
            + special.xlog1py(d - 1.0, -safe)
            - special.betaln(c, d)
            - math.log(width),
            -np.inf,
        )
    return _scalar_or_array(values, x)


def beta_sample(
    c: float, d: float, rng: np.random.Generator, lower=0.0, upper=1.0, size=None
):
    _check_positive("c", c)
    _check_positive("d", d)
    return lower + (upper - lower) * rng.beta(c, d, size=size)


def exponential_log_pdf(x: ArrayLike, mean: float) -> ArrayLike:
    """Exponential log density parametrized by its mean."""
    _check_positive("mean", mean)
    x_arr = np.asarray(x, dtype=float)
    values = np.where(x_arr >= 0.0, -math.log(mean) - x_arr / mean, -np.inf)
    return _scalar_or_array(values, x)


def exponential_sample(mean: float, rng: np.random.Generator, size=None):
    _check_positive("mean", mean)
    return rng.exponential(mean, size=size)


def _truncated_standard_bounds(mean, variance, lower, upper):
    _check_positive("variance", variance)
    if not lower < upper:
        raise DomainError(f"empty truncation interval ({lower}, {upper})")
    sd = math.sqrt(variance)
    return (lower - mean) / sd, (upper - mean) / sd, sd


def truncated_normal_log_mass(mean, variance, lower, upper) -> float:
    """log(Phi(b') - Phi(a')) for the standardized bounds, evaluated on the
    tail where it does not cancel."""
    a_std, b_std, _ = _truncated_standard_bounds(mean, variance, lower, upper)
    if a_std > 0.0:
        a_std, b_std = -b_std, -a_std
    log_b = float(special.log_ndtr(b_std))
    log_a = float(special.log_ndtr(a_std))
    if not log_b > log_a:
        raise DomainError(
            f"N({mean}, {variance}) has no mass on ({lower}, {upper})"
        )
    return log_b + math.log1p(-math.exp(log_a - log_b))


def truncated_normal_log_pdf(x, mean, variance, lower, upper) -> float:
    """Log density of N(mean, variance) restricted to (lower, upper),
    including the normalizing mass of the interval."""
    log_mass = truncated_normal_log_mass(mean, variance, lower, upper)
    if not lower <= x <= upper:
        return -np.inf
    return float(normal_log_pdf(x, mean, variance)) - log_mass


def truncated_normal_sample(
    mean, variance, lower, upper, rng: np.random.Generator, size: Optional[int] = None
):
    """Exact draw from N(mean, variance) restricted to (lower, upper)."""
    a_std, b_std, sd = _truncated_standard_bounds(mean, variance, lower, upper)
    truncated_normal_log_mass(mean, variance, lower, upper)
    draw = stats.truncnorm.rvs(
        a_std, b_std, loc=mean, scale=sd, size=size, random_state=rng
    )
    if size is None:
        return float(np.clip(draw, lower, upper))
    return np.clip(draw, lower, upper)
