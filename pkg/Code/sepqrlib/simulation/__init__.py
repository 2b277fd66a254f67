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

"""Simulated data sets, accuracy metrics and the ALD versus SEP comparison
experiments.

Every replicate draws its data from default_rng([seed, replicate]) and every
chain gets a seed derived from (seed, replicate, tau index, method index), so
results do not depend on how the chains are spread over worker processes."""

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from sepqrlib import EXPERIMENTS, SpecError
from sepqrlib.gam import GamModelSpec, SplineBlock, run_gam_sampler
from sepqrlib.linearmodel import (
    LinearModelSpec,
    PriorHyper,
    ProgressCallback,
    SamplerSettings,
    run_linear_sampler,
)

# (label, fixed alpha) of the compared working likelihoods
METHODS = (("ALD", 1.0), ("SEP", None))
ERROR_KINDS = ("gaussian", "student_t")
NOISE_KINDS = ("gaussian", "student_t", "linear_het", "quad_het")
ERROR_SCALE = 3.0
STUDENT_DF = 2.0

SIMULATION_BETAS = {
    1: (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0),
    2: (0.85,) * 8,
    3: (5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
}

# iterations, burn-in, sample size, interior knots
EXPERIMENT_DEFAULTS = {
    "mixture": (50000, 10000, 100, None),
    "sim1": (20000, 5000, 200, None),
    "sim2": (20000, 5000, 200, None),
    "sim3": (20000, 5000, 200, None),
    "wave": (10000, 5000, 200, 20),
    "doppler": (10000, 5000, 512, 25),
}

ROW_FIELDS = [
    "experiment",
    "replicate",
    "error",
    "tau",
    "method",
    "metric",
    "value",
    "alpha_mean",
    "sigma_mean",
    "accept_beta",
    "accept_sigma",
    "accept_alpha",
    "accept_theta",
]
SUMMARY_FIELDS = [
    "experiment",
    "error",
    "tau",
    "method",
    "metric",
    "replicates",
    "median_value",
    "median_alpha",
    "median_sigma",
]
GROUP_FIELDS = SUMMARY_FIELDS[:5]


# Data generators


class MixtureSpec(NamedTuple):
    weights: Tuple[float, ...] = (0.85, 0.0725, 0.0725)
    means: Tuple[Tuple[float, float], ...] = ((1.0, 0.0), (4.0, 0.0), (-2.0, 0.0))
    cov: Tuple[Tuple[float, float], ...] = ((1.0, 0.6), (0.6, 1.0))
    T: int = 100

    def validate(self) -> "MixtureSpec":
        weights = np.asarray(self.weights, dtype=float)
        if np.any(weights <= 0.0) or not math.isclose(weights.sum(), 1.0):
            raise SpecError("mixture weights must be positive and sum to 1")
        if len(self.means) != weights.size:
            raise SpecError("one mean per mixture weight is needed")
        try:
            np.linalg.cholesky(np.asarray(self.cov, dtype=float))
        except np.linalg.LinAlgError as err:
            raise SpecError("mixture covariance is not positive definite") from err
        if self.T < 1:
            raise SpecError("T must be positive")
        return self


def gen_mixture_data(spec: MixtureSpec, rng: np.random.Generator):
    """(y, x) from the three-component bivariate normal mixture; the first
    coordinate is the response."""
    spec.validate()
    components = rng.choice(len(spec.weights), size=spec.T, p=spec.weights)
    chol = np.linalg.cholesky(np.asarray(spec.cov, dtype=float))
    points = np.asarray(spec.means, dtype=float)[components]
    points = points + rng.standard_normal((spec.T, 2)) @ chol.T
    return points[:, 0], points[:, 1]


def wave(x):
    """4(x - 0.5) + 2 exp(-256 (x - 0.5)^2) on (0, 1), zero elsewhere"""
    x = np.asarray(x, dtype=float)
    value = 4.0 * (x - 0.5) + 2.0 * np.exp(-256.0 * (x - 0.5) ** 2)
    value = np.where((x > 0.0) & (x < 1.0), value, 0.0)
    return float(value) if value.ndim == 0 else value


def doppler(x, gamma: float = 0.15):
    """sqrt(0.2x(1 - 0.2x)) sin(2 pi (1 + gamma) / (0.2x + gamma)) on (0, 1),
    zero elsewhere"""
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    u = np.where(inside, 0.2 * x, 0.5)
    value = np.sqrt(u * (1.0 - u)) * np.sin(2.0 * math.pi * (1.0 + gamma) / (u + gamma))
    value = np.where(inside, value, 0.0)
    return float(value) if value.ndim == 0 else value


CURVES: Dict[str, Callable] = {"wave": wave, "doppler": doppler}


def error_quantile(error_kind: str, tau: float) -> float:
    """tau-quantile of the standard error law"""
    if error_kind == "gaussian":
        return float(stats.norm.ppf(tau))
    if error_kind == "student_t":
        return float(stats.t.ppf(tau, STUDENT_DF))
    raise SpecError(f"Unknown error kind '{error_kind}'")


def standard_errors(error_kind: str, size: int, rng: np.random.Generator):
    if error_kind == "gaussian":
        return rng.standard_normal(size)
    if error_kind == "student_t":
        return rng.standard_t(STUDENT_DF, size)
    raise SpecError(f"Unknown error kind '{error_kind}'")


class RegressionSimSpec(NamedTuple):
    sim_id: int = 1
    error_kind: str = "gaussian"
    tau: float = 0.5
    T: int = 200
    replicates: int = 10

    def validate(self) -> "RegressionSimSpec":
        if self.sim_id not in SIMULATION_BETAS:
            raise SpecError(f"Unknown simulation {self.sim_id}")
        if self.error_kind not in ERROR_KINDS:
            raise SpecError(f"Unknown error kind '{self.error_kind}'")
        if not 0.0 < self.tau < 1.0:
            raise SpecError(f"tau must lie in (0, 1), got {self.tau}")
        if self.T < 1:
            raise SpecError("T must be positive")
        return self

    @property
    def beta_true(self) -> np.ndarray:
        return np.array(SIMULATION_BETAS[self.sim_id])

    @property
    def covariance(self) -> np.ndarray:
        p = len(SIMULATION_BETAS[self.sim_id])
        index = np.arange(p)
        return 0.5 ** np.abs(np.subtract.outer(index, index))

    @property
    def error_shift(self) -> float:
        """Location moving the tau-quantile of the errors to zero."""
        return -ERROR_SCALE * error_quantile(self.error_kind, self.tau)


def gen_regression_data(spec: RegressionSimSpec, rng: np.random.Generator):
    """(y, X, beta_true) with N(0, Sigma) covariates and errors whose
    tau-quantile is zero."""
    spec.validate()
    beta = spec.beta_true
    chol = np.linalg.cholesky(spec.covariance)
    X = rng.standard_normal((spec.T, beta.size)) @ chol.T
    errors = ERROR_SCALE * standard_errors(spec.error_kind, spec.T, rng)
    return X @ beta + errors + spec.error_shift, X, beta


def curve_grid(T: int) -> np.ndarray:
    """T equally spaced interior points of (0, 1)."""
    return np.linspace(0.0, 1.0, T + 2)[1:-1]


class CurveSimSpec(NamedTuple):
    curve: str = "wave"
    noise: str = "gaussian"
    T: Optional[int] = None
    sigma: Optional[float] = None
    nu: float = STUDENT_DF
    gamma_doppler: float = 0.15
    # Overrides the error law implied by noise.
    error_kind: Optional[str] = None
    # Replaces sigma when set; 0 gives noiseless data.
    noise_scale: Optional[float] = None

    def validate(self) -> "CurveSimSpec":
        if self.curve not in CURVES:
            raise SpecError(f"Unknown curve '{self.curve}'")
        if self.noise not in NOISE_KINDS:
            raise SpecError(f"Unknown noise kind '{self.noise}'")
        if self.error_kind is not None and self.error_kind not in ERROR_KINDS:
            raise SpecError(f"Unknown error kind '{self.error_kind}'")
        if self.sample_size < 1:
            raise SpecError("T must be positive")
        return self

    @property
    def sample_size(self) -> int:
        if self.T is not None:
            return self.T
        return 200 if self.curve == "wave" else 512

    @property
    def scale(self) -> float:
        if self.noise_scale is not None:
            return self.noise_scale
        if self.sigma is not None:
            return self.sigma
        return math.sqrt(0.4) if self.curve == "wave" else math.sqrt(0.1)

    @property
    def error_law(self) -> str:
        if self.error_kind is not None:
            return self.error_kind
        return "gaussian" if self.noise == "gaussian" else "student_t"

    def truth(self, x):
        if self.curve == "doppler":
            return doppler(x, self.gamma_doppler)
        return wave(x)

    def amplitude(self, x) -> np.ndarray:
        """Noise scale s(x)."""
        x = np.asarray(x, dtype=float)
        if self.noise == "linear_het":
            shape = 1.0 + x
        elif self.noise == "quad_het":
            shape = 1.0 + x ** 2
        else:
            shape = np.ones_like(x)
        return self.scale * shape

    def error_quantile(self, tau: float) -> float:
        if self.error_law == "student_t":
            return float(stats.t.ppf(tau, self.nu))
        return error_quantile("gaussian", tau)

    def quantile_curve(self, x, tau: float) -> np.ndarray:
        """True tau-quantile f(x) + s(x) q(tau) of y given x."""
        return self.truth(x) + self.amplitude(x) * self.error_quantile(tau)


def gen_curve_data(spec: CurveSimSpec, rng: np.random.Generator):
    """(y, x) on the equally spaced design grid."""
    spec.validate()
    x = curve_grid(spec.sample_size)
    if spec.error_law == "student_t":
        errors = rng.standard_t(spec.nu, x.size)
    else:
        errors = rng.standard_normal(x.size)
    return spec.truth(x) + spec.amplitude(x) * errors, x


# Metrics


def mmad(beta_hat, beta_true, X) -> float:
    """Mean absolute deviation between fitted and true linear predictors."""
    beta_hat = np.asarray(beta_hat, dtype=float).ravel()
    beta_true = np.asarray(beta_true, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if beta_hat.shape != beta_true.shape or X.ndim != 2 or X.shape[1] != beta_hat.size:
        raise SpecError(
            f"dimension mismatch: beta_hat {beta_hat.shape}, "
            f"beta_true {beta_true.shape}, X {X.shape}"
        )
    return float(np.mean(np.abs(X @ (beta_hat - beta_true))))


def replicate_mmad(values: Sequence[float]) -> float:
    """Median over replicates."""
    if len(values) == 0:
        raise SpecError("no replicate values")
    return float(np.median(values))


def curve_mse(fitted, truth) -> float:
    fitted = np.asarray(fitted, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if fitted.shape != truth.shape:
        raise SpecError(f"length mismatch: {fitted.size} fitted, {truth.size} true")
    return float(np.mean((fitted - truth) ** 2))


# Experiment drivers


class ExperimentPlan(NamedTuple):
    experiment: str
    taus: Tuple[float, ...] = (0.1, 0.5, 0.9)
    replicates: int = 10
    seed: int = 0
    iterations: Optional[int] = None
    burn_in: Optional[int] = None
    T: Optional[int] = None
    knots: Optional[int] = None
    noise: str = "gaussian"
    error_kind: Optional[str] = None
    prior_hyper: PriorHyper = PriorHyper()
    adapt_C: float = 10.0
    adaptation: str = "accumulate"

    def validate(self) -> "ExperimentPlan":
        if self.experiment not in EXPERIMENTS:
            raise SpecError(f"Unknown experiment '{self.experiment}'")
        if self.replicates < 1:
            raise SpecError("replicates must be at least 1")
        if not self.taus:
            raise SpecError("no tau levels")
        for tau in self.taus:
            if not 0.0 < tau < 1.0:
                raise SpecError(f"tau must lie in (0, 1), got {tau}")
        if self.noise not in NOISE_KINDS:
            raise SpecError(f"Unknown noise kind '{self.noise}'")
        if self.error_kind is not None and self.error_kind not in ERROR_KINDS:
            raise SpecError(f"Unknown error kind '{self.error_kind}'")
        if self.chain_length[0] <= self.chain_length[1]:
            raise SpecError("iterations must exceed burn_in")
        return self

    @property
    def chain_length(self) -> Tuple[int, int]:
        iterations, burn_in, _, _ = EXPERIMENT_DEFAULTS[self.experiment]
        if self.iterations is not None:
            iterations = self.iterations
        if self.burn_in is not None:
            burn_in = self.burn_in
        elif self.iterations is not None:
            burn_in = min(burn_in, self.iterations // 2)
        return iterations, burn_in

    @property
    def sample_size(self) -> int:
        return self.T if self.T is not None else EXPERIMENT_DEFAULTS[self.experiment][2]

    @property
    def knot_count(self) -> Optional[int]:
        if self.knots is not None:
            return self.knots
        return EXPERIMENT_DEFAULTS[self.experiment][3]

    @property
    def error_labels(self) -> Tuple[str, ...]:
        """Error settings the experiment sweeps over."""
        if self.experiment == "mixture":
            return ("mixture",)
        if self.experiment in CURVES:
            return (self.noise,)
        return (self.error_kind,) if self.error_kind else ERROR_KINDS


class ChainTask(NamedTuple):
    plan: ExperimentPlan
    replicate: int
    error: str
    tau_index: int
    method_index: int


def chain_seed(seed: int, replicate: int, tau_index: int, method_index: int) -> int:
    sequence = np.random.SeedSequence([seed, replicate, tau_index, method_index])
    return int(sequence.generate_state(1)[0])


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    return np.random.default_rng([seed, replicate])


def experiment_tasks(plan: ExperimentPlan) -> List[ChainTask]:
    return [
        ChainTask(plan, replicate, error, tau_index, method_index)
        for replicate in range(plan.replicates)
        for error in plan.error_labels
        for tau_index in range(len(plan.taus))
        for method_index in range(len(METHODS))
    ]


def _settings(task: ChainTask) -> SamplerSettings:
    plan = task.plan
    iterations, burn_in = plan.chain_length
    return SamplerSettings(
        iterations=iterations,
        burn_in=burn_in,
        seed=chain_seed(plan.seed, task.replicate, task.tau_index, task.method_index),
        adapt_C=plan.adapt_C,
        fixed_alpha=METHODS[task.method_index][1],
        adaptation=plan.adaptation,
    )


def _row(task: ChainTask, metric: str, value: float, draws) -> Dict[str, Any]:
    method, fixed_alpha = METHODS[task.method_index]
    rates = draws.acceptance
    theta_rates = [rate for label, rate in rates.items() if label.startswith("theta")]
    return {
        "experiment": task.plan.experiment,
        "replicate": task.replicate,
        "error": task.error,
        "tau": task.plan.taus[task.tau_index],
        "method": method,
        "metric": metric,
        "value": value,
        # alpha is not a parameter of the fixed-shape fit
        "alpha_mean": (
            None if fixed_alpha is not None else float(draws.column("alpha").mean())
        ),
        "sigma_mean": float(draws.column("sigma").mean()),
        "accept_beta": rates.get("beta"),
        "accept_sigma": rates.get("sigma"),
        "accept_alpha": rates.get("alpha"),
        "accept_theta": float(np.mean(theta_rates)) if theta_rates else None,
    }


def run_mixture_task(task: ChainTask, progress=None) -> Dict[str, Any]:
    """Posterior mean slope of a Gaussian-prior fit with an intercept."""
    plan = task.plan
    rng = replicate_rng(plan.seed, task.replicate)
    y, x = gen_mixture_data(MixtureSpec(T=plan.sample_size), rng)
    X = np.column_stack((np.ones_like(x), x))
    spec = LinearModelSpec(
        X,
        y,
        plan.taus[task.tau_index],
        plan.prior_hyper._replace(beta_prior="gaussian"),
        _settings(task),
        names=["intercept", "x"],
    )
    draws = run_linear_sampler(spec, progress)
    return _row(task, "slope", float(draws.column("beta[x]").mean()), draws)


def run_regression_task(task: ChainTask, progress=None) -> Dict[str, Any]:
    """MAD of the lasso fit against the true linear predictor."""
    plan = task.plan
    sim_spec = RegressionSimSpec(
        sim_id=int(plan.experiment[-1]),
        error_kind=task.error,
        tau=plan.taus[task.tau_index],
        T=plan.sample_size,
        replicates=plan.replicates,
    )
    y, X, beta_true = gen_regression_data(
        sim_spec, replicate_rng(plan.seed, task.replicate)
    )
    prior_hyper = plan.prior_hyper._replace(beta_prior="lasso")
    spec = LinearModelSpec(X, y, sim_spec.tau, prior_hyper, _settings(task))
    draws = run_linear_sampler(spec, progress)
    return _row(task, "mad", mmad(draws.posterior_mean("beta["), beta_true, X), draws)


def run_curve_task(task: ChainTask, progress=None) -> Dict[str, Any]:
    """MSE of the posterior mean fitted quantile against the true curve."""
    plan = task.plan
    tau = plan.taus[task.tau_index]
    curve_spec = CurveSimSpec(
        curve=plan.experiment,
        noise=task.error,
        T=plan.sample_size,
        error_kind=plan.error_kind,
    )
    y, x = gen_curve_data(curve_spec, replicate_rng(plan.seed, task.replicate))
    block = SplineBlock(x, k=plan.knot_count, d=4, delta=2, name="x")
    spec = GamModelSpec(
        np.ones((x.size, 1)),
        y,
        tau,
        [block],
        plan.prior_hyper,
        _settings(task),
        names=["intercept"],
    )
    draws = run_gam_sampler(spec, progress)
    mse = curve_mse(draws.meta["fitted"], curve_spec.quantile_curve(x, tau))
    return _row(task, "mse", mse, draws)


def run_task(task: ChainTask, progress: Optional[ProgressCallback] = None):
    if task.plan.experiment == "mixture":
        return run_mixture_task(task, progress)
    if task.plan.experiment in CURVES:
        return run_curve_task(task, progress)
    return run_regression_task(task, progress)


def _median_or_none(values) -> Optional[float]:
    present = [value for value in values if value is not None]
    return float(np.median(present)) if present else None


def summarize_experiment(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Replicate medians per error setting, tau and method."""
    groups: Dict[Tuple, List[Dict[str, Any]]] = {}
    for row in rows:
        key = tuple(row[name] for name in GROUP_FIELDS)
        groups.setdefault(key, []).append(row)
    summary = []
    for (experiment, error, tau, method, metric), members in groups.items():
        summary.append(
            {
                "experiment": experiment,
                "error": error,
                "tau": tau,
                "method": method,
                "metric": metric,
                "replicates": len(members),
                "median_value": float(np.median([r["value"] for r in members])),
                "median_alpha": _median_or_none([r["alpha_mean"] for r in members]),
                "median_sigma": float(np.median([r["sigma_mean"] for r in members])),
            }
        )
    return summary


def run_experiment(
    plan: ExperimentPlan,
    jobs: int = 1,
    progress: Optional[ProgressCallback] = None,
) -> List[Dict[str, Any]]:
    """Run every chain of the plan and return one row per chain, in task
    order. With jobs > 1 the chains run in worker processes and progress
    callbacks are not forwarded."""
    plan.validate()
    tasks = experiment_tasks(plan)
    if jobs <= 1:
        return [run_task(task, progress) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(run_task, tasks))
