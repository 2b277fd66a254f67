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

import math
import unittest

import numpy as np
from scipy import stats

from sepqrlib import SpecError
from sepqrlib.simulation import (
    CurveSimSpec,
    ExperimentPlan,
    MixtureSpec,
    RegressionSimSpec,
    chain_seed,
    curve_grid,
    curve_mse,
    doppler,
    experiment_tasks,
    gen_curve_data,
    gen_mixture_data,
    gen_regression_data,
    mmad,
    replicate_mmad,
    run_experiment,
    summarize_experiment,
    wave,
)


class TestCurves(unittest.TestCase):
    def test_wave(self):
        self.assertEqual(wave(0.5), 2.0)
        self.assertAlmostEqual(wave(0.25), -1.0 + 2.0 * math.exp(-16.0))
        self.assertEqual(wave(0.0), 0.0)
        self.assertEqual(wave(1.0), 0.0)
        self.assertIsInstance(wave(0.3), float)
        np.testing.assert_array_equal(wave(np.array([-1.0, 0.5, 2.0])), [0.0, 2.0, 0.0])

    def test_doppler(self):
        expected = 0.3 * math.sin(2.0 * math.pi * 1.15 / 0.25)
        self.assertAlmostEqual(doppler(0.5), expected)
        self.assertEqual(doppler(0.0), 0.0)
        self.assertEqual(doppler(1.5), 0.0)
        self.assertEqual(doppler(np.linspace(0.1, 0.9, 5)).shape, (5,))

    def test_grid(self):
        grid = curve_grid(4)
        np.testing.assert_allclose(grid, [0.2, 0.4, 0.6, 0.8])


class TestGenerators(unittest.TestCase):
    def test_mixture_mean(self):
        y, x = gen_mixture_data(MixtureSpec(T=200000), np.random.default_rng(0))
        self.assertEqual(y.shape, x.shape)
        self.assertAlmostEqual(y.mean(), 0.995, delta=0.02)
        self.assertAlmostEqual(x.mean(), 0.0, delta=0.02)

    def test_mixture_validation(self):
        with self.assertRaises(SpecError):
            MixtureSpec(weights=(0.5, 0.2, 0.2)).validate()
        with self.assertRaises(SpecError):
            MixtureSpec(cov=((1.0, 2.0), (2.0, 1.0))).validate()

    def test_mixture_component_frequencies(self):
        # components far apart so each draw can be labelled by its response
        spec = MixtureSpec(means=((0.0, 0.0), (60.0, 0.0), (-60.0, 0.0)), T=20000)
        y, _ = gen_mixture_data(spec, np.random.default_rng(5))
        counts = [np.sum(np.abs(y) < 30.0), np.sum(y > 30.0), np.sum(y < -30.0)]
        self.assertEqual(sum(counts), spec.T)
        for count, weight in zip(counts, spec.weights):
            with self.subTest(weight=weight):
                result = stats.binomtest(int(count), spec.T, weight)
                self.assertGreater(result.pvalue, 0.001)

    def test_linear_het_standardized_errors(self):
        for error_kind, law in (("student_t", stats.t(3.0)), ("gaussian", stats.norm)):
            with self.subTest(error_kind=error_kind):
                spec = CurveSimSpec(
                    "wave",
                    noise="linear_het",
                    T=5000,
                    sigma=0.5,
                    nu=3.0,
                    error_kind=error_kind,
                )
                y, x = gen_curve_data(spec, np.random.default_rng(6))
                standardized = (y - wave(x)) / (0.5 * (1.0 + x))
                self.assertGreater(stats.kstest(standardized, law.cdf).pvalue, 0.001)

    def test_error_shift(self):
        self.assertAlmostEqual(
            RegressionSimSpec(tau=0.1).error_shift, 3.8446, delta=1e-4
        )
        self.assertAlmostEqual(RegressionSimSpec(tau=0.5).error_shift, 0.0)
        spec = RegressionSimSpec(error_kind="student_t", tau=0.9)
        self.assertAlmostEqual(spec.error_shift, -3.0 * stats.t.ppf(0.9, 2.0))

    def test_regression_quantile_is_linear_predictor(self):
        for error_kind in ("gaussian", "student_t"):
            with self.subTest(error_kind=error_kind):
                spec = RegressionSimSpec(
                    sim_id=1, error_kind=error_kind, tau=0.1, T=50000
                )
                y, X, beta = gen_regression_data(spec, np.random.default_rng(1))
                self.assertEqual(X.shape, (50000, 8))
                share = np.mean(y - X @ beta <= 0.0)
                self.assertAlmostEqual(share, 0.1, delta=0.01)

    def test_covariates_are_correlated(self):
        spec = RegressionSimSpec(sim_id=2, T=50000)
        _, X, beta = gen_regression_data(spec, np.random.default_rng(2))
        np.testing.assert_allclose(beta, 0.85)
        self.assertAlmostEqual(np.corrcoef(X[:, 0], X[:, 1])[0, 1], 0.5, delta=0.02)
        self.assertAlmostEqual(np.corrcoef(X[:, 0], X[:, 2])[0, 1], 0.25, delta=0.02)

    def test_unknown_simulation(self):
        with self.assertRaises(SpecError):
            gen_regression_data(RegressionSimSpec(sim_id=4), np.random.default_rng(0))

    def test_curve_defaults(self):
        self.assertEqual(CurveSimSpec("wave").sample_size, 200)
        self.assertEqual(CurveSimSpec("doppler").sample_size, 512)
        self.assertAlmostEqual(CurveSimSpec("wave").scale, math.sqrt(0.4))
        self.assertAlmostEqual(CurveSimSpec("doppler").scale, math.sqrt(0.1))

    def test_heteroscedastic_amplitude(self):
        x = np.array([0.0, 0.5, 1.0])
        spec = CurveSimSpec("wave", noise="quad_het", sigma=2.0)
        np.testing.assert_allclose(spec.amplitude(x), [2.0, 2.5, 4.0])
        spec = CurveSimSpec("wave", noise="linear_het", sigma=2.0)
        np.testing.assert_allclose(spec.amplitude(x), [2.0, 3.0, 4.0])
        self.assertEqual(spec.error_law, "student_t")

    def test_noiseless_curve(self):
        spec = CurveSimSpec("doppler", T=64, noise_scale=0.0)
        y, x = gen_curve_data(spec, np.random.default_rng(0))
        np.testing.assert_array_equal(y, doppler(x))
        np.testing.assert_array_equal(spec.quantile_curve(x, 0.9), doppler(x))

    def test_quantile_curve(self):
        spec = CurveSimSpec("wave", noise="student_t", sigma=1.0, nu=3.0)
        x = curve_grid(10)
        np.testing.assert_allclose(
            spec.quantile_curve(x, 0.75), wave(x) + stats.t.ppf(0.75, 3.0)
        )


class TestMetrics(unittest.TestCase):
    def test_mmad(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        self.assertAlmostEqual(mmad([1.0, 1.0], [0.0, 0.5], X), (1.0 + 0.5 + 1.5) / 3)
        self.assertEqual(mmad([1.0, 2.0], [1.0, 2.0], X), 0.0)
        with self.assertRaises(SpecError):
            mmad([1.0], [1.0, 2.0], X)

    def test_replicate_median(self):
        self.assertEqual(replicate_mmad([3.0, 1.0, 2.0]), 2.0)
        with self.assertRaises(SpecError):
            replicate_mmad([])

    def test_curve_mse(self):
        self.assertAlmostEqual(curve_mse([1.0, 2.0], [0.0, 0.0]), 2.5)
        with self.assertRaises(SpecError):
            curve_mse([1.0], [1.0, 2.0])


class TestPlan(unittest.TestCase):
    def test_chain_seed(self):
        self.assertEqual(chain_seed(1, 2, 0, 1), chain_seed(1, 2, 0, 1))
        seeds = {
            chain_seed(1, r, t, m) for r in range(3) for t in range(3) for m in (0, 1)
        }
        self.assertEqual(len(seeds), 18)

    def test_chain_length(self):
        self.assertEqual(ExperimentPlan("sim1").chain_length, (20000, 5000))
        self.assertEqual(ExperimentPlan("mixture").chain_length, (50000, 10000))
        plan = ExperimentPlan("sim2", iterations=200)
        self.assertEqual(plan.chain_length, (200, 100))
        plan = ExperimentPlan("wave", iterations=300, burn_in=10)
        self.assertEqual(plan.chain_length, (300, 10))
        self.assertEqual(ExperimentPlan("doppler").knot_count, 25)
        self.assertEqual(ExperimentPlan("doppler").sample_size, 512)
        self.assertIsNone(ExperimentPlan("sim3").knot_count)

    def test_validation(self):
        with self.assertRaises(SpecError):
            ExperimentPlan("sim9").validate()
        with self.assertRaises(SpecError):
            ExperimentPlan("sim1", taus=(0.5, 1.0)).validate()
        with self.assertRaises(SpecError):
            ExperimentPlan("sim1", iterations=10, burn_in=10).validate()
        with self.assertRaises(SpecError):
            ExperimentPlan("wave", noise="cauchy").validate()

    def test_tasks(self):
        plan = ExperimentPlan("sim1", taus=(0.1, 0.5), replicates=3)
        self.assertEqual(plan.error_labels, ("gaussian", "student_t"))
        self.assertEqual(len(experiment_tasks(plan)), 3 * 2 * 2 * 2)
        plan = ExperimentPlan("sim1", error_kind="student_t")
        self.assertEqual(plan.error_labels, ("student_t",))
        plan = ExperimentPlan("wave", noise="quad_het")
        self.assertEqual(plan.error_labels, ("quad_het",))
        self.assertEqual(ExperimentPlan("mixture").error_labels, ("mixture",))


class TestRunExperiment(unittest.TestCase):
    def small_plan(self, experiment, **kwargs):
        values = dict(
            taus=(0.5,), replicates=1, seed=4, iterations=40, burn_in=20, T=40
        )
        values.update(kwargs)
        return ExperimentPlan(experiment, **values)

    def test_regression_rows(self):
        plan = self.small_plan("sim1", error_kind="gaussian")
        rows = run_experiment(plan)
        self.assertEqual([row["method"] for row in rows], ["ALD", "SEP"])
        ald, sep = rows
        self.assertEqual(ald["metric"], "mad")
        self.assertIsNone(ald["alpha_mean"])
        self.assertTrue(0.0 < sep["alpha_mean"] < 2.0)
        self.assertIsNone(ald["accept_alpha"])
        self.assertIsNotNone(sep["accept_alpha"])
        self.assertTrue(math.isfinite(sep["value"]))
        self.assertEqual(run_experiment(plan), rows)

    def test_summary(self):
        plan = self.small_plan("sim3", error_kind="student_t", replicates=2)
        rows = run_experiment(plan)
        self.assertEqual(len(rows), 4)
        summary = summarize_experiment(rows)
        self.assertEqual(len(summary), 2)
        self.assertEqual({row["replicates"] for row in summary}, {2})
        ald_values = [row["value"] for row in rows if row["method"] == "ALD"]
        ald_summary = [row for row in summary if row["method"] == "ALD"][0]
        expected = float(np.median(ald_values))
        self.assertAlmostEqual(ald_summary["median_value"], expected)
        self.assertIsNone(ald_summary["median_alpha"])
        sep_summary = [row for row in summary if row["method"] == "SEP"][0]
        sep_alphas = [row["alpha_mean"] for row in rows if row["method"] == "SEP"]
        self.assertAlmostEqual(
            sep_summary["median_alpha"], float(np.median(sep_alphas))
        )

    def test_mixture_rows(self):
        rows = run_experiment(self.small_plan("mixture", T=50))
        self.assertEqual({row["metric"] for row in rows}, {"slope"})
        self.assertEqual({row["error"] for row in rows}, {"mixture"})

    def test_curve_rows(self):
        plan = self.small_plan("wave", knots=4, iterations=30, burn_in=10)
        rows = run_experiment(plan)
        self.assertEqual({row["metric"] for row in rows}, {"mse"})
        for row in rows:
            self.assertIsNotNone(row["accept_theta"])
            self.assertTrue(math.isfinite(row["value"]))

    def test_worker_processes_give_same_rows(self):
        plan = self.small_plan("sim2", error_kind="gaussian", taus=(0.25, 0.75))
        self.assertEqual(run_experiment(plan, jobs=2), run_experiment(plan))


if __name__ == "__main__":
    unittest.main()
