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
from dataclasses import replace

import numpy as np
from scipy import integrate, stats

from sepqrlib import SpecError
from sepqrlib.distributions import (
    GigParams,
    gamma_log_pdf,
    gig_log_pdf,
    gig_sample,
    mvlaplace_log_kernel,
)
from sepqrlib.gam import (
    BlockState,
    GamChainState,
    GamModelSpec,
    SplineBlock,
    block_log_prior,
    build_bspline_basis,
    build_difference_matrix,
    gam_log_likelihood,
    gibbs_update_h_sq,
    gibbs_update_phi,
    h_sq_full_conditional,
    img_step_theta_block,
    initial_theta_proposals,
    initial_thetas,
    phi_full_conditional,
    run_gam_sampler,
    smooth_offset,
)
from sepqrlib.linearmodel import (
    PriorHyper,
    SamplerSettings,
    initial_state,
    run_linear_sampler,
)
from tests import oracle_log_likelihood, toy_linear_spec


def toy_gam_spec(T=80, k=6, iterations=60, burn_in=30, seed=0, tau=0.5):
    rng = np.random.default_rng(99)
    z = np.sort(rng.uniform(0.0, 1.0, T))
    y = 0.5 + np.sin(2.0 * np.pi * z) + rng.laplace(0.0, 0.3, T)
    block = SplineBlock(z, k=k, d=4, delta=2, name="z")
    settings = SamplerSettings(iterations=iterations, burn_in=burn_in, seed=seed)
    return GamModelSpec(
        np.ones((T, 1)), y, tau, [block], sampler=settings, names=["intercept"]
    )


def initial_gam_state(spec, rng):
    thetas = initial_thetas(spec)
    offset = smooth_offset(thetas, spec)
    linear_state = initial_state(spec, rng, offset)
    state = GamChainState(
        **vars(linear_state), blocks=[BlockState(theta) for theta in thetas]
    )
    return state, initial_theta_proposals(spec, thetas, offset)


class TestBasis(unittest.TestCase):
    def setUp(self):
        self.z = np.linspace(-2.0, 3.0, 101)

    def test_partition_of_unity(self):
        for k, d in ((5, 4), (10, 3), (3, 2)):
            with self.subTest(k=k, d=d):
                basis = build_bspline_basis(self.z, k, d, center=False)
                self.assertEqual(basis.shape, (101, k + d))
                np.testing.assert_allclose(basis.sum(axis=1), 1.0, atol=1e-12)
                self.assertTrue(np.all(basis >= -1e-15))

    def test_centred_columns(self):
        basis = build_bspline_basis(self.z, 8, 4)
        np.testing.assert_allclose(basis.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(basis @ np.ones(12), 0.0, atol=1e-10)

    def test_order_one_is_indicator(self):
        basis = build_bspline_basis(self.z, 4, 1, center=False)
        self.assertEqual(basis.shape, (101, 5))
        self.assertTrue(np.all(np.isin(basis, (0.0, 1.0))))
        np.testing.assert_array_equal(basis.sum(axis=1), 1.0)

    def test_constant_covariate(self):
        with self.assertRaises(SpecError):
            build_bspline_basis(np.ones(10), 3, 4)


class TestPenalty(unittest.TestCase):
    def test_second_differences_annihilate_lines(self):
        D = build_difference_matrix(10, 2)
        self.assertEqual(D.shape, (8, 10))
        line = 3.0 - 0.5 * np.arange(10)
        np.testing.assert_allclose(D @ line, 0.0, atol=1e-12)
        self.assertEqual(np.linalg.matrix_rank(D.T @ D), 8)

    def test_first_differences(self):
        D = build_difference_matrix(5, 1)
        np.testing.assert_array_equal(D @ np.arange(5.0), np.ones(4))

    def test_too_few_coefficients(self):
        with self.assertRaises(SpecError):
            build_difference_matrix(2, 2)

    def test_block(self):
        block = SplineBlock(np.linspace(0.0, 1.0, 50), k=5, d=4)
        self.assertEqual(block.m, 9)
        self.assertEqual(block.penalty.shape, (9, 9))
        Z = block.constraint_basis
        self.assertEqual(Z.shape, (9, 8))
        np.testing.assert_allclose(Z.T @ Z, np.eye(8), atol=1e-12)
        np.testing.assert_allclose(np.ones(9) @ Z, 0.0, atol=1e-12)
        with self.assertRaises(ValueError):
            block.B[0, 0] = 1.0

    def test_laplace_kernel_ignores_penalty_null_space(self):
        D = build_difference_matrix(4, 2)
        penalty = D.T @ D
        h = 1.7
        self.assertAlmostEqual(
            mvlaplace_log_kernel(np.zeros(4), h, penalty), 4 * math.log(h)
        )
        self.assertAlmostEqual(
            mvlaplace_log_kernel(np.array([1.0, 2.0, 3.0, 4.0]), h, penalty),
            4 * math.log(h),
            places=10,
        )
        curved = np.array([0.0, 1.0, 0.0, 0.0])
        expected = 4 * math.log(h) - h * math.sqrt(curved @ penalty @ curved)
        self.assertAlmostEqual(mvlaplace_log_kernel(curved, h, penalty), expected)

    def test_mismatched_rows(self):
        block = SplineBlock(np.linspace(0.0, 1.0, 30), k=4)
        with self.assertRaises(SpecError):
            GamModelSpec(np.ones((20, 1)), np.zeros(20), 0.5, [block])


class TestGroupLassoConditionals(unittest.TestCase):
    """phi and h^2 updates sample the conditionals of the block prior."""

    def setUp(self):
        self.spec = toy_gam_spec()
        self.block = self.spec.blocks[0]
        rng = np.random.default_rng(5)
        eta = rng.standard_normal(self.block.m - 1)
        self.theta = self.block.constraint_basis @ eta
        self.state = BlockState(self.theta, phi=0.8, h_sq=1.7)

    def prior_at(self, **changes):
        return block_log_prior(replace(self.state, **changes), self.block, self.spec)

    def chain_state(self):
        return GamChainState(
            np.zeros(1), 1.0, 1.0, np.ones(1), np.ones(1), blocks=[self.state]
        )

    def test_phi_conditional(self):
        params = phi_full_conditional(0, self.chain_state(), self.spec)
        self.assertEqual(params.p, 0.5)
        self.assertAlmostEqual(params.chi, self.block.quadratic_form(self.theta))
        for a, b in ((0.1, 2.0), (5.0, 0.7)):
            with self.subTest(a=a, b=b):
                joint = self.prior_at(phi=a) - self.prior_at(phi=b)
                gig = gig_log_pdf(a, params) - gig_log_pdf(b, params)
                self.assertAlmostEqual(joint, gig, delta=1e-9)

    def test_h_sq_conditional(self):
        hyper = self.spec.prior_hyper
        params = h_sq_full_conditional(0, self.chain_state(), self.spec)
        self.assertAlmostEqual(params.p, (self.block.m + 1 - hyper.a_h) / 2.0)
        no_size = GigParams(-hyper.a_h / 2.0, hyper.b_h / 2.0, self.state.phi)
        joint = self.prior_at(h_sq=0.3) - self.prior_at(h_sq=4.0)
        gig = gig_log_pdf(0.3, params) - gig_log_pdf(4.0, params)
        self.assertAlmostEqual(joint, gig, delta=1e-9)
        wrong = gig_log_pdf(0.3, no_size) - gig_log_pdf(4.0, no_size)
        self.assertGreater(abs(joint - wrong), 1.0)

    def test_phi_marginal_is_multivariate_laplace(self):
        m = self.block.m
        penalty = self.block.penalty

        def log_marginal(theta, h):
            q = self.block.quadratic_form(theta)

            def integrand(phi):
                if phi <= 0.0:
                    return 0.0
                return math.exp(
                    -0.5 * m * math.log(phi)
                    - q / (2.0 * phi)
                    + gamma_log_pdf(phi, (m + 1.0) / 2.0, h * h / 2.0)
                )

            peak = math.sqrt(q) / h
            low, _ = integrate.quad(integrand, 0.0, peak, limit=200)
            high, _ = integrate.quad(integrand, peak, np.inf, limit=200)
            return math.log(low + high)

        offsets = []
        for scale, h in ((1.0, 0.7), (0.4, 1.5), (2.0, 1.0)):
            theta = scale * self.theta
            offsets.append(
                log_marginal(theta, h) - mvlaplace_log_kernel(theta, h, penalty)
            )
        np.testing.assert_allclose(offsets, offsets[0], atol=1e-6)

    def test_gibbs_updates_draw_from_conditionals(self):
        state = self.chain_state()
        for update, conditional in (
            (gibbs_update_phi, phi_full_conditional),
            (gibbs_update_h_sq, h_sq_full_conditional),
        ):
            with self.subTest(update=update.__name__):
                draw = update(0, state, self.spec, np.random.default_rng(11))
                params = conditional(0, state, self.spec)
                expected = gig_sample(params, np.random.default_rng(11))
                self.assertEqual(draw, expected)
                self.assertGreater(draw, 0.0)


class TestGamLikelihood(unittest.TestCase):
    def test_smooth_terms_shift_the_location(self):
        spec = toy_gam_spec()
        block = spec.blocks[0]
        theta = block.constraint_basis @ np.linspace(-1.0, 1.0, block.m - 1)
        beta = np.array([0.4])
        expected = oracle_log_likelihood(
            spec.y - spec.X @ beta - block.B @ theta, 0.6, 1.3, spec.tau
        )
        self.assertAlmostEqual(
            gam_log_likelihood(beta, [theta], 0.6, 1.3, spec), expected, places=8
        )

    def test_without_blocks_matches_linear_likelihood(self):
        linear = toy_linear_spec()
        spec = GamModelSpec(linear.X, linear.y, linear.tau, [])
        beta = np.array([1.0, 2.0])
        expected = oracle_log_likelihood(linear.y - linear.X @ beta, 0.5, 1.0, 0.5)
        self.assertAlmostEqual(
            gam_log_likelihood(beta, [], 0.5, 1.0, spec), expected, places=8
        )


class TestThetaMove(unittest.TestCase):
    def test_ratio_matches_recomputation(self):
        spec = toy_gam_spec()
        block = spec.blocks[0]
        rng = np.random.default_rng(8)
        state, proposals = initial_gam_state(spec, rng)
        gaussian = proposals[0].gaussian
        q = stats.multivariate_normal(gaussian.mean, gaussian.cov)
        Z = block.constraint_basis
        seen = []

        def monitor(label, before, candidate, log_ratio, accepted):
            phi = before.blocks[0].phi
            old, new = before.blocks[0].theta, candidate.blocks[0].theta
            linear = spec.y - spec.X @ before.beta
            lik_old = oracle_log_likelihood(
                linear - block.B @ old, before.sigma, before.alpha, spec.tau
            )
            lik_new = oracle_log_likelihood(
                linear - block.B @ new, before.sigma, before.alpha, spec.tau
            )
            expected = (
                lik_new
                - lik_old
                - block.quadratic_form(new) / (2.0 * phi)
                + block.quadratic_form(old) / (2.0 * phi)
                + q.logpdf(Z.T @ old)
                - q.logpdf(Z.T @ new)
            )
            seen.append(label)
            tolerance = 1e-8 * max(1.0, abs(expected))
            self.assertAlmostEqual(log_ratio, expected, delta=tolerance)
            np.testing.assert_allclose(new.sum(), 0.0, atol=1e-9)

        for _ in range(25):
            state, _ = img_step_theta_block(0, state, proposals[0], spec, rng, monitor)
        self.assertEqual(set(seen), {"theta[z]"})


class TestRunGamSampler(unittest.TestCase):
    def test_draws_and_fitted(self):
        spec = toy_gam_spec()
        draws = run_gam_sampler(spec)
        self.assertEqual(len(draws), 30)
        self.assertIn("theta[z][0]", draws.names)
        self.assertIn("phi[z]", draws.names)
        self.assertIn("h_sq[z]", draws.names)
        self.assertEqual(draws.counts["theta[z]"][1], 60)
        self.assertEqual(draws.meta["model"], "gam")
        self.assertEqual(draws.meta["fitted"].shape, (80,))
        self.assertTrue(np.all(np.isfinite(draws.meta["fitted"])))
        columns = [draws.names.index(f"theta[z][{i}]") for i in range(10)]
        thetas = draws.draws[:, columns]
        np.testing.assert_allclose(thetas.sum(axis=1), 0.0, atol=1e-8)

    def test_deterministic(self):
        first = run_gam_sampler(toy_gam_spec(seed=3))
        second = run_gam_sampler(toy_gam_spec(seed=3))
        np.testing.assert_array_equal(first.draws, second.draws)

    def test_no_smooth_terms_reproduces_linear_chain(self):
        linear = toy_linear_spec(seed=7)
        gam = GamModelSpec(
            linear.X,
            linear.y,
            linear.tau,
            [],
            linear.prior_hyper,
            linear.sampler,
            linear.names,
        )
        expected = run_linear_sampler(linear)
        actual = run_gam_sampler(gam)
        self.assertEqual(actual.names, expected.names)
        np.testing.assert_array_equal(actual.draws, expected.draws)
        self.assertEqual(actual.counts, expected.counts)

    def test_follows_curve(self):
        spec = toy_gam_spec(T=150, k=8, iterations=1500, burn_in=750, seed=1)
        draws = run_gam_sampler(spec)
        z = spec.blocks[0].z
        truth = 0.5 + np.sin(2.0 * np.pi * z)
        error = np.mean((draws.meta["fitted"] - truth) ** 2)
        self.assertLess(error, 0.1)

    def test_gaussian_linear_prior(self):
        spec = toy_gam_spec()
        spec.prior_hyper = PriorHyper(beta_prior="gaussian")
        draws = run_gam_sampler(spec)
        self.assertNotIn("omega[intercept]", draws.names)


if __name__ == "__main__":
    unittest.main()
