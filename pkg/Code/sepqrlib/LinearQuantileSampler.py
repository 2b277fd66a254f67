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
"""Processor that runs the linear SEP quantile regression sampler"""

from sepqrlib import Processor, config_input_variables, progress_printer
from sepqrlib.linearmodel import (
    LinearModelSpec,
    PriorHyper,
    SamplerSettings,
    run_linear_sampler,
)

__all__ = ["LinearQuantileSampler", "SAMPLER_INPUT_VARIABLES"]

SAMPLER_INPUT_VARIABLES = {
    "y": {"required": True, "description": "Response vector."},
    "X": {"required": True, "description": "Design matrix."},
    "design_names": {"required": True, "description": "Design column names."},
    "quantile": {"required": True, "description": "Quantile level of this fit."},
    **config_input_variables(
        "iterations",
        "burn_in",
        "seed",
        "psi",
        "varpi",
        "a",
        "b",
        "c",
        "d",
        "fixed_alpha",
        "adapt_C",
        "adaptation",
        "beta_prior",
        "beta_prior_variance",
        "report_every",
    ),
}


class LinearQuantileSampler(Processor):
    """Draws from the posterior of a linear quantile regression with the SEP
    likelihood and lasso (or Gaussian) coefficient priors."""

    description = __doc__
    input_variables = SAMPLER_INPUT_VARIABLES
    output_variables = {
        "posterior": {"description": "PosteriorDraws of the retained iterations."}
    }

    def main(self):
        spec = LinearModelSpec(
            self.env["X"],
            self.env["y"],
            self.env["quantile"],
            PriorHyper.from_mapping(self.env),
            SamplerSettings.from_mapping(self.env),
            names=self.env["design_names"],
        )
        label = f"tau={spec.tau:g}"
        progress = None
        if int(self.env.get("verbose", 0)) >= 2:
            progress = progress_printer(label, self.env["report_every"])
        self.output(
            f"Sampling {label}: N={spec.sampler.iterations}, "
            f"M={spec.sampler.burn_in}, seed={spec.sampler.seed}"
        )
        posterior = run_linear_sampler(spec, progress)
        rates = ", ".join(f"{k}={v:.3f}" for k, v in posterior.acceptance.items())
        self.output(f"Acceptance rates {label}: {rates}")
        self.env["posterior"] = posterior
