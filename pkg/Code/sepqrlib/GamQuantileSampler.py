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
"""Processor that runs the additive P-spline SEP quantile regression
sampler"""

from sepqrlib import Processor, config_input_variables, progress_printer
from sepqrlib.gam import GamModelSpec, SplineBlock, run_gam_sampler
from sepqrlib.linearmodel import PriorHyper, SamplerSettings
from sepqrlib.LinearQuantileSampler import SAMPLER_INPUT_VARIABLES

__all__ = ["GamQuantileSampler"]


class GamQuantileSampler(Processor):
    """Draws from the posterior of an additive quantile regression: linear
    terms with lasso priors plus P-spline terms with group lasso priors."""

    description = __doc__
    input_variables = {
        **SAMPLER_INPUT_VARIABLES,
        "smooth_data": {
            "required": True,
            "description": "Covariate vector of every smooth term.",
        },
        "smooth": {
            "required": True,
            "description": "Smooth terms as column, knots, degree, delta.",
        },
        **config_input_variables("a_h", "b_h"),
    }
    output_variables = {
        "posterior": {"description": "PosteriorDraws of the retained iterations."}
    }

    def main(self):
        blocks = [
            SplineBlock(
                self.env["smooth_data"][term["column"]],
                k=term["knots"],
                d=term["degree"],
                delta=term["delta"],
                name=term["column"],
            )
            for term in self.env["smooth"]
        ]
        spec = GamModelSpec(
            self.env["X"],
            self.env["y"],
            self.env["quantile"],
            blocks,
            PriorHyper.from_mapping(self.env),
            SamplerSettings.from_mapping(self.env),
            names=self.env["design_names"],
        )
        label = f"tau={spec.tau:g}"
        progress = None
        if int(self.env.get("verbose", 0)) >= 2:
            progress = progress_printer(label, self.env["report_every"])
        self.output(
            f"Sampling {label} with {len(blocks)} smooth terms: "
            f"N={spec.sampler.iterations}, M={spec.sampler.burn_in}"
        )
        posterior = run_gam_sampler(spec, progress)
        rates = ", ".join(f"{k}={v:.3f}" for k, v in posterior.acceptance.items())
        self.output(f"Acceptance rates {label}: {rates}")
        self.env["posterior"] = posterior
