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
"""Processor that writes posterior draws"""

import os

from sepqrlib import Processor, config_input_variables
from sepqrlib.diagnostics import write_csv_table, write_draws_csv

__all__ = ["DrawsWriter"]


class DrawsWriter(Processor):
    """Writes the retained draws to draws_tau<tau>.csv and, for additive
    models, the posterior mean fitted quantile to fitted_tau<tau>.csv."""

    description = __doc__
    input_variables = {
        "posterior": {"required": True, "description": "PosteriorDraws to write."},
        "quantile": {"required": True, "description": "Quantile level of the fit."},
        **config_input_variables("output_dir"),
    }
    output_variables = {
        "draws_file": {"description": "Path of the draws table."},
        "fitted_file": {"description": "Path of the fitted values, if written."},
    }

    def main(self):
        posterior = self.env["posterior"]
        output_dir = self.env["output_dir"]
        tau = self.env["quantile"]
        os.makedirs(output_dir, exist_ok=True)

        draws_file = os.path.join(output_dir, f"draws_tau{tau:g}.csv")
        self.record_output_file(draws_file)
        write_draws_csv(draws_file, posterior)
        self.output(f"Wrote {len(posterior)} draws to {draws_file}")
        self.env["draws_file"] = draws_file

        fitted = posterior.meta.get("fitted")
        if fitted is not None:
            fitted_file = os.path.join(output_dir, f"fitted_tau{tau:g}.csv")
            self.record_output_file(fitted_file)
            write_csv_table(
                fitted_file,
                ["observation", "fitted"],
                ([t + 1, value] for t, value in enumerate(fitted)),
            )
            self.output(f"Wrote fitted quantiles to {fitted_file}")
            self.env["fitted_file"] = fitted_file
