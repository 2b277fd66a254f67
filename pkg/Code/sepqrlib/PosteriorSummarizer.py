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
"""Processor that writes posterior summaries"""

import os

from sepqrlib import DataError, Processor, ProcessorError, config_input_variables
from sepqrlib.diagnostics import read_draws_csv, summarize, write_summary_csv

__all__ = ["PosteriorSummarizer"]


class PosteriorSummarizer(Processor):
    """Writes mean, sd, HPD interval and effective sample size of every
    parameter, either for the posterior of this run or for a draws file
    written earlier."""

    description = __doc__
    input_variables = {
        "posterior": {
            "required": False,
            "description": "PosteriorDraws of this run; draws_csv is read if unset.",
        },
        "quantile": {
            "required": False,
            "description": "Quantile level, used to name the summary file.",
        },
        **config_input_variables("draws_csv", "hpd_level", "output_dir"),
    }
    output_variables = {
        "summary_rows": {"description": "List of SummaryRow."},
        "summary_file": {"description": "Path of the summary table."},
    }

    def summary_path(self):
        output_dir = self.env["output_dir"]
        if self.env.get("posterior") is not None:
            return os.path.join(output_dir, f"summary_tau{self.env['quantile']:g}.csv")
        name = os.path.basename(self.env["draws_csv"])
        if name.startswith("draws"):
            name = "summary" + name[len("draws") :]
        else:
            name = "summary_" + name
        return os.path.join(output_dir, name)

    def main(self):
        posterior = self.env.get("posterior")
        if posterior is None:
            if not self.env.get("draws_csv"):
                raise ProcessorError("Need either posterior or draws_csv")
            posterior = read_draws_csv(self.env["draws_csv"])
            if len(posterior) < 2:
                raise DataError(f"{self.env['draws_csv']} holds fewer than two draws")
        elif self.env.get("quantile") is None:
            raise ProcessorError("quantile is required to name the summary file")
        rows = summarize(posterior, self.env["hpd_level"])
        path = self.summary_path()
        os.makedirs(self.env["output_dir"], exist_ok=True)
        self.record_output_file(path)
        write_summary_csv(path, rows)
        self.output(f"Wrote summary of {len(rows)} parameters to {path}")
        self.env["summary_rows"] = rows
        self.env["summary_file"] = path
