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
"""Processor that reads the response, design matrix and smooth covariates
from a CSV file"""

import csv
import math
from typing import Dict, Sequence, Tuple

import numpy as np

from sepqrlib import DataError, Processor, config_input_variables

__all__ = ["CSVDataLoader", "load_csv"]


def _cell_value(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except (TypeError, ValueError) as err:
        raise DataError(f"non-numeric value {cell!r}", row=row, column=column) from err
    if not math.isfinite(value):
        raise DataError(f"non-finite value {cell!r}", row=row, column=column)
    return value


def load_csv(
    path: str,
    response: str,
    covariates: Sequence[str] = (),
    smooth_columns: Sequence[str] = (),
) -> Tuple[np.ndarray, np.ndarray, Dict[str, np.ndarray]]:
    """Read a UTF-8 CSV with a header row.

    Returns the response vector, the T x len(covariates) matrix and one
    vector per smooth column. Row numbers in errors count the header as
    row 1."""
    columns = list(dict.fromkeys([response, *covariates, *smooth_columns]))
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{path} is empty")
            header = [name.strip() for name in header]
            for column in columns:
                if column not in header:
                    raise DataError(f"{path} has no column '{column}'", column=column)
            index = {column: header.index(column) for column in columns}
            values = {column: [] for column in columns}
            for row_number, row in enumerate(reader, start=2):
                if not row:
                    continue
                for column in columns:
                    if index[column] >= len(row):
                        raise DataError("missing value", row=row_number, column=column)
                    cell = row[index[column]].strip()
                    values[column].append(_cell_value(cell, row_number, column))
    except OSError as err:
        raise DataError(f"Could not read {path}: {err}") from err
    except UnicodeDecodeError as err:
        raise DataError(f"{path} is not valid UTF-8: {err}") from err

    if not values[response]:
        raise DataError(f"{path} has no data rows")
    y = np.array(values[response])
    X = np.empty((y.size, 0))
    if covariates:
        X = np.column_stack([values[column] for column in covariates])
    smooth = {column: np.array(values[column]) for column in smooth_columns}
    return y, X, smooth


class CSVDataLoader(Processor):
    """Loads the response, linear covariates and smooth covariates of a fit
    from a CSV file."""

    description = __doc__
    input_variables = {
        "input_csv": {"required": True, "description": "Path to the CSV file."},
        "response": {"required": True, "description": "Response column name."},
        **config_input_variables("covariates", "smooth", "intercept"),
    }
    output_variables = {
        "y": {"description": "Response vector."},
        "X": {"description": "Design matrix, intercept column first if any."},
        "design_names": {"description": "Names of the design matrix columns."},
        "smooth_data": {"description": "Covariate vector of every smooth term."},
    }

    def main(self):
        covariates = list(self.env["covariates"])
        smooth_columns = [term["column"] for term in self.env["smooth"]]
        y, X, smooth = load_csv(
            self.env["input_csv"], self.env["response"], covariates, smooth_columns
        )
        names = covariates
        if self.env["intercept"]:
            X = np.column_stack((np.ones(y.size), X))
            names = ["intercept"] + names
        if X.shape[1] == 0:
            raise DataError("no covariates and no intercept")
        if y.size < X.shape[1]:
            raise DataError(f"{y.size} data rows for {X.shape[1]} design columns")
        for column, values in smooth.items():
            if np.ptp(values) == 0.0:
                raise DataError("smooth covariate is constant", column=column)
        self.env["y"] = y
        self.env["X"] = X
        self.env["design_names"] = names
        self.env["smooth_data"] = smooth
        self.output(
            f"Read {y.size} rows, {X.shape[1]} design columns, "
            f"{len(smooth)} smooth terms from {self.env['input_csv']}"
        )
