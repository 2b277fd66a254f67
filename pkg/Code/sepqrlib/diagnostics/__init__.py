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

"""Posterior draw container and summaries"""

import csv
import math
from typing import Any, Dict, Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import fft

from sepqrlib import DataError, SamplerError


class PosteriorDraws:
    """Retained draws of one chain.

    `draws` has one row per retained iteration and one column per entry of
    `names`; `counts` maps a block label to (accepted, proposed). The arrays
    are read-only once constructed."""

    def __init__(
        self,
        names: Sequence[str],
        draws: np.ndarray,
        counts: Dict[str, Tuple[int, int]],
        meta: Dict[str, Any],
        iterations: np.ndarray = None,
        log_likelihood: np.ndarray = None,
    ):
        draws = np.array(draws, dtype=float, ndmin=2)
        if draws.shape[1] != len(names):
            raise SamplerError(
                f"{len(names)} parameter names for {draws.shape[1]} columns"
            )
        if iterations is None:
            iterations = np.arange(1, draws.shape[0] + 1)
        if log_likelihood is None:
            log_likelihood = np.full(draws.shape[0], np.nan)
        self.names: List[str] = list(names)
        self.draws = draws
        self.iterations = np.asarray(iterations, dtype=int)
        self.log_likelihood = np.asarray(log_likelihood, dtype=float)
        for array in (self.draws, self.iterations, self.log_likelihood):
            array.setflags(write=False)
        self.counts = dict(counts)
        self.meta = dict(meta)

    def __len__(self):
        return self.draws.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.names.index(name)]

    def posterior_mean(self, prefix: str) -> np.ndarray:
        """Posterior means of every parameter whose label starts with prefix."""
        idx = [i for i, name in enumerate(self.names) if name.startswith(prefix)]
        return self.draws[:, idx].mean(axis=0)

    @property
    def acceptance(self) -> Dict[str, float]:
        return acceptance_report(self)


class SummaryRow(NamedTuple):
    parameter: str
    mean: float
    sd: float
    hpd_low: float
    hpd_high: float
    ess: float


SUMMARY_HEADER = list(SummaryRow._fields)


def acceptance_report(draws: PosteriorDraws) -> Dict[str, float]:
    """Accepted / proposed per block; blocks never proposed are left out."""
    return {
        block: accepted / proposed
        for block, (accepted, proposed) in draws.counts.items()
        if proposed > 0
    }


def hpd_interval(samples: np.ndarray, level: float = 0.95) -> Tuple[float, float]:
    """Shortest window of sorted samples holding at least `level` of them."""
    ordered = np.sort(np.asarray(samples, dtype=float))
    n = ordered.size
    if n == 0:
        raise ValueError("No samples for an HPD interval")
    width = min(int(math.floor(level * n)), n - 1)
    starts = n - width
    gaps = ordered[width:] - ordered[:starts]
    best = int(np.argmin(gaps))
    return float(ordered[best]), float(ordered[best + width])


def _autocovariance(samples: np.ndarray) -> np.ndarray:
    """Biased autocovariance at every lag, through a zero-padded FFT."""
    n = samples.size
    centered = samples - samples.mean()
    size = fft.next_fast_len(2 * n)
    spectrum = fft.rfft(centered, n=size)
    return fft.irfft(spectrum * np.conjugate(spectrum), n=size)[:n] / n


def effective_sample_size(samples: np.ndarray) -> float:
    """Single-chain ESS with Geyer's initial positive and initial monotone
    sequence truncation of the autocorrelations."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < 4:
        return float(n)
    acov = _autocovariance(samples)
    if not acov[0] > 0.0:
        return float(n)
    mean_var = acov[0] * n / (n - 1.0)
    var_plus = mean_var * (n - 1.0) / n

    rho = np.zeros(n)
    rho_even = 1.0
    rho[0] = rho_even
    rho_odd = 1.0 - (mean_var - acov[1]) / var_plus
    rho[1] = rho_odd

    t = 1
    while t < (n - 2) and (rho_even + rho_odd) >= 0.0:
        rho_even = 1.0 - (mean_var - acov[t + 1]) / var_plus
        rho_odd = 1.0 - (mean_var - acov[t + 2]) / var_plus
        rho[t + 1] = rho_even
        if (rho_even + rho_odd) >= 0.0:
            rho[t + 2] = rho_odd
        t += 2

    max_t = t
    t = 1
    while t <= max_t - 2:
        if (rho[t + 1] + rho[t + 2]) > (rho[t - 1] + rho[t]):
            rho[t + 1] = (rho[t - 1] + rho[t]) / 2.0
            rho[t + 2] = rho[t + 1]
        t += 2

    tau_hat = -1.0 + 2.0 * np.sum(rho[:max_t]) + np.sum(rho[max_t + 1 : max_t + 2])
    # Antithetic chains can push tau_hat below 1; ESS is capped at n.
    return float(n / max(tau_hat, 1.0))


def summarize(draws: PosteriorDraws, level: float = 0.95) -> List[SummaryRow]:
    """Mean, sd, HPD interval and ESS for every parameter."""
    if len(draws) < 2:
        raise SamplerError("At least two retained draws are needed to summarize")
    rows = []
    for index, name in enumerate(draws.names):
        column = draws.draws[:, index]
        low, high = hpd_interval(column, level)
        rows.append(
            SummaryRow(
                parameter=name,
                mean=float(column.mean()),
                sd=float(column.std(ddof=1)),
                hpd_low=low,
                hpd_high=high,
                ess=effective_sample_size(column),
            )
        )
    return rows


# CSV tables


def format_value(value, digits: int = 17) -> str:
    """Cell text: integers as is, floats with `digits` significant digits,
    None as an empty cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.{digits}g}"


def write_csv_table(
    path: str, header: Sequence[str], rows: Iterable[Sequence[Any]], digits: int = 17
):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value, digits) for value in row])


def write_draws_csv(path: str, draws: PosteriorDraws):
    """iteration, one column per parameter, log_likelihood; floats keep 17
    significant digits so the file reads back exactly."""
    header = ["iteration"] + draws.names + ["log_likelihood"]
    rows = (
        [int(iteration)] + list(row) + [log_lik]
        for iteration, row, log_lik in zip(
            draws.iterations, draws.draws, draws.log_likelihood
        )
    )
    write_csv_table(path, header, rows)


def read_draws_csv(path: str) -> PosteriorDraws:
    """Read a file written by write_draws_csv. Acceptance counts and chain
    metadata are not stored, so they come back empty."""
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            rows = [row for row in reader if row]
    except OSError as err:
        raise DataError(f"Could not read {path}: {err}") from err
    if not header or header[0] != "iteration" or header[-1] != "log_likelihood":
        raise DataError(f"{path} is not a draws file")
    values = np.empty((len(rows), len(header)))
    for row_number, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} cells", row=row_number)
        for index, cell in enumerate(row):
            try:
                values[row_number - 2, index] = float(cell)
            except ValueError as err:
                raise DataError(
                    f"non-numeric value {cell!r}", row=row_number, column=header[index]
                ) from err
    return PosteriorDraws(
        header[1:-1],
        values[:, 1:-1],
        {},
        {"source": path},
        iterations=values[:, 0].astype(int),
        log_likelihood=values[:, -1],
    )


def write_summary_csv(path: str, rows: Sequence[SummaryRow]):
    write_csv_table(path, SUMMARY_HEADER, rows, digits=10)
