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

import importlib
import math
from types import ModuleType
from typing import Type, Union

import numpy as np
from scipy import special

from sepqrlib import Processor
from sepqrlib.linearmodel import LinearModelSpec, SamplerSettings


def get_processor_module(
    processor: Union[str, Type[Processor]], package_name: str = "sepqrlib"
) -> ModuleType:
    """Get the module for a processor, which may be passed as a string or class object.

    Typically used for patching module scoped functions for unit testing like so:
        proc_module = get_processor_module("CSVDataLoader")
        patcher = unittest.mock.patch.object(proc_module, "load_csv")
    """
    if isinstance(processor, str):
        module_name: str = ".".join([package_name, processor])
    else:
        module_name = processor.__module__
    # The default value for `package_name` relies on the convention in
    # `sepqrlib.import_processors` that expects module name to equal processor name.
    return importlib.import_module(module_name)


def toy_linear_spec(
    T=60, tau=0.5, seed=0, iterations=100, burn_in=50, fixed_alpha=None, **kwargs
) -> LinearModelSpec:
    """A small intercept-plus-slope problem with Laplace-ish noise."""
    rng = np.random.default_rng(1234)
    x = rng.uniform(-1.0, 1.0, T)
    X = np.column_stack((np.ones(T), x))
    y = 1.0 + 2.0 * x + rng.laplace(0.0, 0.5, T)
    settings = SamplerSettings(
        iterations=iterations, burn_in=burn_in, seed=seed, fixed_alpha=fixed_alpha
    )
    return LinearModelSpec(
        X, y, tau, sampler=settings, names=["intercept", "x"], **kwargs
    )


def oracle_log_likelihood(residual, sigma, alpha, tau) -> float:
    """SEP log likelihood of the residuals, written out from the density."""
    residual = np.asarray(residual, dtype=float)
    c = np.where(residual <= 0.0, tau, 1.0 - tau)
    norm = 2.0 * alpha ** (1.0 / alpha) * special.gamma(1.0 + 1.0 / alpha)
    kernel = (np.abs(residual) / (2.0 * c * sigma)) ** alpha / alpha
    return float(np.sum(-math.log(norm) - math.log(sigma) - kernel))
