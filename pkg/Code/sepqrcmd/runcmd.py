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

from copy import deepcopy
from typing import Dict, List

import numpy as np

from sepqrcmd.opts import common_parse, gen_common_parser
from sepqrlib import (
    EXIT_DATA,
    EXIT_OK,
    EXIT_SAMPLER,
    EXIT_USAGE,
    Analysis,
    AnalysisError,
    ConfigError,
    DataError,
    RunConfig,
    SamplerError,
    log,
    log_err,
)

# Tau levels of an experiment when none are configured.
EXPERIMENT_TAUS = [0.1, 0.5, 0.9]

RECIPES: Dict[str, Dict] = {
    "fit-linear": {
        "Process": [
            {"Processor": "CSVDataLoader"},
            {"Processor": "LinearQuantileSampler"},
            {"Processor": "PosteriorSummarizer"},
            {"Processor": "DrawsWriter"},
        ]
    },
    "fit-gam": {
        "Process": [
            {"Processor": "CSVDataLoader"},
            {"Processor": "GamQuantileSampler"},
            {"Processor": "PosteriorSummarizer"},
            {"Processor": "DrawsWriter"},
        ]
    },
    "summarize": {"Process": [{"Processor": "PosteriorSummarizer"}]},
    "simulate": {"Process": [{"Processor": "SimulationExperiment"}]},
}


def recipes_for(values: Dict) -> List[Dict]:
    """The recipes of one command: one per tau level for fits."""
    command = values["command"]
    recipe = deepcopy(RECIPES[command])
    if command not in ("fit-linear", "fit-gam"):
        return [recipe]
    recipes = []
    for tau in values["tau"]:
        per_tau = deepcopy(recipe)
        per_tau["Input"] = {"quantile": tau}
        recipes.append(per_tau)
    return recipes


def exit_code_for(err: Exception) -> int:
    """Map an analysis failure onto an exit code through its cause."""
    cause = err.__cause__ if isinstance(err, AnalysisError) else err
    if isinstance(cause, DataError):
        return EXIT_DATA
    if isinstance(cause, (SamplerError, np.linalg.LinAlgError, FloatingPointError)):
        return EXIT_SAMPLER
    return EXIT_USAGE


def run_analysis(config: RunConfig) -> int:
    """Run the recipes of the configured command and return the exit code.

    On failure every file written by the run is removed."""
    try:
        config.validate()
    except ConfigError as err:
        log_err(f"Invalid configuration: {err}")
        return EXIT_USAGE
    values = config.as_dict()
    verbose = values["verbose"]
    written_files: List[str] = []
    for recipe in recipes_for(values):
        env = dict(deepcopy(values), written_files=written_files)
        analysis = Analysis(env, verbose)
        try:
            analysis.verify(recipe)
            analysis.process(recipe)
        except AnalysisError as err:
            log_err(str(err))
            analysis.remove_written_files()
            return exit_code_for(err)
        for result in analysis.results:
            if result["Output"]:
                log(f"{result['Processor']}: {result['Output']}")
    return EXIT_OK


def _run_verb(argv: List[str], usage: str, positional: str = None) -> int:
    verb = argv[1]
    parser = gen_common_parser()
    parser.set_usage(usage)
    try:
        (_options, arguments, config) = common_parse(parser, argv)
        config.set("command", verb)
        if arguments:
            if positional is None or len(arguments) > 1:
                raise ConfigError(f"Unexpected arguments: {' '.join(arguments)}")
            config.set(positional, arguments[0])
    except ConfigError as err:
        log_err(str(err))
        return EXIT_USAGE
    if verb == "simulate" and "tau" not in config.explicit:
        config.set("tau", EXPERIMENT_TAUS)
    return run_analysis(config)


def fit_model(argv: List[str]):
    """Fit a linear or additive quantile regression to a CSV file"""
    verb = argv[1]
    return _run_verb(
        argv,
        f"Usage: %prog {verb} [options] [input.csv]\n"
        "Sample the posterior of a quantile regression with the SEP "
        "likelihood for every\n"
        "tau level and write draws_tau<tau>.csv and summary_tau<tau>.csv.",
        positional="input_csv",
    )


def simulate(argv: List[str]):
    """Run a simulation experiment"""
    verb = argv[1]
    return _run_verb(
        argv,
        f"Usage: %prog {verb} [options] [experiment]\n"
        "Compare the ALD and SEP working likelihoods on simulated data. "
        "Experiments:\n"
        "mixture, sim1, sim2, sim3, wave, doppler.",
        positional="experiment",
    )


def summarize_draws(argv: List[str]):
    """Summarize a draws file"""
    verb = argv[1]
    return _run_verb(
        argv,
        f"Usage: %prog {verb} [options] [draws.csv]\n"
        "Write mean, sd, HPD interval and ESS of every column of a draws file.",
        positional="draws_csv",
    )
