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

"""Core/shared sepqrlib functions"""
import os
import plistlib
import pprint
import sys
import traceback
from copy import deepcopy
from typing import Any, Callable, Dict, List, Optional

import appdirs
import yaml

# Type for the analysis environment passed from processor to processor.
VarDict = Dict[str, Any]

APP_NAME = "sepqr"
CONFIG_FILE_NAME = "sepqr.conf"

COMMANDS = ("fit-linear", "fit-gam", "simulate", "summarize")
EXPERIMENTS = ("mixture", "sim1", "sim2", "sim3", "wave", "doppler")

# Process exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SAMPLER = 3


def log(msg, error=False):
    """Message logger, prints to stdout/stderr."""
    if error:
        print(msg, file=sys.stderr)
    else:
        print(msg)


def log_err(msg):
    """Message logger for errors."""
    log(msg, error=True)


# Library-level errors. They are defined before the processors are imported
# so the numerical subpackages can import them from here.


class DomainError(ValueError):
    """A distribution was evaluated outside of its parameter domain"""

    pass


class SpecError(ValueError):
    """A model or simulation specification is inconsistent"""

    pass


class SamplerError(RuntimeError):
    """A Markov chain could not be started or continued"""

    pass


class DataError(ValueError):
    """Input data could not be read. Carries row/column context when known."""

    def __init__(self, msg, row=None, column=None):
        self.row = row
        self.column = column
        context = []
        if row is not None:
            context.append(f"row {row}")
        if column is not None:
            context.append(f"column '{column}'")
        if context:
            msg = f"{msg} ({', '.join(context)})"
        super().__init__(msg)


class ConfigError(Exception):
    """Configuration exception"""

    pass


# Configuration


def _parse_scalar(raw):
    """Type a single raw config token with YAML scalar rules."""
    if not isinstance(raw, str):
        return raw
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError:
        return raw.strip()


def _split_list(raw):
    """Split a raw `[a, b]` or `a, b` token into raw items."""
    if isinstance(raw, (list, tuple)):
        return list(raw)
    text = str(raw).strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    return [item.strip() for item in text.split(",") if item.strip()]


def _to_float(key, value):
    value = _parse_scalar(value)
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{key} must be a number, got {value!r}") from err


def _to_int(key, value):
    value = _parse_scalar(value)
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _to_bool(key, value):
    value = _parse_scalar(value)
    if not isinstance(value, bool):
        raise ConfigError(f"{key} must be true or false, got {value!r}")
    return value


def _to_str(key, value):
    if _parse_scalar(value) is None:
        return None
    # raw text, so a column named "no" stays a string
    return value.strip() if isinstance(value, str) else str(value)


def _to_optional_float(key, value):
    if _parse_scalar(value) is None:
        return None
    return _to_float(key, value)


def _to_optional_int(key, value):
    if _parse_scalar(value) is None:
        return None
    return _to_int(key, value)


def _to_float_list(key, value):
    return [_to_float(key, item) for item in _split_list(value)]


def _to_str_list(key, value):
    return [_to_str(key, item) for item in _split_list(value)]


def parse_smooth_term(key, value):
    """Parse a `column:knots:degree:delta` smooth term.

    `knots` is the interior knot count and `degree` the spline order, so
    `x:20:4:2` is a cubic P-spline on column x with a second-order penalty.
    Trailing fields may be left off; they default to 20 knots, order 4 and
    delta 2."""
    if isinstance(value, dict):
        fields = [
            value.get("column"),
            value.get("knots", 20),
            value.get("degree", 4),
            value.get("delta", 2),
        ]
    else:
        fields = str(value).split(":")
        defaults = ["", "20", "4", "2"]
        if not fields[0] or len(fields) > 4:
            raise ConfigError(f"{key}: malformed smooth term {value!r}")
        fields = fields + defaults[len(fields) :]
    column = str(fields[0])
    knots, degree, delta = (_to_int(key, item) for item in fields[1:])
    if knots < 1 or degree < 1 or delta < 1:
        raise ConfigError(f"{key}: smooth term {value!r} needs positive integers")
    return {"column": column, "knots": knots, "degree": degree, "delta": delta}


def _to_smooth_list(key, value):
    if isinstance(value, dict):
        value = [value]
    return [parse_smooth_term(key, item) for item in _split_list(value)]


def _choice(*choices, optional=False):
    def coerce(key, value):
        value = _to_str(key, value)
        if value is None and optional:
            return None
        if value not in choices:
            raise ConfigError(
                f"{key} must be one of {', '.join(choices)}; got {value!r}"
            )
        return value

    return coerce


CONFIG_KEYS: Dict[str, Dict[str, Any]] = {
    "command": {
        "default": None,
        "coerce": _choice(*COMMANDS, optional=True),
        "description": "Analysis to run: " + ", ".join(COMMANDS) + ".",
    },
    "input_csv": {
        "default": None,
        "coerce": _to_str,
        "description": "Path to the UTF-8 CSV data file.",
    },
    "draws_csv": {
        "default": None,
        "coerce": _to_str,
        "description": "Path to a draws file written earlier (summarize).",
    },
    "response": {
        "default": None,
        "coerce": _to_str,
        "description": "Name of the response column.",
    },
    "covariates": {
        "default": [],
        "coerce": _to_str_list,
        "description": "Names of the linear covariate columns.",
    },
    "smooth": {
        "default": [],
        "coerce": _to_smooth_list,
        "description": "Smooth terms as column:knots:degree:delta.",
    },
    "intercept": {
        "default": True,
        "coerce": _to_bool,
        "description": "Prepend a column of ones to the design matrix.",
    },
    "tau": {
        "default": [0.5],
        "coerce": _to_float_list,
        "description": "Quantile levels, each in (0, 1).",
    },
    "iterations": {
        "default": None,
        "coerce": _to_optional_int,
        "description": "Total MCMC iterations N (command default when unset).",
    },
    "burn_in": {
        "default": None,
        "coerce": _to_optional_int,
        "description": "Discarded iterations M (command default when unset).",
    },
    "seed": {"default": 0, "coerce": _to_int, "description": "Random seed."},
    "psi": {"default": 0.1, "coerce": _to_float, "description": "Lasso shape."},
    "varpi": {"default": 0.1, "coerce": _to_float, "description": "Lasso rate."},
    "a": {"default": 0.001, "coerce": _to_float, "description": "sigma IG shape."},
    "b": {"default": 0.001, "coerce": _to_float, "description": "sigma IG scale."},
    "c": {"default": 2.0, "coerce": _to_float, "description": "alpha Beta c."},
    "d": {"default": 2.0, "coerce": _to_float, "description": "alpha Beta d."},
    "a_h": {"default": 0.001, "coerce": _to_float, "description": "h^2 IG a."},
    "b_h": {"default": 0.001, "coerce": _to_float, "description": "h^2 IG b."},
    "fixed_alpha": {
        "default": None,
        "coerce": _to_optional_float,
        "description": "Hold alpha at this value; 1 gives the ALD model.",
    },
    "adapt_C": {
        "default": 10.0,
        "coerce": _to_float,
        "description": "Constant C of the adaptation step 1/(C sqrt(i)).",
    },
    "adaptation": {
        "default": "accumulate",
        "coerce": _choice("accumulate", "average"),
        "description": "Covariance recursion: accumulate or average.",
    },
    "beta_prior": {
        "default": "lasso",
        "coerce": _choice("lasso", "gaussian"),
        "description": "Prior on the regression coefficients.",
    },
    "beta_prior_variance": {
        "default": 100.0,
        "coerce": _to_float,
        "description": "Variance of the gaussian coefficient prior.",
    },
    "output_dir": {
        "default": ".",
        "coerce": _to_str,
        "description": "Directory receiving the result tables.",
    },
    "experiment": {
        "default": None,
        "coerce": _choice(*EXPERIMENTS, optional=True),
        "description": "Simulation experiment: " + ", ".join(EXPERIMENTS) + ".",
    },
    "error_kind": {
        "default": None,
        "coerce": _choice("gaussian", "student_t", optional=True),
        "description": "Error law of the simulated data.",
    },
    "noise": {
        "default": "gaussian",
        "coerce": _choice("gaussian", "student_t", "linear_het", "quad_het"),
        "description": "Noise structure of the curve experiments.",
    },
    "replicates": {
        "default": 10,
        "coerce": _to_int,
        "description": "Replicated datasets per experiment.",
    },
    "jobs": {
        "default": 1,
        "coerce": _to_int,
        "description": "Worker processes for independent chains.",
    },
    "T": {
        "default": None,
        "coerce": _to_optional_int,
        "description": "Simulated sample size (experiment default when unset).",
    },
    "knots": {
        "default": None,
        "coerce": _to_optional_int,
        "description": "Interior knots of the curve experiments.",
    },
    "hpd_level": {
        "default": 0.95,
        "coerce": _to_float,
        "description": "Mass of the reported HPD intervals.",
    },
    "report_every": {
        "default": 0,
        "coerce": _to_int,
        "description": "Progress message every this many iterations.",
    },
    "verbose": {"default": 0, "coerce": _to_int, "description": "Verbosity."},
}


class RunConfig:
    """An abstraction to hold all run settings.

    Values are layered: the defaults table, then an optional user file in
    the platform config directory, then any file given with --config, then
    explicit flags."""

    def __init__(self, load_user_file: bool = True):
        self.values: VarDict = {
            key: deepcopy(spec["default"]) for key, spec in CONFIG_KEYS.items()
        }
        # Keys that were set by a file or a flag, as opposed to defaults.
        self.explicit: set = set()
        self.file_paths: List[str] = []
        if load_user_file:
            config_dir = appdirs.user_config_dir(APP_NAME, appauthor=False)
            user_file = os.path.join(config_dir, CONFIG_FILE_NAME)
            if os.path.isfile(user_file):
                self.read_file(user_file)

    def read_file(self, file_path: str):
        """Read `key = value` lines from file_path into the config."""
        try:
            with open(file_path, encoding="utf-8") as f:
                lines = f.readlines()
        except OSError as err:
            raise ConfigError(f"Could not read config {file_path}: {err}") from err
        for lineno, line in enumerate(lines, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition("=")
            if sep != "=":
                raise ConfigError(f"{file_path}:{lineno}: expected 'key = value'")
            try:
                self.set(key.strip(), value.strip())
            except ConfigError as err:
                raise ConfigError(f"{file_path}:{lineno}: {err}") from err
        self.file_paths.append(file_path)

    def set(self, key: str, value: Any):
        """Set a config value, typing it against the key table."""
        if key not in CONFIG_KEYS:
            raise ConfigError(f"Unknown config key '{key}'")
        self.values[key] = CONFIG_KEYS[key]["coerce"](key, value)
        self.explicit.add(key)

    def update(self, mapping: VarDict):
        """Set every key/value pair of mapping."""
        for key, value in mapping.items():
            self.set(key, value)

    def get(self, key: str) -> Any:
        """Retrieve a config value."""
        if key not in CONFIG_KEYS:
            raise ConfigError(f"Unknown config key '{key}'")
        return deepcopy(self.values[key])

    def as_dict(self) -> VarDict:
        """Retrieve a copy of all config values."""
        return deepcopy(self.values)

    def validate(self):
        """Check the cross-key invariants of a complete run config."""
        command = self.values["command"]
        if command is None:
            raise ConfigError("No command given")
        for tau in self.values["tau"]:
            if not 0.0 < tau < 1.0:
                raise ConfigError(f"tau values must lie in (0, 1); got {tau}")
        if not self.values["tau"]:
            raise ConfigError("tau list is empty")
        iterations, burn_in = self.values["iterations"], self.values["burn_in"]
        if iterations is not None and iterations < 1:
            raise ConfigError("iterations must be positive")
        if burn_in is not None and burn_in < 0:
            raise ConfigError("burn_in must be nonnegative")
        if iterations is not None and burn_in is not None and burn_in >= iterations:
            raise ConfigError("burn_in must be smaller than iterations")
        fixed_alpha = self.values["fixed_alpha"]
        if fixed_alpha is not None and not 0.0 < fixed_alpha <= 2.0:
            raise ConfigError("fixed_alpha must lie in (0, 2]")
        if not 0.0 < self.values["hpd_level"] < 1.0:
            raise ConfigError("hpd_level must lie in (0, 1)")
        if self.values["jobs"] < 1:
            raise ConfigError("jobs must be at least 1")
        if command in ("fit-linear", "fit-gam"):
            for key in ("input_csv", "response"):
                if not self.values[key]:
                    raise ConfigError(f"{command} requires {key}")
        if command == "fit-gam" and not self.values["smooth"]:
            raise ConfigError("fit-gam requires at least one smooth term")
        if command == "simulate" and not self.values["experiment"]:
            raise ConfigError("simulate requires experiment")
        if command == "summarize" and not self.values["draws_csv"]:
            raise ConfigError("summarize requires draws_csv")


def config_input_variables(*keys: str) -> VarDict:
    """Processor input_variables entries for config keys."""
    return {
        key: {
            "required": False,
            "default": deepcopy(CONFIG_KEYS[key]["default"]),
            "description": CONFIG_KEYS[key]["description"],
        }
        for key in keys
    }


def get_sepqr_version():
    """Gets the version number of sepqr"""
    version_file = os.path.join(os.path.dirname(__file__), "version.plist")
    try:
        with open(version_file, "rb") as f:
            version_plist = plistlib.load(f)
    except Exception as ex:
        log_err(f"Unable to get sepqr version: {ex}")
        return "UNKNOWN"
    try:
        return version_plist["Version"]
    except (AttributeError, TypeError, KeyError):
        return "UNKNOWN"


def progress_printer(label: str, report_every: int) -> Optional[Callable]:
    """Return a progress callback printing every report_every iterations,
    or None when progress reporting is off."""
    if report_every <= 0:
        return None

    def report(iteration: int, total: int, rates: Dict[str, float]):
        if iteration % report_every == 0:
            accept = " ".join(f"{k}={v:.3f}" for k, v in sorted(rates.items()))
            log(f"{label}: iteration {iteration}/{total} acceptance {accept}")

    return report


# Processor and ProcessorError base class definitions


class ProcessorError(Exception):
    """Base Error class"""

    pass


class Processor:
    """Processor base class.

    Processors accept an analysis environment, process its contents, and
    return an updated environment that can be processed further.
    """

    def __init__(self, env=None):
        self.env = env if env is not None else {}

    def output(self, msg, verbose_level=1):
        """Print a message if verbosity is >= verbose_level"""
        if int(self.env.get("verbose", 0)) >= verbose_level:
            print(f"{self.__class__.__name__}: {msg}")

    def main(self):
        """Stub method"""
        raise ProcessorError("Abstract method main() not implemented.")

    def get_manifest(self):
        """Return Processor's description, input and output variables"""
        try:
            return (self.description, self.input_variables, self.output_variables)
        except AttributeError as err:
            raise ProcessorError(f"Missing manifest: {err}") from err

    def inject(self, arguments):
        """Update environment data with arguments."""
        for key, value in list(arguments.items()):
            self.env[key] = deepcopy(value)

    def record_output_file(self, path):
        """Remember a written file so a failed analysis can remove it."""
        self.env.setdefault("written_files", []).append(path)

    def process(self):
        """Main processing loop."""
        for variable, flags in list(self.input_variables.items()):
            # Apply default values to unspecified input variables
            if "default" in flags and self.env.get(variable) is None:
                self.env[variable] = deepcopy(flags["default"])
                self.output(
                    f"No value supplied for {variable}, setting default value "
                    f"of: {self.env[variable]}",
                    verbose_level=2,
                )
            # Make sure all required arguments have been supplied.
            if flags.get("required") and self.env.get(variable) is None:
                raise ProcessorError(f"{self.__class__.__name__} requires {variable}")

        self.main()
        return self.env


# Analysis class definition


class AnalysisError(Exception):
    """Error class. The failing step's exception is kept as __cause__."""

    pass


class Analysis:
    """Instantiate and execute processors from a recipe.

    A recipe is a dict with an "Input" dict merged into the environment and
    a "Process" list of {"Processor": name, "Arguments": {...}} steps."""

    def __init__(self, env, verbose=0):
        self.verbose = verbose
        self.env = env
        self.results = []
        self.env["SEPQR_VERSION"] = get_sepqr_version()
        self.env.setdefault("written_files", [])

    def output(self, msg, verbose_level=1):
        """Print msg if verbosity is >= than verbose_level"""
        if self.verbose >= verbose_level:
            print(msg)

    def verify(self, recipe):
        """Verify a recipe and check for errors."""
        variables = {key for key, value in self.env.items() if value is not None}
        variables.update(
            key for key, value in recipe.get("Input", {}).items() if value is not None
        )
        for step in recipe["Process"]:
            try:
                processor_class = get_processor(step["Processor"])
            except (KeyError, AttributeError) as err:
                raise AnalysisError(
                    f"Unknown processor '{step['Processor']}'."
                ) from err
            variables.update(set(step.get("Arguments", {}).keys()))
            for key, flags in list(processor_class.input_variables.items()):
                if flags.get("required") and key not in variables:
                    raise AnalysisError(
                        f"{step['Processor']} requires missing argument {key}"
                    )
            variables.update(set(processor_class.output_variables.keys()))

    def process(self, recipe):
        """Process a recipe."""
        self.env.update(
            {k: v for k, v in recipe.get("Input", {}).items() if k not in self.env}
        )
        if self.verbose > 2:
            pprint.pprint(self.env)

        for step in recipe["Process"]:
            self.output(step["Processor"])
            processor_class = get_processor(step["Processor"])
            processor = processor_class(self.env)
            processor.inject(step.get("Arguments", {}))

            try:
                self.env = processor.process()
            except Exception as err:
                if self.verbose > 2:
                    traceback.print_exc(file=sys.stdout)
                raise AnalysisError(
                    f"Processor: {step['Processor']}: Error: {err}"
                ) from err

            output_dict = {
                key: self.env[key]
                for key in processor.output_variables
                if key in self.env and isinstance(self.env[key], (str, int, float))
            }
            self.output({"Output": output_dict}, verbose_level=2)
            self.results.append(
                {"Processor": step["Processor"], "Output": output_dict}
            )

    def remove_written_files(self):
        """Delete every file written by this analysis."""
        for path in self.env.get("written_files", []):
            try:
                os.remove(path)
            except OSError:
                pass
        self.env["written_files"] = []


_PROCESSOR_NAMES: List[str] = []


def import_processors():
    processor_files: List[str] = [
        os.path.splitext(name)[0]
        for name in sorted(os.listdir(os.path.dirname(__file__)))
        if name.endswith(".py") and name[0].isupper()
    ]

    # Warning! Fancy dynamic importing ahead!
    #
    # import the filename as a submodule
    # then add the attribute with the same name to the globals()
    #
    # This is the equivalent of:
    #
    #    from Bar.Foo import Foo
    #
    for name in processor_files:
        globals()[name] = getattr(
            __import__(__name__ + "." + name, fromlist=[name]), name
        )
        if name not in _PROCESSOR_NAMES:
            _PROCESSOR_NAMES.append(name)


def get_processor(processor_name):
    """Returns a Processor class given a name"""
    if processor_name not in _PROCESSOR_NAMES:
        raise KeyError(processor_name)
    return globals()[processor_name]


def processor_names():
    """Return our Processor names"""
    return _PROCESSOR_NAMES


# when importing sepqrlib, need to also import all the processors
# in this same directory


import_processors()
