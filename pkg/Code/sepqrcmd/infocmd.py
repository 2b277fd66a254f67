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

from typing import List

from sepqrcmd.opts import common_parse, gen_common_parser
from sepqrlib import (
    ConfigError,
    get_processor,
    get_sepqr_version,
    log,
    log_err,
    processor_names,
)


def list_processors(argv: List[str]):
    """List available processors"""
    verb = argv[1]
    parser = gen_common_parser()
    parser.set_usage(f"Usage: %prog {verb} [options]\nList the core processors.")
    try:
        common_parse(parser, argv)
    except ConfigError as err:
        log_err(str(err))
        return 1
    log("\n".join(sorted(processor_names())))
    return 0


def processor_info(argv: List[str]):
    """Display input and output variables of a processor"""
    verb = argv[1]
    parser = gen_common_parser()
    parser.set_usage(
        f"Usage: %prog {verb} [options] processorname\n"
        "Display input and output variables of a processor."
    )
    try:
        (_options, arguments, _config) = common_parse(parser, argv)
    except ConfigError as err:
        log_err(str(err))
        return 1
    if len(arguments) != 1:
        log_err("Need exactly one processor name")
        return 1
    try:
        processor_class = get_processor(arguments[0])
    except KeyError:
        log_err(f"Unknown processor '{arguments[0]}'")
        return 1

    description, input_vars, output_vars = processor_class().get_manifest()
    log(f"Description: {' '.join(description.split())}")
    log("Input variables:")
    for key, flags in input_vars.items():
        required = "required" if flags.get("required") else "optional"
        default = f", default: {flags['default']}" if "default" in flags else ""
        log(f"    {key} ({required}{default}): {flags.get('description', '')}")
    log("Output variables:")
    for key, flags in output_vars.items():
        log(f"    {key}: {flags.get('description', '')}")
    return 0


def print_version(argv: List[str]):
    """Print the current version of sepqr"""
    log(get_sepqr_version())
    return 0
