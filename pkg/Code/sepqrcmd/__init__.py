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

import os
from typing import List

from sepqrcmd.infocmd import list_processors, print_version, processor_info
from sepqrcmd.opts import common_parse, gen_common_parser
from sepqrcmd.runcmd import fit_model, run_analysis, simulate, summarize_draws
from sepqrlib import log, log_err

__all__ = [
    "fit_model",
    "simulate",
    "summarize_draws",
    "list_processors",
    "processor_info",
    "print_version",
    "run_analysis",
    "gen_common_parser",
    "common_parse",
    "main",
]

SUBCOMMANDS = {
    "fit-linear": fit_model,
    "fit-gam": fit_model,
    "simulate": simulate,
    "summarize": summarize_draws,
    "list-processors": list_processors,
    "processor-info": processor_info,
    "version": print_version,
}


def display_help(argv: List[str]):
    """Display top-level help"""
    main_command_name = os.path.basename(argv[0])
    log(
        f"Usage: {main_command_name} <verb> <options>, "
        "where <verb> is one of the following:"
    )
    log("")
    width = max(len(verb) for verb in SUBCOMMANDS)
    for verb, function in SUBCOMMANDS.items():
        log(f"    {verb.ljust(width)} ({function.__doc__})")
    log("")
    log(f"{main_command_name} <verb> --help for more help for that verb")


def main(argv: List[str]) -> int:
    if len(argv) < 2:
        display_help(argv)
        return 1
    verb = argv[1]
    if verb in ("help", "-h", "--help"):
        display_help(argv)
        return 0
    if verb not in SUBCOMMANDS:
        log_err(f"Unknown verb: {verb}")
        display_help(argv)
        return 1
    return SUBCOMMANDS[verb](argv)
