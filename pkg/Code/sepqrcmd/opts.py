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

import optparse
from typing import List, Tuple

from sepqrlib import CONFIG_KEYS, ConfigError, RunConfig

# Keys without a generated --flag.
UNFLAGGED_KEYS = ("command", "verbose")


class SepqrOptionParser(optparse.OptionParser):
    """OptionParser that raises ConfigError instead of exiting, so usage
    errors map onto the tool's own exit codes."""

    def error(self, msg):
        raise ConfigError(msg)


def flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def gen_common_parser() -> optparse.OptionParser:
    """Generate a common optparse parser with default options.

    Every config key gets a --flag; flags override --config files, which
    override the user config file."""
    parser = SepqrOptionParser()
    parser.add_option(
        "--config",
        dest="config_file",
        metavar="FILE",
        help="Read 'key = value' settings from FILE.",
    )
    parser.add_option(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Verbose output. May be specified multiple times.",
    )
    group = optparse.OptionGroup(parser, "Settings")
    for key, spec in CONFIG_KEYS.items():
        if key in UNFLAGGED_KEYS:
            continue
        group.add_option(
            flag_name(key),
            dest=key,
            default=None,
            metavar=key.upper(),
            help=f"{spec['description']} (default: {spec['default']})",
        )
    parser.add_option_group(group)
    return parser


def common_parse(
    parser: optparse.OptionParser, argv: List[str]
) -> Tuple[optparse.Values, List[str], RunConfig]:
    """Parse an optparse parser with some enhancements and return a tuple."""
    options, arguments = parser.parse_args(argv[2:])
    config = RunConfig()
    if options.config_file:
        config.read_file(options.config_file)
    for key in CONFIG_KEYS:
        value = getattr(options, key, None)
        if key not in UNFLAGGED_KEYS and value is not None:
            config.set(key, value)
    if options.verbose:
        config.set("verbose", options.verbose)
    return (options, arguments, config)
