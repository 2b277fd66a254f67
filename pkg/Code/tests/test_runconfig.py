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
import unittest
from tempfile import TemporaryDirectory
from unittest.mock import patch

from sepqrlib import (
    CONFIG_FILE_NAME,
    CONFIG_KEYS,
    ConfigError,
    RunConfig,
    config_input_variables,
    parse_smooth_term,
)


class TestRunConfig(unittest.TestCase):
    """Test RunConfig class"""

    def setUp(self):
        self._workdir = TemporaryDirectory()
        self.mock_config_dir = patch("sepqrlib.appdirs.user_config_dir").start()
        self.mock_config_dir.return_value = self._workdir.name
        self.addCleanup(patch.stopall)

    def tearDown(self):
        self._workdir.cleanup()

    def write(self, name, text):
        path = os.path.join(self._workdir.name, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def test_defaults(self):
        config = RunConfig()
        self.assertEqual(config.get("tau"), [0.5])
        self.assertEqual(config.get("seed"), 0)
        self.assertIsNone(config.get("iterations"))
        self.assertEqual(config.get("adaptation"), "accumulate")
        self.assertEqual(config.explicit, set())
        self.assertEqual(set(config.as_dict()), set(CONFIG_KEYS))

    def test_get_returns_copies(self):
        config = RunConfig()
        config.get("tau").append(0.9)
        self.assertEqual(config.get("tau"), [0.5])

    def test_coercion(self):
        config = RunConfig()
        config.set("iterations", "2000")
        config.set("tau", "[0.1, 0.9]")
        config.set("intercept", "false")
        config.set("fixed_alpha", "null")
        config.set("covariates", "x1, x2")
        self.assertEqual(config.get("iterations"), 2000)
        self.assertEqual(config.get("tau"), [0.1, 0.9])
        self.assertIs(config.get("intercept"), False)
        self.assertIsNone(config.get("fixed_alpha"))
        self.assertEqual(config.get("covariates"), ["x1", "x2"])
        explicit = {"iterations", "tau", "intercept", "fixed_alpha", "covariates"}
        self.assertEqual(config.explicit, explicit)

    def test_bad_values(self):
        config = RunConfig()
        for key, value in (
            ("iterations", "1.5"),
            ("seed", "true"),
            ("psi", "abc"),
            ("intercept", "maybe"),
            ("adaptation", "sometimes"),
            ("experiment", "sim7"),
        ):
            with self.subTest(key=key):
                with self.assertRaises(ConfigError):
                    config.set(key, value)

    def test_unknown_key(self):
        config = RunConfig()
        with self.assertRaises(ConfigError):
            config.set("iteration", 10)
        with self.assertRaises(ConfigError):
            config.get("iteration")

    def test_smooth_terms(self):
        self.assertEqual(
            parse_smooth_term("smooth", "z:10:3:1"),
            {"column": "z", "knots": 10, "degree": 3, "delta": 1},
        )
        self.assertEqual(
            parse_smooth_term("smooth", "z"),
            {"column": "z", "knots": 20, "degree": 4, "delta": 2},
        )
        self.assertEqual(parse_smooth_term("smooth", {"column": "w"})["knots"], 20)
        for bad in ("", "z:1:2:3:4", "z:0", "z:ten"):
            with self.subTest(bad=bad):
                with self.assertRaises(ConfigError):
                    parse_smooth_term("smooth", bad)
        config = RunConfig()
        config.set("smooth", "[a:5, b]")
        self.assertEqual([term["column"] for term in config.get("smooth")], ["a", "b"])

    def test_read_file(self):
        path = self.write(
            "run.conf",
            "# comment\n\niterations = 500  # trailing\n"
            "response = no\ntau = 0.25, 0.75\n",
        )
        config = RunConfig()
        config.read_file(path)
        self.assertEqual(config.get("iterations"), 500)
        self.assertEqual(config.get("response"), "no")
        self.assertEqual(config.get("tau"), [0.25, 0.75])
        self.assertEqual(config.file_paths, [path])

    def test_read_file_errors_name_line(self):
        path = self.write("bad.conf", "seed = 1\nnot a setting\n")
        with self.assertRaisesRegex(ConfigError, "bad.conf:2"):
            RunConfig().read_file(path)
        path = self.write("unknown.conf", "bogus = 1\n")
        with self.assertRaisesRegex(ConfigError, "Unknown config key"):
            RunConfig().read_file(path)
        with self.assertRaises(ConfigError):
            RunConfig().read_file(os.path.join(self._workdir.name, "absent.conf"))

    def test_user_file_is_loaded(self):
        self.write(CONFIG_FILE_NAME, "seed = 42\n")
        self.assertEqual(RunConfig().get("seed"), 42)
        self.assertEqual(RunConfig(load_user_file=False).get("seed"), 0)

    def test_validate(self):
        config = RunConfig()
        with self.assertRaisesRegex(ConfigError, "No command"):
            config.validate()
        config.set("command", "fit-linear")
        with self.assertRaisesRegex(ConfigError, "requires input_csv"):
            config.validate()
        config.update({"input_csv": "data.csv", "response": "y"})
        config.validate()
        for key, value in (
            ("tau", [0.5, 1.0]),
            ("burn_in", 100),
            ("fixed_alpha", 2.5),
            ("hpd_level", 1.0),
            ("jobs", 0),
        ):
            with self.subTest(key=key):
                candidate = RunConfig(load_user_file=False)
                candidate.update(
                    {"command": "fit-linear", "input_csv": "d.csv", "response": "y"}
                )
                candidate.update({"iterations": 100, key: value})
                with self.assertRaises(ConfigError):
                    candidate.validate()

    def test_validate_commands(self):
        for command, message in (
            ("fit-gam", "smooth term"),
            ("simulate", "experiment"),
            ("summarize", "draws_csv"),
        ):
            with self.subTest(command=command):
                config = RunConfig(load_user_file=False)
                config.update(
                    {"command": command, "input_csv": "d.csv", "response": "y"}
                )
                with self.assertRaisesRegex(ConfigError, message):
                    config.validate()

    def test_processor_defaults_are_copies(self):
        variables = config_input_variables("tau", "seed")
        self.assertFalse(variables["tau"]["required"])
        variables["tau"]["default"].append(0.9)
        self.assertEqual(CONFIG_KEYS["tau"]["default"], [0.5])


if __name__ == "__main__":
    unittest.main()
