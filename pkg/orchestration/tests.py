import json
import tempfile
from pathlib import Path
from unittest import mock

from django.test import SimpleTestCase
from prefect.testing.utilities import prefect_test_harness

from cli.serializers import load_config
from cli.suites import SUITES
from kg_workbench.exceptions import AssertionFailure, ConfigError

from .flows import experiment_flow, load_experiment_config, run_experiment_suite, write_run_artifacts

CONFIG = """
[spacetime]
family = flat
n_x = 16
n_t = 24

[run]
samples = 4
seed = 3
"""


class TaskTest(SimpleTestCase):
    def test_tasks_run_without_a_flow(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "exp.ini"
            path.write_text(CONFIG)
            config = load_experiment_config.fn(str(path), seed=9)
            self.assertEqual(config.seed, 9)
            result = run_experiment_suite.fn("causality", config)
            self.assertTrue(result.passed)
            out = write_run_artifacts.fn(result, str(Path(tmp) / "out"), config.echo(), {"seed": 9})
            self.assertTrue((Path(out) / "pairs.csv").exists())

    def test_config_errors_propagate(self):
        with self.assertRaises(ConfigError):
            run_experiment_suite.fn("plot", load_config(""))


class ExperimentFlowTest(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.harness = prefect_test_harness()
        cls.harness.__enter__()

    @classmethod
    def tearDownClass(cls):
        cls.harness.__exit__(None, None, None)
        super().tearDownClass()

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)
        self.config = self.root / "exp.ini"
        self.config.write_text(CONFIG)

    def test_flow_writes_results(self):
        out = self.root / "causality"
        summary = experiment_flow.fn("causality", config_path=str(self.config), out_dir=str(out))
        self.assertTrue(summary["success"])
        self.assertEqual(summary["out_dir"], str(out))
        manifest = json.loads((out / "manifest.json").read_text())
        self.assertEqual(manifest["seed"], 3)
        self.assertTrue(manifest["passed"])

    def test_failed_checks_fail_the_flow(self):
        def failing(config, result):
            result.check("always too large", 1.0, 0.5)

        with mock.patch.dict(SUITES, {"green": failing}):
            with self.assertRaises(AssertionFailure):
                experiment_flow.fn("green", out_dir=str(self.root / "green"))
        self.assertTrue((self.root / "green" / "summary.txt").exists())
