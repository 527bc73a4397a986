import json
import tempfile
import time
from contextlib import redirect_stderr
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from kg_workbench.exceptions import ConfigError

from .management.commands.run import Command as RunCommand
from .serializers import load_config, read_config, to_text
from .suites import SUITES, run_suite

SMALL_CAUSALITY = """
[spacetime]
family = flat
n_x = 16
n_t = 24

[run]
samples = 6
seed = 5
"""


class ConfigTest(SimpleTestCase):
    def test_defaults(self):
        config = load_config("")
        self.assertEqual(config["run"]["refine"], 3)
        self.assertEqual(config["run"]["tol_scale"], 1.0)
        self.assertEqual(config["field"]["m_sq"], 1.0)
        self.assertEqual(config.seed, 42)
        self.assertEqual(config.echo(), "")
        self.assertEqual(read_config(None).sections, config.sections)

    def test_values_are_typed(self):
        config = load_config("[spacetime]\nfamily = bump\namplitude = 0.2  # lapse\n\n[run]\nseed = 7\n")
        self.assertEqual(config["spacetime"]["amplitude"], 0.2)
        self.assertEqual(config.seed, 7)
        M = config.spacetime(n_x=8, n_t=16)
        self.assertFalse(M.is_ultrastatic)

    def test_unknown_key_reports_its_line(self):
        with self.assertRaisesMessage(ConfigError, "line 3: [run] bogus: unknown key"):
            load_config("[run]\nseed = 3\nbogus = 1\n")

    def test_unknown_section_reports_its_line(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config("[run]\nseed = 3\n\n[plots]\ncolor = red\n")
        self.assertEqual(ctx.exception.lineno, 4)
        self.assertIn("unknown section [plots]", str(ctx.exception))

    def test_invalid_value_reports_its_line(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config("[field]\nm_sq = 1.0\n\n[run]\nrefine = 9\n")
        self.assertEqual(ctx.exception.lineno, 5)
        self.assertIn("[run] refine", str(ctx.exception))

    def test_syntax_errors(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config("seed = 3\n")
        self.assertEqual(ctx.exception.lineno, 1)
        with self.assertRaises(ConfigError) as ctx:
            load_config("[run]\nseed 3\n")
        self.assertEqual(ctx.exception.lineno, 2)

    def test_family_specific_keys(self):
        with self.assertRaisesMessage(ConfigError, "only used by the cosmological family"):
            load_config("[spacetime]\nfamily = flat\nstart = 3\n")

    def test_round_trip_is_stable(self):
        text = "[run]\nseed=3\nrefine = 2\n\n[spacetime]\nn_x = 12\nfamily = cosmological\n"
        first = load_config(text)
        second = load_config(first.echo())
        self.assertEqual(first.sections, second.sections)
        self.assertEqual(first.echo(), second.echo())
        self.assertTrue(first.echo().startswith("[spacetime]\nfamily = cosmological\nn_x = 12\n"))
        self.assertEqual(to_text({}), "")

    def test_overrides_win_over_the_file(self):
        config = load_config("[run]\nseed = 3\nrefine = 4\n").with_overrides(seed=9, refine=None)
        self.assertEqual(config.seed, 9)
        self.assertEqual(config["run"]["refine"], 4)

    def test_ultrastatic_family(self):
        M = load_config("[spacetime]\nfamily = ultrastatic\namplitude = 0.3\n").spacetime(n_x=12, n_t=16)
        self.assertTrue(M.is_ultrastatic)
        self.assertAlmostEqual(M.a[0, 0], 1.3)

    def test_bad_family_parameters_become_config_errors(self):
        config = load_config("[spacetime]\nfamily = cosmological\nstart = 10\nstop = 5\n")
        with self.assertRaises(ConfigError):
            config.spacetime(n_x=8, n_t=16)


class SuiteTest(SimpleTestCase):
    def test_every_subcommand_has_a_suite(self):
        self.assertEqual(
            sorted(SUITES),
            sorted(["green", "ccr", "causality", "timeslice", "rce", "stress-energy", "conserve",
                    "dynloc", "vacuum", "qei", "deform", "no-natural-state"]),
        )
        with self.assertRaises(ConfigError):
            run_suite("plot", load_config(""))

    def test_causality_on_a_small_flat_grid(self):
        result = run_suite("causality", load_config(SMALL_CAUSALITY))
        self.assertTrue(result.passed)
        header, rows = result.tables["pairs"]
        self.assertEqual(len(rows), 6)
        self.assertEqual([row[6] for row in rows], [0, 1, 0, 1, 0, 1])

    def test_no_natural_state(self):
        config = load_config("[perturbation]\namp_beta = 0.2\n")
        result = run_suite("no-natural-state", config)
        self.assertTrue(result.passed, [c.line() for c in result.failures])
        header, rows = result.tables["transport"]
        self.assertEqual([row[0] for row in rows], ["trivial", "bump", "bump, wider band"])
        self.assertEqual(rows[1][1:3], [19, 29])

    def test_no_natural_state_needs_an_ultrastatic_start(self):
        with self.assertRaisesMessage(ConfigError, "not ultrastatic"):
            run_suite("no-natural-state", load_config("[spacetime]\nfamily = bump\n"))

    def test_qei(self):
        result = run_suite("qei", load_config(""))
        self.assertTrue(result.passed, [c.line() for c in result.failures])
        header, rows = result.tables["qei"]
        self.assertEqual(header, ["state", "averaged_energy", "bound"])
        self.assertEqual(len(rows), 200 + 12)

    def test_vacuum_finishes_and_passes(self):
        start = time.monotonic()
        result = run_suite("vacuum", load_config("[run]\nsamples = 20\nseed = 3\n"))
        self.assertLess(time.monotonic() - start, 60.0)
        self.assertTrue(result.passed, [c.line() for c in result.failures])
        header, rows = result.tables["correlations"]
        self.assertEqual([row[0] for row in rows], [1, 2, 3, 4, 5, 6])
        self.assertTrue(all(row[-1] <= 1e-11 for row in rows))

    def test_vacuum_modes_use_a_refined_time_step(self):
        result = run_suite("vacuum", load_config("[run]\nsamples = 1\n"))
        header, rows = result.tables["modes"]
        self.assertEqual([row[0] for row in rows], [1, 2, 3, 4, 5])
        self.assertTrue(all(abs(row[1] - 0.025) < 1e-15 for row in rows))
        self.assertTrue(all(abs(row[-1] - 1.0) <= 0.02 for row in rows))
        configured = run_suite("vacuum", load_config("[spacetime]\ndt = 0.05\n\n[run]\nsamples = 1\n"))
        self.assertAlmostEqual(configured.tables["modes"][1][0][1], 0.05)

    def test_dynloc_massless_surplus(self):
        result = run_suite("dynloc", load_config("[run]\nsamples = 6\nseed = 11\n"))
        checks = {c.name: c for c in result.checks}
        self.assertTrue(checks["m_sq=0 xi=0: fixed dimension surplus"].passed)
        self.assertTrue(checks["m_sq=0 xi=0: zero mode fixed"].passed)
        header, rows = result.tables["dynloc"]
        self.assertEqual(rows[1][-1], "mismatch (+zero mode)")
        self.assertEqual(header[1:3], ["dim_fixed", "dim_dual_kinematic"])

    def test_rce_zero_perturbation_is_identity(self):
        result = run_suite("rce", load_config(""))
        checks = {c.name: c for c in result.checks}
        self.assertTrue(checks["rce[0] distance to identity"].passed)
        self.assertEqual(len(result.tables["rce"][1]), 6)


class RunCommandTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)
        self.config = self.root / "causality.ini"
        self.config.write_text(SMALL_CAUSALITY)

    def run_command(self, *args, **options):
        out = StringIO()
        call_command("run", *args, stdout=out, **options)
        return out.getvalue()

    def test_writes_results_directory(self):
        output = self.run_command("causality", config_path=str(self.config), out=str(self.root / "a"))
        self.assertIn("causality: PASS", output)
        files = sorted(p.name for p in (self.root / "a").iterdir())
        self.assertEqual(files, ["manifest.json", "pairs.csv", "summary.txt"])
        manifest = json.loads((self.root / "a" / "manifest.json").read_text())
        self.assertEqual(manifest["seed"], 5)
        self.assertIn("n_x = 16", manifest["config"])
        self.assertIn("numpy", manifest["versions"])

    def test_identical_runs_are_byte_identical(self):
        for name in ("a", "b"):
            self.run_command("causality", config_path=str(self.config), out=str(self.root / name))
        for path in sorted((self.root / "a").iterdir()):
            self.assertEqual(path.read_bytes(), (self.root / "b" / path.name).read_bytes(), path.name)

    def test_seed_flag_is_echoed(self):
        self.run_command("causality", config_path=str(self.config), out=str(self.root / "a"), seed=8)
        manifest = json.loads((self.root / "a" / "manifest.json").read_text())
        self.assertEqual(manifest["seed"], 8)
        self.assertEqual(manifest["options"], {"seed": 8})

    def test_default_output_directory(self):
        with override_settings(OUTPUT_DIR=self.root / "results"):
            self.run_command("causality", config_path=str(self.config))
        self.assertTrue((self.root / "results" / "causality" / "summary.txt").exists())

    def test_config_error_exits_with_one(self):
        bad = self.root / "bad.ini"
        bad.write_text("[run]\nseed = 1\nwidth = 3\n")
        with self.assertRaises(CommandError) as ctx:
            self.run_command("causality", config_path=str(bad), out=str(self.root / "a"))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("line 3", str(ctx.exception))
        with self.assertRaises(CommandError) as ctx:
            self.run_command("causality", config_path=str(self.root / "missing.ini"))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_unknown_subcommand_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("bogus")
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("invalid choice", str(ctx.exception))
        self.assertIn("bogus", str(ctx.exception))

    def test_bad_arguments_exit_with_one_from_the_command_line(self):
        for argv in (["manage.py", "run", "bogus"], ["manage.py", "run", "green", "--seed", "abc"]):
            err = StringIO()
            with redirect_stderr(err), self.assertRaises(SystemExit) as ctx:
                RunCommand().run_from_argv(argv)
            self.assertEqual(ctx.exception.code, 1, argv)
            self.assertIn("error:", err.getvalue())

    def test_failed_check_exits_with_two(self):
        def failing(config, result):
            result.check("always too large", 1.0, 0.5)

        with mock.patch.dict(SUITES, {"green": failing}):
            with self.assertRaises(CommandError) as ctx:
                self.run_command("green", out=str(self.root / "g"))
        self.assertEqual(ctx.exception.returncode, 2)
        summary = (self.root / "g" / "summary.txt").read_text()
        self.assertTrue(summary.startswith("green: FAIL (1 checks)"))
