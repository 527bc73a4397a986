import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from .artifacts import Check, SuiteResult, format_cell, summary_text, write_artifacts, write_csv


class CheckTest(SimpleTestCase):
    def test_relations(self):
        self.assertTrue(Check("a", 1e-13, 1e-12).passed)
        self.assertFalse(Check("a", 2.0, 1.8, "<=").passed)
        self.assertTrue(Check("order", 2.01, 1.8, ">=").passed)
        self.assertFalse(Check("nan", float("nan"), 1.0).passed)

    def test_tol_scale_widens_only_tolerances(self):
        result = SuiteResult("green", tol_scale=10.0)
        loose = result.check("residual", 5e-12, 1e-12)
        order = result.check("order", 1.9, 1.8, ">=")
        self.assertTrue(loose.passed)
        self.assertEqual(order.bound, 1.8)
        self.assertTrue(result.passed)
        result.check("fixed", 3, 2, scaled=False)
        self.assertEqual([c.name for c in result.failures], ["fixed"])

    def test_numpy_values_are_plain(self):
        result = SuiteResult("x")
        entry = result.check("flag", np.bool_(True), True, "==", scaled=False)
        self.assertIs(entry.value, True)
        self.assertEqual(format_cell(np.float64(0.1)), "0.1")
        self.assertEqual(format_cell(True), "1")


class WriterTest(SimpleTestCase):
    def test_csv_layout(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "t.csv"
            write_csv(path, ["dx", "error"], [[0.1, np.float64(1.25e-3)], [0.05, 3.1e-4]])
            raw = path.read_bytes()
        self.assertEqual(raw, b"dx,error\n0.1,0.00125\n0.05,0.00031\n")

    def test_artifacts_are_deterministic(self):
        def run(tmp):
            result = SuiteResult("qei", seed=7)
            result.check("bound below samples", -0.2, -0.3, ">=")
            result.table("qei", ["state", "value"], [["vacuum", 0.0], ["squeezed", -0.1]])
            result.note("bound is the infimum over quasifree states only")
            out = write_artifacts(result, tmp, "[run]\nseed = 7\n", {"refine": 3})
            return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

        with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
            first, second = run(a), run(b)
        self.assertEqual(first, second)
        self.assertEqual(sorted(first), ["manifest.json", "qei.csv", "summary.txt"])
        manifest = json.loads(first["manifest.json"])
        self.assertEqual(manifest["seed"], 7)
        self.assertTrue(manifest["passed"])
        self.assertIn("numpy", manifest["versions"])
        self.assertTrue(first["summary.txt"].startswith(b"qei: PASS"))

    def test_summary_marks_failures(self):
        result = SuiteResult("rce")
        result.check("symplecticity", 1e-3, 1e-10)
        self.assertIn("FAIL  symplecticity", summary_text(result))
        self.assertFalse(result.passed)
