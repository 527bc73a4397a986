"""
Results of one experiment run and the files they are written to.

A run directory holds ``manifest.json`` (config echo, package versions, seed),
one CSV per table and ``summary.txt`` with a PASS/FAIL line per check. Nothing
time- or host-dependent is written, so identical inputs give identical files.
"""
import csv
import json
import logging
import math
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from kg_workbench.exceptions import AssertionFailure

logger = logging.getLogger(__name__)

MANIFEST_PACKAGES = ("numpy", "scipy", "Django", "djangorestframework", "prefect")

RELATIONS = {
    "<=": lambda value, bound: value <= bound,
    ">=": lambda value, bound: value >= bound,
    "<": lambda value, bound: value < bound,
    ">": lambda value, bound: value > bound,
    "==": lambda value, bound: value == bound,
}


@dataclass
class Check:
    name: str
    value: float
    bound: float
    relation: str = "<="

    @property
    def passed(self) -> bool:
        if isinstance(self.value, float) and math.isnan(self.value):
            return False
        return bool(RELATIONS[self.relation](self.value, self.bound))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {format_cell(self.value)} {self.relation} {format_cell(self.bound)}"


@dataclass
class SuiteResult:
    """
    Checks and tables produced by one subcommand.

    ``tol_scale`` widens every tolerance check added with ``scaled=True``.
    """
    name: str
    seed: int = None
    tol_scale: float = 1.0
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def check(self, name: str, value, bound, relation: str = "<=", scaled: bool = True) -> Check:
        if relation not in RELATIONS:
            raise ValueError(f"unknown relation '{relation}'")
        if scaled and relation in ("<=", "<"):
            bound = bound * self.tol_scale
        entry = Check(name, _plain(value), _plain(bound), relation)
        self.checks.append(entry)
        logger.info(f"[Report] {self.name}: {entry.line()}")
        return entry

    def table(self, name: str, header, rows):
        self.tables[name] = (list(header), [list(r) for r in rows])

    def note(self, text: str):
        self.notes.append(text)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def raise_for_failures(self):
        if self.failures:
            names = ", ".join(c.name for c in self.failures)
            raise AssertionFailure(f"{self.name}: {len(self.failures)} check(s) failed: {names}")


def _plain(value):
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def format_cell(value) -> str:
    value = _plain(value)
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ============================
# WRITERS
# ============================

def write_csv(path, header, rows):
    """Header row, ',' separator, '.' decimal, LF line endings."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def package_versions(packages=MANIFEST_PACKAGES) -> dict:
    versions = {}
    for name in packages:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions


def build_manifest(result: SuiteResult, config_echo: str, options: dict = None) -> dict:
    return {
        "subcommand": result.name,
        "seed": result.seed,
        "tol_scale": result.tol_scale,
        "options": options or {},
        "config": config_echo,
        "versions": package_versions(),
        "tables": sorted(f"{name}.csv" for name in result.tables),
        "passed": result.passed,
    }


def summary_text(result: SuiteResult) -> str:
    lines = [f"{result.name}: {'PASS' if result.passed else 'FAIL'} ({len(result.checks)} checks)", ""]
    lines += [c.line() for c in result.checks]
    if result.notes:
        lines += ["", "Notes:"]
        lines += [f"  - {n}" for n in result.notes]
    return "\n".join(lines) + "\n"


def write_artifacts(result: SuiteResult, out_dir, config_echo: str, options: dict = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in sorted(result.tables.items()):
        write_csv(out / f"{name}.csv", header, rows)
    manifest = build_manifest(result, config_echo, options)
    with open(out / "manifest.json", "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    with open(out / "summary.txt", "w", newline="\n", encoding="utf-8") as fh:
        fh.write(summary_text(result))
    logger.info(f"[Report] Wrote {len(result.tables)} table(s) for '{result.name}' to {out}")
    return out
