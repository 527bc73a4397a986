"""
CSV serialization of grid functions: header t,x,re,im, one row per nonzero cell.
"""
import csv

import numpy as np

from kg_workbench.exceptions import ConfigError


def write_grid_csv(path, values: np.ndarray):
    values = np.asarray(values, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x", "re", "im"])
        for t, x in zip(*np.nonzero(values)):
            z = values[t, x]
            writer.writerow([int(t), int(x), repr(float(z.real)), repr(float(z.imag))])


def read_grid_csv(path, shape) -> np.ndarray:
    values = np.zeros(shape, dtype=complex)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t", "x", "re", "im"]:
            raise ConfigError(f"bad grid CSV header {header}", lineno=1)
        for lineno, row in enumerate(reader, start=2):
            try:
                t, x, re, im = row
                values[int(t), int(x)] = complex(float(re), float(im))
            except (ValueError, IndexError) as e:
                raise ConfigError(f"bad grid CSV row {row}: {e}", lineno=lineno)
    return values
