"""Append-only CSV training logs.

Numeric cells are fixed-format so reruns with the same seed produce
byte-identical files; wall-clock time goes in the mandatory last column,
which comparison tooling strips.
"""

from __future__ import annotations

import time


class TrainLogger:
    def __init__(self, path, columns):
        if len(columns) == 0 or columns[-1] != "wall_s":
            raise ValueError("last column must be 'wall_s'")
        self.path = path
        self.columns = list(columns)
        self._t0 = time.monotonic()
        with open(path, "w", encoding="utf-8") as f:
            f.write(",".join(self.columns) + "\n")

    def row(self, **values) -> None:
        got = set(values) | {"wall_s"}
        if got != set(self.columns):
            raise ValueError(f"columns mismatch: expected {self.columns}, got {sorted(got)}")
        cells = []
        for c in self.columns[:-1]:
            v = values[c]
            cells.append(str(v) if isinstance(v, int) else f"{float(v):.8e}")
        cells.append(f"{time.monotonic() - self._t0:.3f}")
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(",".join(cells) + "\n")


def strip_wall_clock(path) -> str:
    """Log contents minus the wall-clock column, for byte comparisons."""
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            out.append(",".join(line.rstrip("\n").split(",")[:-1]))
    return "\n".join(out)
