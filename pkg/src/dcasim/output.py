"""CSV artifact writers.

Metadata travels in `#`-prefixed header lines; the body below them is free of
timestamps and fully determined by the run configuration, so identical
configs produce byte-identical files.
"""

from __future__ import annotations

import os

from .analysis import ConvergenceTable, estimate_order
from .state import DiscreteState, MomentSeries, reconstruct


def _metadata_lines(md: dict) -> list[str]:
    return [f"# {key} = {md[key]}" for key in md]


def write_snapshot_csv(path: str, state: DiscreteState, metadata: dict):
    """One row per cell: center, concentration, reconstructed density."""
    sf = reconstruct(state)
    centers = state.grid.centers()
    with open(path, "w") as fh:
        for line in _metadata_lines({"t": state.t, **metadata}):
            fh.write(line + "\n")
        fh.write("x_center,c_i,f_eps\n")
        for x, c, v in zip(centers, state.c, sf.values):
            fh.write(f"{float(x)!r},{float(c)!r},{float(v)!r}\n")


def write_moments_csv(path: str, series: MomentSeries, metadata: dict):
    with open(path, "w") as fh:
        for line in _metadata_lines(metadata):
            fh.write(line + "\n")
        fh.write("t,M0,M1,M2,Y1,N_count,mass_defect_integral\n")
        rows = zip(series.times, series.M0, series.M1, series.M2,
                   series.Y1, series.N_count, series.defect_integral)
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_error_table_csv(path: str, table: ConvergenceTable, metadata: dict,
                          failures: dict | None = None):
    """Error ladder at one time, with the cumulative order estimate per row."""
    with open(path, "w") as fh:
        for line in _metadata_lines({"t": table.t, **metadata}):
            fh.write(line + "\n")
        if failures:
            for eps, msg in failures.items():
                fh.write(f"# failed epsilon={eps}: {msg}\n")
        fh.write("epsilon,t,E1,order_estimate_cumulative\n")
        for k, (eps, err) in enumerate(table.rows):
            if k >= 1:
                partial = ConvergenceTable(t=table.t, rows=table.rows[: k + 1])
                order = repr(estimate_order(partial))
            else:
                order = ""
            fh.write(f"{eps!r},{table.t!r},{err!r},{order}\n")


def body_of(path: str) -> str:
    """CSV content with the `#` metadata header stripped."""
    with open(path) as fh:
        return "".join(line for line in fh if not line.startswith("#"))


def snapshot_filename(t: float) -> str:
    return f"snapshot_t{t:g}.csv"


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
