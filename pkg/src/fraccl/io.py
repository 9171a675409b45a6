"""CSV and gnuplot output.  Numbers are written with 17 significant digits so
they read back bit-for-bit."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def read_csv(path):
    """``(header, rows)`` with every cell parsed as float where possible."""
    with Path(path).open(newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = []
        for r in rd:
            rows.append([_num(c) for c in r])
    return header, rows


def _num(c):
    try:
        return float(c)
    except ValueError:
        return c


def write_trajectory(path, traj):
    """Columns ``x`` then one per snapshot; the header row carries the times."""
    header = ["x"] + [fmt(t) for t in traj.times]
    data = np.column_stack([traj.grid.x, traj.values.T])
    return write_csv(path, header, data)


def read_trajectory(path):
    """``(times, x, values)`` with ``values`` shaped ``(len(times), len(x))``."""
    header, rows = read_csv(path)
    arr = np.array(rows, dtype=float)
    return np.array([float(h) for h in header[1:]]), arr[:, 0], arr[:, 1:].T


def write_records(path, records):
    from .verification import DiagnosticsRecord

    return write_csv(path, DiagnosticsRecord.COLUMNS, [r.row() for r in records])


def write_plot_script(path, plots):
    """``plots`` is a list of ``(csv_name, xcol, ycols, title, logscale)``."""
    lines = ["set datafile separator ','", "set key autotitle columnhead", "set term pngcairo size 900,600"]
    for name, xcol, ycols, title, logscale in plots:
        stem = Path(name).stem
        lines.append(f"set output '{stem}.png'")
        lines.append(f"set title '{title}'")
        lines.append("set logscale xy" if logscale else "unset logscale")
        parts = [f"'{name}' using {xcol}:{c} with lines" for c in ycols]
        lines.append("plot " + ", \\\n     ".join(parts))
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)
