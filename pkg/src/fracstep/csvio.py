"""CSV rendering with full-precision floats (17 significant digits, LF endings)."""

import csv

import numpy as np


def fmt(value):
    return "%.17g" % value


def write_rows(fh, header, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def trajectory_header(dim):
    return ["t"] + [f"x{i + 1}" for i in range(dim)]


def write_trajectory(fh, times, states):
    states = np.asarray(states)
    write_rows(fh, trajectory_header(states.shape[1]),
               ([fmt(t)] + [fmt(v) for v in row] for t, row in zip(times, states)))


def save_trajectory(path, times, states):
    with open(path, "w", newline="") as fh:
        write_trajectory(fh, times, states)


def load_trajectory(path):
    """Return ``(times, states)`` from a file written by :func:`save_trajectory`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "t":
            raise ValueError(f"{path}: not a trajectory CSV (header {header!r})")
        data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    data = data.reshape(-1, len(header))
    return data[:, 0], data[:, 1:]
