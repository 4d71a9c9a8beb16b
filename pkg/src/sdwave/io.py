"""CSV trajectories and line-oriented YAML summaries."""

import csv

import numpy as np
import yaml


def trajectory_columns(n_modes):
    return (["t"] + [f"c_{k}" for k in range(1, n_modes + 1)]
            + [f"cdot_{k}" for k in range(1, n_modes + 1)] + ["g", "r"])


def write_trajectory_csv(path, traj, r=None):
    """Columns t, c_1..c_N, cdot_1..cdot_N, g, r; floats at full precision."""
    n = traj.c.shape[1]
    r = np.full(len(traj), np.nan) if r is None else np.asarray(r, dtype=float)
    data = np.column_stack([traj.t, traj.c, traj.c_dot, traj.g, r])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(trajectory_columns(n)) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")


def read_trajectory_csv(path):
    """Returns a dict of column name to array."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, j] for j, name in enumerate(header)}


def _plain(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def flatten(tree, prefix=""):
    """Nested mappings to a flat dict with dotted keys; lists are kept as values."""
    out = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = _plain(value)
    return out


def write_summary(path, tree):
    """One ``dotted.key: value`` line per entry, in insertion order."""
    flat = flatten(tree)
    with open(path, "w") as fh:
        for key, value in flat.items():
            fh.write(yaml.safe_dump({key: value}, default_flow_style=True, width=10_000)
                     .strip().lstrip("{").rstrip("}") + "\n")


def read_summary(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.update(yaml.safe_load("{" + line.strip() + "}"))
    return out
