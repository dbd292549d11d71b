"""Dataset file format and synthetic data generation.

CSV layout: header row with feature columns f0..f{D-1} in order, optionally
followed by a final label column y. Floats are written with 17 significant
digits so a load/save cycle is byte identical and value exact.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import LabelOutOfRange, MalformedHeader, NonNumericCell
from .glm import Dataset


def format_float(x: float) -> str:
    """17 significant digits: enough to round-trip a double exactly."""
    return format(float(x), ".17g")


def load_csv(path) -> Dataset:
    """Read a dataset; see the module docstring for the expected layout.

    Labels come back as int64 when every y value is integral, float64
    otherwise (real-valued targets for the Gaussian head). Range checks
    against a particular head happen at the point of use.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows or not rows[0]:
        raise MalformedHeader("missing header row")
    header = rows[0]
    has_labels = header[-1] == "y"
    feature_cols = header[:-1] if has_labels else header
    if not feature_cols:
        raise MalformedHeader("no feature columns")
    expected = [f"f{i}" for i in range(len(feature_cols))]
    if feature_cols != expected:
        raise MalformedHeader(
            f"feature columns must be {','.join(expected)}, got {','.join(feature_cols)}"
        )
    d = len(feature_cols)
    width = len(header)

    features = np.zeros((len(rows) - 1, d))
    labels = np.zeros(len(rows) - 1) if has_labels else None
    for r, row in enumerate(rows[1:]):
        if len(row) != width:
            raise MalformedHeader(
                f"row {r} has {len(row)} cells, expected {width}"
            )
        for c, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise NonNumericCell(
                    f"cell ({r},{c}) is not numeric: {cell!r}", row=r, col=c
                ) from None
            if c < d:
                features[r, c] = value
            else:
                if not np.isfinite(value):
                    raise LabelOutOfRange(f"label in row {r} is not finite: {cell!r}")
                labels[r] = value
    if labels is not None and labels.size and np.all(labels == np.floor(labels)):
        labels = labels.astype(np.int64)
    elif labels is not None and labels.size == 0:
        labels = labels.astype(np.int64)
    return Dataset(features, labels)


def save_csv(path, data: Dataset):
    """Write a dataset in the load_csv layout, floats at 17 digits."""
    header = [f"f{i}" for i in range(data.dim)]
    if data.is_labeled:
        header.append("y")
    integral_labels = data.is_labeled and np.issubdtype(data.labels.dtype, np.integer)
    lines = [",".join(header)]
    for i in range(data.n):
        cells = [format_float(v) for v in data.features[i]]
        if data.is_labeled:
            y = data.labels[i]
            cells.append(str(int(y)) if integral_labels else format_float(y))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def gen_synthetic(seed: int, n: int, d: int, c: int, class_sep: float) -> Dataset:
    """Gaussian class clusters with unit covariance.

    Class means are drawn uniformly in direction on a sphere of radius
    class_sep; labels cycle 0..C-1 so counts are balanced within one.
    Deterministic in seed.
    """
    if c < 2:
        raise ValueError("need at least two classes")
    if d < 1:
        raise ValueError("need at least one feature dimension")
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((c, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    means = class_sep * directions / norms
    labels = (np.arange(n) % c).astype(np.int64)
    features = means[labels] + rng.standard_normal((n, d))
    return Dataset(features, labels)
