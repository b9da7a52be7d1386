"""Dataset containers and CSV import/export.

A :class:`Dataset` bundles the response, the predictor matrix, and (for
simulated data) the ground truth needed to score selection: the true
coefficients, the active set, the contamination masks, and the noise
scale. The CSV layout is a header row ``y,x1,...,xp`` followed by one
row per observation; masks use the same layout with 0/1 entries.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .errors import ShapeMismatch


@dataclass
class GroundTruth:
    """Truth record for simulated data.

    Attributes
    ----------
    beta : ndarray of shape (p,)
        True coefficient vector.
    active_set : set of int
        Indices j with ``beta[j] != 0``.
    mask_X : ndarray of shape (n, p), values in {0, 1}
        1 where a predictor cell was rewritten by contamination.
    mask_y : ndarray of shape (n,), values in {0, 1}
        1 where a response entry was rewritten.
    noise_sd : float
        Standard deviation used to draw the error term.
    """

    beta: np.ndarray
    active_set: set = field(default_factory=set)
    mask_X: Optional[np.ndarray] = None
    mask_y: Optional[np.ndarray] = None
    noise_sd: float = 1.0

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        expected = {int(j) for j in np.flatnonzero(self.beta)}
        if not self.active_set:
            self.active_set = expected
        elif set(self.active_set) != expected:
            raise ShapeMismatch("active_set does not match nonzeros of beta")


@dataclass
class Dataset:
    """Observed regression data: response ``y`` and predictors ``X``."""

    y: np.ndarray
    X: np.ndarray
    truth: Optional[GroundTruth] = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ShapeMismatch(f"X must be 2-D, got shape {self.X.shape}")
        if self.y.shape[0] != self.X.shape[0]:
            raise ShapeMismatch(
                f"y has length {self.y.shape[0]}, X has {self.X.shape[0]} rows"
            )

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def _header(p: int) -> list[str]:
    return ["y"] + [f"x{j}" for j in range(1, p + 1)]


def dataset_to_csv(data: Dataset, path: str, mask_path: str | None = None) -> None:
    """Write a dataset (and optionally its contamination masks) to CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_header(data.p))
        for i in range(data.n):
            writer.writerow([repr(float(data.y[i]))]
                            + [repr(float(v)) for v in data.X[i]])
    if mask_path is not None:
        my = data.truth.mask_y if data.truth is not None else None
        mX = data.truth.mask_X if data.truth is not None else None
        if my is None:
            my = np.zeros(data.n, dtype=int)
        if mX is None:
            mX = np.zeros((data.n, data.p), dtype=int)
        with open(mask_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_header(data.p))
            for i in range(data.n):
                writer.writerow([int(my[i])] + [int(v) for v in mX[i]])


def dataset_from_csv(path: str) -> Dataset:
    """Read a ``y,x1,...,xp`` CSV into a Dataset.

    Raises
    ------
    ShapeMismatch
        On a malformed header, ragged rows, or non-numeric fields.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ShapeMismatch(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "y":
            raise ShapeMismatch(f"{path}: first header field must be 'y', got {header[:1]}")
        p = len(header) - 1
        if p < 1:
            raise ShapeMismatch(f"{path}: no predictor columns found")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != p + 1:
                raise ShapeMismatch(
                    f"{path}:{lineno}: expected {p + 1} fields, found {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ShapeMismatch(f"{path}:{lineno}: non-numeric field ({exc})") from None
    if not rows:
        raise ShapeMismatch(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    return Dataset(y=arr[:, 0], X=arr[:, 1:])


def example_csv_path() -> str:
    """Path of the bundled 50x20 example dataset (block-correlated, 5% cell noise)."""
    return str(resources.files("cellens") / "resources" / "example_50x20.csv")
