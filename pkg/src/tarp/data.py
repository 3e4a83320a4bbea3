"""Tabular dataset container, CSV loading, standardization and splitting.

All transformation parameters are owned by ``StandardizationParams`` so held-out
data is always mapped with training means/scales and predictions can be
de-centered back to original units.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Raised for malformed input data (files, shapes, values)."""


RESPONSE_KINDS = ("continuous", "binary")


@dataclass(frozen=True)
class Dataset:
    """An (n x p) design matrix with an n-vector response.

    ``response_kind`` is "continuous" or "binary"; binary responses must be
    coded 0/1. All entries must be finite.
    """

    design: np.ndarray
    response: np.ndarray
    response_kind: str = "continuous"
    column_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        design = np.ascontiguousarray(np.asarray(self.design, dtype=np.float64))
        response = np.ascontiguousarray(np.asarray(self.response, dtype=np.float64))
        if design.ndim != 2:
            raise DataError(f"design must be 2-dimensional, got shape {design.shape}")
        n, p = design.shape
        if n < 2:
            raise DataError(f"need at least 2 rows, got {n}")
        if p < 1:
            raise DataError("need at least 1 predictor column")
        if response.shape != (n,):
            raise DataError(
                f"response length {response.shape} does not match {n} design rows"
            )
        if not np.all(np.isfinite(design)):
            raise DataError("design contains NaN or Inf entries")
        if not np.all(np.isfinite(response)):
            raise DataError("response contains NaN or Inf entries")
        if self.response_kind not in RESPONSE_KINDS:
            raise DataError(f"unknown response_kind {self.response_kind!r}")
        if self.response_kind == "binary" and not np.all(
            (response == 0.0) | (response == 1.0)
        ):
            raise DataError("binary response must only contain 0 and 1")
        names = list(self.column_names) if self.column_names else [
            f"x{j + 1}" for j in range(p)
        ]
        if len(names) != p:
            raise DataError(f"{len(names)} column names for {p} columns")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "response", response)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def p(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True)
class StandardizationParams:
    """Training-set column means/scales plus the response mean.

    ``column_scales`` is 1.0 for columns flagged constant; ``response_mean``
    is None for binary responses (they are never centered).
    """

    column_means: np.ndarray
    column_scales: np.ndarray
    constant_mask: np.ndarray
    response_mean: float | None

    def transform_design(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.column_means.shape[0]:
            raise DataError(
                f"matrix has {X.shape[1]} columns, params expect "
                f"{self.column_means.shape[0]}"
            )
        return (X - self.column_means) / self.column_scales

    def transform_response(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if self.response_mean is None:
            return y.copy()
        return y - self.response_mean

    def inverse_response(self, y_centered: np.ndarray) -> np.ndarray:
        y_centered = np.asarray(y_centered, dtype=np.float64)
        if self.response_mean is None:
            return y_centered.copy()
        return y_centered + self.response_mean


def load_table(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV with a header row into (column names, matrix).

    Any cell that does not parse as a finite real number is reported with its
    row number and column name.
    """
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        rows: list[list[float]] = []
        for row_number, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # ignore trailing blank lines
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {row_number} has {len(row)} cells, "
                    f"expected {len(header)}"
                )
            parsed = []
            for j, cell in enumerate(row):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_number}, column {header[j]!r}: "
                        f"cannot parse {cell.strip()!r} as a number"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(
                        f"{path}: row {row_number}, column {header[j]!r}: "
                        f"non-finite value {cell.strip()!r}"
                    )
                parsed.append(value)
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=np.float64)


def load_csv(path, target: str) -> Dataset:
    """Load a numeric CSV with a header row, extracting ``target`` as response.

    Column order of the remaining design columns is preserved. The response
    kind is inferred: all-0/1 responses are treated as binary.
    """
    header, table = load_table(path)
    if target not in header:
        raise DataError(f"{path}: target column {target!r} not in header")
    if len(table) < 2:
        raise DataError(f"{path}: need at least 2 data rows, got {len(table)}")
    target_idx = header.index(target)
    response = table[:, target_idx]
    design = np.delete(table, target_idx, axis=1)
    names = [h for j, h in enumerate(header) if j != target_idx]
    kind = "binary" if np.all((response == 0.0) | (response == 1.0)) else "continuous"
    return Dataset(design, response, response_kind=kind, column_names=names)


def write_csv(dataset: Dataset, path, target: str = "y") -> None:
    """Write a Dataset back to CSV with the response as column ``target``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*dataset.column_names, target])
        for i in range(dataset.n):
            writer.writerow(
                [repr(float(v)) for v in dataset.design[i]]
                + [repr(float(dataset.response[i]))]
            )


def standardize(dataset: Dataset) -> tuple[Dataset, StandardizationParams]:
    """Center and scale columns to unit sample standard deviation (divisor n-1).

    Constant columns are centered only and flagged (scale recorded as 1).
    A continuous response is centered by its mean; binary responses are left
    untouched.
    """
    X = dataset.design
    means = X.mean(axis=0)
    scales = X.std(axis=0, ddof=1)
    constant = scales == 0.0
    scales = np.where(constant, 1.0, scales)
    if dataset.response_kind == "continuous":
        response_mean = float(dataset.response.mean())
    else:
        response_mean = None
    params = StandardizationParams(
        column_means=means,
        column_scales=scales,
        constant_mask=constant,
        response_mean=response_mean,
    )
    standardized = Dataset(
        params.transform_design(X),
        params.transform_response(dataset.response),
        response_kind=dataset.response_kind,
        column_names=list(dataset.column_names),
    )
    return standardized, params


def split(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint train/test row partition, train size ceil(n*(1-f)).

    Deterministic given ``seed``; row order within each part follows the
    original dataset.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0,1), got {test_fraction}")
    n = dataset.n
    # small guard keeps ceil stable against float noise in n*(1-f)
    n_train = math.ceil(n * (1.0 - test_fraction) - 1e-9)
    if n_train < 2:
        raise DataError(f"train size {n_train} after split is below 2")
    if n - n_train < 1:
        raise DataError("test split is empty")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])

    def take(idx):
        return Dataset(
            dataset.design[idx],
            dataset.response[idx],
            response_kind=dataset.response_kind,
            column_names=list(dataset.column_names),
        )

    return take(train_idx), take(test_idx)
