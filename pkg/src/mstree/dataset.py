"""Tabular scalar-function samples: loading, validation, standardization.

A dataset is an n x d input matrix plus one or more output columns, all
float64. The whole pipeline operates on the standardized dataset; the
original column statistics are kept so values can be mapped back.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

__all__ = ["Dataset", "DatasetError", "load_table", "standardize"]


class DatasetError(ValueError):
    """Raised for malformed input tables."""


@dataclass(frozen=True)
class Dataset:
    """Sampled scalar function over a multi-dimensional point cloud.

    `raw_means` / `raw_scales` map current column values back to the values
    as loaded: raw = value * scale + mean, input columns first, then
    outputs. For a freshly loaded dataset they are the identity (0, 1).
    """

    inputs: np.ndarray          # (n, d)
    outputs: np.ndarray         # (n, n_out)
    active_output: int
    dim_names: tuple[str, ...]
    output_names: tuple[str, ...]
    raw_means: np.ndarray       # (d + n_out,)
    raw_scales: np.ndarray      # (d + n_out,)

    def __post_init__(self):
        n, d = self.inputs.shape
        if n < 2 or d < 1:
            raise DatasetError(f"need at least 2 rows and 1 input column, got n={n}, d={d}")
        if self.outputs.shape[0] != n:
            raise DatasetError("inputs and outputs disagree on row count")
        if not (0 <= self.active_output < self.outputs.shape[1]):
            raise DatasetError(f"active output index {self.active_output} out of range")
        if not np.isfinite(self.inputs).all() or not np.isfinite(self.outputs).all():
            raise DatasetError("dataset contains non-finite values")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def d(self) -> int:
        return self.inputs.shape[1]

    @property
    def f(self) -> np.ndarray:
        """The active output column (the function driving the topology)."""
        return self.outputs[:, self.active_output]

    def column(self, name: str) -> np.ndarray:
        """Look up an input or output column by name."""
        if name in self.dim_names:
            return self.inputs[:, self.dim_names.index(name)]
        if name in self.output_names:
            return self.outputs[:, self.output_names.index(name)]
        raise KeyError(f"unknown column {name!r}")

    def restore_raw(self) -> tuple[np.ndarray, np.ndarray]:
        """Undo standardization: return (inputs, outputs) on the original scale."""
        d = self.d
        inp = self.inputs * self.raw_scales[:d] + self.raw_means[:d]
        out = self.outputs * self.raw_scales[d:] + self.raw_means[d:]
        return inp, out

    def take_rows(self, order: Sequence[int]) -> "Dataset":
        """Dataset with rows permuted by `order` (columns untouched)."""
        idx = np.asarray(order)
        return replace(self, inputs=self.inputs[idx], outputs=self.outputs[idx])


MARKER_COLUMN = "|"


def load_table(source, active_output: str, output_columns: Sequence[str] | None = None) -> Dataset:
    """Parse a delimited table into a Dataset.

    `source` is a path, a text file object, or a CSV string. The header row
    names the columns; input columns come first and the output block is
    identified either by a marker column literally named "|" or by an
    explicit `output_columns` list (which wins over the marker).
    `active_output` names the output column that drives the topology.
    """
    rows = _read_rows(source)
    if not rows:
        raise DatasetError("empty table: missing header row")
    header = [h.strip() for h in rows[0]]
    if not header or all(h == "" for h in header):
        raise DatasetError("missing header row")
    data_rows = rows[1:]
    if len(data_rows) < 2:
        raise DatasetError("need at least 2 data rows")

    seen = set()
    for h in header:
        if h in seen:
            raise DatasetError(f"duplicate column name {h!r}")
        seen.add(h)

    if output_columns is not None:
        out_names = [c.strip() for c in output_columns]
        for c in out_names:
            if c not in header or c == MARKER_COLUMN:
                raise DatasetError(f"unknown output column {c!r}")
        keep = [h for h in header if h != MARKER_COLUMN]
        in_names = [h for h in keep if h not in out_names]
    elif MARKER_COLUMN in header:
        cut = header.index(MARKER_COLUMN)
        in_names = header[:cut]
        out_names = [h for h in header[cut + 1:] if h != MARKER_COLUMN]
    else:
        raise DatasetError(
            'cannot split inputs from outputs: add a "|" marker column or pass output column names')

    if not in_names:
        raise DatasetError("no input columns")
    if not out_names:
        raise DatasetError("no output columns")
    if active_output not in out_names:
        raise DatasetError(f"unknown output name {active_output!r}")

    col_index = {h: j for j, h in enumerate(header)}
    values = np.empty((len(data_rows), len(in_names) + len(out_names)))
    names = in_names + out_names
    for i, row in enumerate(data_rows):
        if len(row) != len(header):
            raise DatasetError(f"row {i + 1} has {len(row)} cells, header has {len(header)}")
        for j, name in enumerate(names):
            cell = row[col_index[name]].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(f"non-numeric value at (row {i + 1}, col {name!r}): {cell!r}") from None
            if not np.isfinite(v):
                raise DatasetError(f"non-finite value at (row {i + 1}, col {name!r})")
            values[i, j] = v

    d = len(in_names)
    n_cols = values.shape[1]
    return Dataset(
        inputs=values[:, :d],
        outputs=values[:, d:],
        active_output=out_names.index(active_output),
        dim_names=tuple(in_names),
        output_names=tuple(out_names),
        raw_means=np.zeros(n_cols),
        raw_scales=np.ones(n_cols),
    )


def _read_rows(source) -> list[list[str]]:
    if isinstance(source, str) and "\n" not in source and source != "":
        with open(source, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    if isinstance(source, str):
        return list(csv.reader(io.StringIO(source)))
    return list(csv.reader(source))


def standardize(ds: Dataset) -> Dataset:
    """Shift and scale every column to zero mean and unit variance.

    Uses the population standard deviation (divide by n). Constant columns
    map to zeros with scale 1. Applied to the full dataset once; partition
    operations never re-standardize. Statistics compose with any previous
    standardization so `restore_raw` always recovers the loaded values.

    Column statistics are accumulated in sorted-value order, so the result
    commutes exactly with any row reordering.
    """
    cols = np.hstack([ds.inputs, ds.outputs])
    mean = np.sort(cols, axis=0).sum(axis=0) / cols.shape[0]
    scale = np.sqrt(np.sort((cols - mean) ** 2, axis=0).sum(axis=0) / cols.shape[0])
    scale = np.where(scale == 0.0, 1.0, scale)
    std = (cols - mean) / scale
    d = ds.d
    # raw = v_old * s_old + m_old and v_old = v_new * scale + mean
    new_means = ds.raw_means + mean * ds.raw_scales
    new_scales = ds.raw_scales * scale
    return replace(
        ds,
        inputs=std[:, :d],
        outputs=std[:, d:],
        raw_means=new_means,
        raw_scales=new_scales,
    )
