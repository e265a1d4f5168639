"""Star-coordinate projection: every input dimension maps to a steerable 2D
vector and a point's image is the coordinate-weighted vector sum, optionally
including an output axis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .regression import InverseCurve
from .tree import PartitionTree, Selection

__all__ = [
    "ProjectionSpec",
    "default_spec",
    "project",
    "update_axis",
    "project_partition_edges",
    "project_curve",
]


@dataclass(frozen=True)
class ProjectionSpec:
    axes: np.ndarray               # (d, 2), a zero row removes the dimension
    y_axis: np.ndarray | None = None  # (2,) optional output-axis vector

    @property
    def d(self) -> int:
        return self.axes.shape[0]

    def to_dict(self) -> dict:
        return {
            "axes": [[float(v) for v in row] for row in self.axes],
            "yAxis": None if self.y_axis is None else [float(v) for v in self.y_axis],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProjectionSpec":
        y = d.get("yAxis")
        return cls(
            axes=np.asarray(d["axes"], dtype=float),
            y_axis=None if y is None else np.asarray(y, dtype=float),
        )


def default_spec(d: int) -> ProjectionSpec:
    """d unit vectors at equally spaced angles over [0, pi), no output axis."""
    angles = np.arange(d) * np.pi / d
    return ProjectionSpec(axes=np.stack([np.cos(angles), np.sin(angles)], axis=1))


def project(spec: ProjectionSpec, X: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """2D positions: sum_i x_i * v_i (+ y * v_y when the output axis is set)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != spec.d:
        raise ValueError(f"point dimension {X.shape[1]} does not match spec dimension {spec.d}")
    pos = X @ spec.axes
    if spec.y_axis is not None and y is not None:
        pos = pos + np.asarray(y, dtype=float).reshape(-1, 1) * spec.y_axis
    return pos


def update_axis(spec: ProjectionSpec, dim: int, scale: float = 1.0,
                rotate: float = 0.0) -> ProjectionSpec:
    """Scale and rotate one dimension's vector; all others are untouched.
    dim == -1 addresses the output axis."""
    c, s = np.cos(rotate), np.sin(rotate)
    rot = np.array([[c, -s], [s, c]])
    if dim == -1:
        if spec.y_axis is None:
            raise ValueError("no output axis to update")
        return ProjectionSpec(axes=spec.axes, y_axis=scale * (rot @ spec.y_axis))
    if not 0 <= dim < spec.d:
        raise ValueError(f"dimension {dim} out of range")
    axes = spec.axes.copy()
    axes[dim] = scale * (rot @ axes[dim])
    return ProjectionSpec(axes=axes, y_axis=spec.y_axis)


def project_partition_edges(spec: ProjectionSpec, tree: PartitionTree,
                            selection: Selection, ds: Dataset) -> list[dict]:
    """Per selected partition, the segment between its projected minimum and
    maximum sample points."""
    f = ds.f
    edges = []
    for i in sorted(selection.nodes):
        p = tree.node(i)
        ends = np.array([p.min_ext, p.max_ext])
        pos = project(spec, ds.inputs[ends], f[ends])
        edges.append({"node": i, "a": pos[0], "b": pos[1]})
    return edges


def project_curve(spec: ProjectionSpec, curve: InverseCurve) -> np.ndarray:
    """A partition's inverse curve as a projected polyline. Its endpoints
    need not coincide with the projected extrema."""
    return project(spec, curve.centers, curve.levels)
