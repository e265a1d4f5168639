import numpy as np
import pytest

from mstree.dataset import Dataset, standardize
from mstree.msc import (
    build_neighborhood_graph,
    compute_cancellation_sequence,
    compute_flow,
    extract_base_partitions,
)
from mstree.tree import build_tree


def make_dataset(x, y, dim_names=None, output_names=("y",)):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 1 and x.shape[1] > 1:
        x = x.T
    y = np.asarray(y, dtype=float).reshape(len(x), -1)
    dim_names = dim_names or tuple(f"x{i + 1}" for i in range(x.shape[1]))
    n_cols = x.shape[1] + y.shape[1]
    return Dataset(
        inputs=x, outputs=y, active_output=0,
        dim_names=tuple(dim_names), output_names=tuple(output_names),
        raw_means=np.zeros(n_cols), raw_scales=np.ones(n_cols),
    )


# Two maxima (idx 0, 1), two minima (idx 2, 3) and one interior point per
# quadrant. All four (min, max) pairs are occupied, and the first
# cancellation (the weaker maximum) merges two partition pairs in a single
# step; the remaining minimum cancellation then merges the survivors into
# the root. Heights are chosen so every ascent/descent choice is forced.
QUAD_POINTS = np.array([
    [-1.0, 0.0],   # 0: strong maximum, f = 2.2
    [1.0, 0.0],    # 1: weak maximum,   f = 1.8
    [0.0, -1.0],   # 2: deep minimum,   f = -2.2
    [0.0, 1.0],    # 3: shallow minimum, f = -1.8
    [-0.5, -0.5],  # 4: quadrant point  (min 2, max 0)
    [-0.5, 0.5],   # 5: quadrant point  (min 3, max 0)
    [0.5, -0.5],   # 6: quadrant point  (min 2, max 1)
    [0.5, 0.5],    # 7: quadrant point  (min 3, max 1)
])
QUAD_VALUES = np.array([2.2, 1.8, -2.2, -1.8, 0.1, 0.1, 0.1, 0.1])


@pytest.fixture(scope="session")
def quad_dataset():
    return make_dataset(QUAD_POINTS, QUAD_VALUES)


@pytest.fixture(scope="session")
def quad_pipeline(quad_dataset):
    ds = quad_dataset
    g = build_neighborhood_graph(ds, 4)
    flow = compute_flow(ds, g)
    parts = extract_base_partitions(flow)
    seq = compute_cancellation_sequence(ds, g, flow, parts)
    tree = build_tree(parts, seq)
    return ds, g, flow, parts, seq, tree


def pipeline(ds, k=15):
    """Full decomposition of an already-standardized dataset."""
    g = build_neighborhood_graph(ds, k)
    flow = compute_flow(ds, g)
    parts = extract_base_partitions(flow)
    seq = compute_cancellation_sequence(ds, g, flow, parts)
    return g, flow, parts, seq, build_tree(parts, seq)
