"""Synthetic scalar-function samples used by tests, demos, and benchmarks.

The reference datasets from the original studies are not distributable, so
the test suite and the README examples run on these generated analogs.
"""

from __future__ import annotations

import io

import numpy as np

from .dataset import Dataset

__all__ = [
    "four_bumps",
    "sample_four_bumps",
    "random_smooth_dataset",
    "two_segment_dataset",
    "combustion_analog",
    "dataset_to_csv",
]

FOUR_BUMP_CENTERS = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]])
FOUR_BUMP_AMPLITUDES = np.array([1.0, 0.9, 0.8, 0.7])
FOUR_BUMP_SIGMA = 0.15


def four_bumps(points: np.ndarray) -> np.ndarray:
    """Sum of four Gaussian bumps on [0,1]^2 with distinct heights."""
    sq = ((points[:, None, :] - FOUR_BUMP_CENTERS[None, :, :]) ** 2).sum(axis=2)
    return (FOUR_BUMP_AMPLITUDES * np.exp(-sq / (2 * FOUR_BUMP_SIGMA**2))).sum(axis=1)


def sample_four_bumps(n: int = 2000, noise: float = 0.01, seed: int = 0) -> Dataset:
    """Uniform samples of the four-bump function with additive Gaussian noise."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(n, 2))
    y = four_bumps(x) + rng.normal(0.0, noise, size=n)
    return _make(x, y[:, None], ("x1", "x2"), ("y",))


def random_smooth_dataset(n: int, d: int, seed: int, noise: float = 0.02,
                          n_bumps: int = 5) -> Dataset:
    """A random smooth function (mixture of Gaussian bumps) plus noise."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(n, d))
    centers = rng.uniform(0.0, 1.0, size=(n_bumps, d))
    amps = rng.uniform(-1.0, 1.0, size=n_bumps)
    widths = rng.uniform(0.15, 0.4, size=n_bumps)
    sq = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    y = (amps * np.exp(-sq / (2 * widths**2))).sum(axis=1)
    y = y + rng.normal(0.0, noise, size=n)
    names = tuple(f"x{i + 1}" for i in range(d))
    return _make(x, y[:, None], names, ("y",))


def two_segment_dataset(n_large: int = 1000, n_small: int = 30, gap: float = 0.002,
                        step: float = 0.01, noise: float = 0.0, seed: int = 0) -> Dataset:
    """1D piecewise-linear sample: a long ascending run and a short descending
    one over disjoint x ranges.

    The large segment has slope +1 over x in [0, 1); the small segment
    continues just past it with slope -1, so the two meet at a genuine ridge
    and merge into one partition at high persistence.
    """
    rng = np.random.default_rng(seed)
    xa = np.linspace(0.0, 1.0, n_large, endpoint=False)
    xb = xa[-1] + gap + step * np.arange(n_small)
    ya = xa.copy()
    yb = ya[-1] - (xb - xa[-1])
    x = np.concatenate([xa, xb])
    y = np.concatenate([ya, yb])
    if noise > 0:
        y = y + rng.normal(0.0, noise, size=y.shape)
    return _make(x[:, None], y[:, None], ("x1",), ("y",))


def combustion_analog(n: int = 5172, d: int = 10, seed: int = 7) -> Dataset:
    """Synthetic stand-in at the scale of the reference combustion table.

    A handful of Gaussian features in the first three dimensions plus weak
    linear trends in the rest, with mild noise.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(n, d))
    centers = rng.uniform(0.2, 0.8, size=(6, 3))
    amps = np.array([1.0, -0.8, 0.7, -0.6, 0.5, 0.4])
    sq = ((x[:, None, :3] - centers[None, :, :]) ** 2).sum(axis=2)
    y = (amps * np.exp(-sq / (2 * 0.2**2))).sum(axis=1)
    y = y + x[:, 3:].dot(rng.uniform(-0.2, 0.2, size=d - 3))
    y = y + rng.normal(0.0, 0.01, size=n)
    names = tuple(f"s{i + 1}" for i in range(d))
    return _make(x, y[:, None], names, ("temp",))


def dataset_to_csv(ds: Dataset) -> str:
    """Serialize a (raw) dataset in the marker-column table format."""
    buf = io.StringIO()
    buf.write(",".join([*ds.dim_names, "|", *ds.output_names]) + "\n")
    inp, out = ds.restore_raw()
    for i in range(ds.n):
        cells = [repr(float(v)) for v in inp[i]] + [""] + [repr(float(v)) for v in out[i]]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _make(x, y, dim_names, output_names) -> Dataset:
    n_cols = x.shape[1] + y.shape[1]
    return Dataset(
        inputs=x,
        outputs=y,
        active_output=0,
        dim_names=dim_names,
        output_names=output_names,
        raw_means=np.zeros(n_cols),
        raw_scales=np.ones(n_cols),
    )
