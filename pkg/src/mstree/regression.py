"""Partition-local linear models and the derived goodness-of-fit measures.

Models are fit per partition, independently of any neighbors, by the
closed-form normal equations; ridge regularization penalizes only the
slope coefficients, never the intercept. Inverse curves estimate the input
location as a function of the output level with a Gaussian kernel mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinearModel",
    "DimModelVector",
    "InverseCurve",
    "fit_model",
    "fit_dim_models",
    "r2_score",
    "dim_score_vector",
    "cosine_similarity",
    "fit_inverse_curve",
    "normalize_coefficients",
]

OLS = "ols"
RIDGE = "ridge"


def _as_points(X) -> np.ndarray:
    """Coerce to an (m, d) matrix; a flat array is one input dimension."""
    X = np.asarray(X, dtype=float)
    return X[:, None] if X.ndim == 1 else X


@dataclass(frozen=True)
class LinearModel:
    coefficients: np.ndarray  # (d,)
    intercept: float
    kind: str = RIDGE
    ridge_lambda: float = 0.0

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X) @ self.coefficients + self.intercept

    def to_dict(self) -> dict:
        return {
            "coefficients": [float(c) for c in self.coefficients],
            "intercept": float(self.intercept),
            "kind": self.kind,
            "ridgeLambda": float(self.ridge_lambda),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(
            coefficients=np.asarray(d["coefficients"], dtype=float),
            intercept=float(d["intercept"]),
            kind=d["kind"],
            ridge_lambda=float(d["ridgeLambda"]),
        )


@dataclass(frozen=True)
class DimModelVector:
    """One single-input model per dimension, each fit on (x_i, y) alone."""

    models: tuple[LinearModel, ...]

    def __len__(self) -> int:
        return len(self.models)


@dataclass(frozen=True)
class InverseCurve:
    """Kernel estimate of the input location per output level.

    `levels` are strictly increasing across the partition's output range;
    `centers[j]` is the weighted input mean at levels[j] and `spreads[j]`
    the weighted per-dimension standard deviation.
    """

    levels: np.ndarray   # (m,)
    centers: np.ndarray  # (m, d)
    spreads: np.ndarray  # (m, d)
    bandwidth: float

    def to_dict(self) -> dict:
        return {
            "levels": [float(v) for v in self.levels],
            "centers": [[float(v) for v in row] for row in self.centers],
            "spreads": [[float(v) for v in row] for row in self.spreads],
            "bandwidth": float(self.bandwidth),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InverseCurve":
        return cls(
            levels=np.asarray(d["levels"], dtype=float),
            centers=np.asarray(d["centers"], dtype=float),
            spreads=np.asarray(d["spreads"], dtype=float),
            bandwidth=float(d["bandwidth"]),
        )


def fit_model(X: np.ndarray, y: np.ndarray, kind: str = RIDGE,
              ridge_lambda: float = 1.0) -> LinearModel:
    """Closed-form least squares on centered data.

    Ridge adds ridge_lambda * I to the Gram matrix of the inputs only, so
    the intercept is never penalized. Underdetermined or collinear plain
    least squares falls back to the minimum-norm solution, so even
    single-point partitions yield a model.
    """
    X = _as_points(X)
    y = np.asarray(y, dtype=float).ravel()
    xm = X.mean(axis=0)
    ym = y.mean()
    Xc = X - xm
    yc = y - ym
    lam = float(ridge_lambda) if kind == RIDGE else 0.0
    if lam > 0.0:
        gram = Xc.T @ Xc + lam * np.eye(X.shape[1])
        theta = np.linalg.solve(gram, Xc.T @ yc)
    else:
        theta, *_ = np.linalg.lstsq(Xc, yc, rcond=None)
    intercept = ym - xm @ theta
    return LinearModel(coefficients=theta, intercept=float(intercept),
                       kind=kind, ridge_lambda=lam if kind == RIDGE else 0.0)


def fit_dim_models(X: np.ndarray, y: np.ndarray, kind: str = RIDGE,
                   ridge_lambda: float = 1.0) -> DimModelVector:
    X = _as_points(X)
    return DimModelVector(tuple(
        fit_model(X[:, [i]], y, kind=kind, ridge_lambda=ridge_lambda)
        for i in range(X.shape[1])))


def r2_score(model: LinearModel, X: np.ndarray, y: np.ndarray) -> float:
    """Coefficient of determination, 1 - SSE/SST, in (-inf, 1].

    A model predicting the output mean scores 0. With zero output variance
    the score is 1 for a zero-residual fit and -inf otherwise.
    """
    y = np.asarray(y, dtype=float).ravel()
    resid = y - model.predict(X)
    sse = float(resid @ resid)
    dev = y - y.mean()
    sst = float(dev @ dev)
    if sst == 0.0:
        return 1.0 if sse == 0.0 else float("-inf")
    return 1.0 - sse / sst


def dim_score_vector(models: DimModelVector, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Score each per-dimension model on its own input column."""
    X = _as_points(X)
    return np.array([r2_score(m, X[:, [i]], y) for i, m in enumerate(models.models)])


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """a.b / (|a||b|); a zero vector compares as maximally dissimilar (0).
    Equal vectors compare as exactly 1 regardless of rounding."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    if np.array_equal(a, b):
        return 1.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def fit_inverse_curve(X: np.ndarray, y: np.ndarray, bandwidth: float,
                      samples: int = 25) -> InverseCurve:
    """Gaussian-kernel inverse regression over the partition's output range.

    At each of `samples` equally spaced output levels, the curve point is
    the kernel-weighted mean of the inputs, with weights
    exp(-(y_j - level)^2 / (2 h^2)), and the band is the kernel-weighted
    per-dimension standard deviation. A constant output collapses to a
    single sample at the input mean.
    """
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    X = _as_points(X)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] < 1:
        raise ValueError("need at least one point")
    ylo, yhi = float(y.min()), float(y.max())
    if ylo == yhi:
        return InverseCurve(
            levels=np.array([ylo]),
            centers=X.mean(axis=0)[None, :],
            spreads=np.zeros((1, X.shape[1])),
            bandwidth=bandwidth,
        )
    levels = np.linspace(ylo, yhi, samples)
    logw = -((y[None, :] - levels[:, None]) ** 2) / (2.0 * bandwidth**2)
    logw -= logw.max(axis=1, keepdims=True)  # guards the far-level underflow
    w = np.exp(logw)
    wsum = w.sum(axis=1, keepdims=True)
    centers = (w @ X) / wsum
    second = (w @ (X * X)) / wsum
    spreads = np.sqrt(np.clip(second - centers**2, 0.0, None))
    return InverseCurve(levels=levels, centers=centers, spreads=spreads,
                        bandwidth=bandwidth)


def normalize_coefficients(models: list[LinearModel], mode: str = "per-model") -> list[np.ndarray]:
    """Scale coefficient vectors for display: by each model's own largest
    magnitude ("per-model") or by the largest over all of them ("across")."""
    coefs = [np.asarray(m.coefficients, dtype=float) for m in models]
    if mode == "per-model":
        return [c / m if (m := np.abs(c).max()) > 0 else np.zeros_like(c) for c in coefs]
    if mode == "across":
        g = max((np.abs(c).max() for c in coefs), default=0.0)
        return [c / g if g > 0 else np.zeros_like(c) for c in coefs]
    raise ValueError(f"unknown normalization mode {mode!r}")
