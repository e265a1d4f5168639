"""Morse-Smale decomposition of a sampled scalar function, approximated on a
k-nearest-neighbor graph, and the persistence-ordered cancellation sequence
of partition merges.

Points flow along steepest difference-quotient ascent/descent to a local
maximum/minimum; a partition is the set of points sharing the same
(minimum, maximum) pair. Extrema of the same kind whose regions touch are
cancelled in order of increasing normalized persistence; each cancellation
merges (or relabels) every partition keyed with the dying extremum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .dataset import Dataset

__all__ = [
    "NeighborhoodGraph",
    "FlowAssignment",
    "BasePartition",
    "MergeRecord",
    "CancellationStep",
    "CancellationSequence",
    "build_neighborhood_graph",
    "compute_flow",
    "extract_base_partitions",
    "compute_cancellation_sequence",
]

MAX_MERGE = "max-merge"
MIN_MERGE = "min-merge"

# Extra k-NN candidates fetched so that exact distance ties can be broken by
# point index instead of kd-tree internals.
_TIE_SLACK = 16


@dataclass(frozen=True)
class NeighborhoodGraph:
    """Symmetrized k-NN graph over the dataset points (standardized inputs)."""

    k: int
    knn: np.ndarray     # (n, k) pre-symmetrization neighbor indices
    edges: np.ndarray   # (E, 2) undirected, u < v, lexicographically sorted

    @property
    def n(self) -> int:
        return self.knn.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        """Neighbor indices of point i in the symmetrized graph."""
        e = self.edges
        return np.sort(np.concatenate([e[e[:, 0] == i, 1], e[e[:, 1] == i, 0]]))

    def directed(self) -> tuple[np.ndarray, np.ndarray]:
        """Both orientations of every edge, as (source, target) arrays."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        return np.concatenate([u, v]), np.concatenate([v, u])


@dataclass(frozen=True)
class FlowAssignment:
    """Per-point destinations of steepest ascent and descent."""

    max_of: np.ndarray  # (n,) index of the maximum reached from each point
    min_of: np.ndarray  # (n,) index of the minimum reached from each point
    maxima: np.ndarray  # sorted indices of local maxima
    minima: np.ndarray  # sorted indices of local minima


@dataclass(frozen=True)
class BasePartition:
    key: tuple[int, int]     # (minimum index, maximum index)
    points: np.ndarray       # sorted member point indices


@dataclass(frozen=True)
class MergeRecord:
    """Two partitions joining into a new one. `a` is the partition already
    keyed with the surviving extremum, `b` the one keyed with the dying."""

    a: int                   # partition handle
    b: int                   # partition handle
    new: int                 # handle of the merged partition
    new_key: tuple[int, int]


@dataclass(frozen=True)
class CancellationStep:
    persistence: float       # normalized to [0, 1]
    dying_extremum: int
    surviving_extremum: int
    kind: str                # MAX_MERGE or MIN_MERGE
    merges: tuple[MergeRecord, ...]
    relabels: tuple[tuple[int, tuple[int, int]], ...]  # (handle, new key)


@dataclass(frozen=True)
class CancellationSequence:
    steps: tuple[CancellationStep, ...]
    n_points: int
    n_base: int              # number of base partitions (handles 0..n_base-1)
    value_range: float       # active-output range used for normalization
    final_handle: int        # handle of the single surviving partition


def build_neighborhood_graph(ds: Dataset, k: int) -> NeighborhoodGraph:
    """Symmetrized k-nearest-neighbor graph in standardized input space.

    Exact distance ties are broken toward smaller point index, so duplicate
    points yield a deterministic graph.
    """
    n = ds.n
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the number of points n={n}")

    tree = cKDTree(ds.inputs)
    m = min(n, k + 1 + _TIE_SLACK)  # +1 for the query point itself
    dist, idx = tree.query(ds.inputs, k=m)
    knn = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        cand_d, cand_i = dist[i], idx[i]
        keep = cand_i != i
        cand_d, cand_i = cand_d[keep], cand_i[keep]
        order = np.lexsort((cand_i, cand_d))
        knn[i] = cand_i[order[:k]]

    src = np.repeat(np.arange(n), k)
    dst = knn.ravel()
    u = np.minimum(src, dst)
    v = np.maximum(src, dst)
    edges = np.unique(np.stack([u, v], axis=1), axis=0)
    return NeighborhoodGraph(k=k, knn=knn, edges=edges)


def compute_flow(ds: Dataset, g: NeighborhoodGraph) -> FlowAssignment:
    """Trace every point to its maximum and minimum along the graph.

    One step moves to the neighbor with the largest difference quotient
    (f(q) - f(p)) / |q - p| among strictly higher neighbors (strictly lower
    for descent); exact quotient ties go to the smaller neighbor index. A
    point with no strictly higher (lower) neighbor is a maximum (minimum).
    """
    f = ds.f
    n = ds.n
    eu, ev = g.directed()
    delta = ds.inputs[ev] - ds.inputs[eu]
    d = np.sqrt((delta * delta).sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = (f[ev] - f[eu]) / d

    next_up = _steepest_step(eu, ev, quot, f[ev] > f[eu], n)
    next_dn = _steepest_step(eu, ev, -quot, f[ev] < f[eu], n)
    max_of = _follow(next_up)
    min_of = _follow(next_dn)
    maxima = np.flatnonzero(next_up == np.arange(n))
    minima = np.flatnonzero(next_dn == np.arange(n))
    return FlowAssignment(max_of=max_of, min_of=min_of, maxima=maxima, minima=minima)


def _steepest_step(eu, ev, score, valid, n):
    """Per source point, the valid target with maximal score (ties: smaller
    target index). Points with no valid target map to themselves."""
    su, sv, sc = eu[valid], ev[valid], score[valid]
    nxt = np.arange(n)
    if su.size == 0:
        return nxt
    order = np.lexsort((-sv, sc, su))
    su, sv = su[order], sv[order]
    last = np.r_[su[1:] != su[:-1], True]
    nxt[su[last]] = sv[last]
    return nxt


def _follow(nxt: np.ndarray) -> np.ndarray:
    """Resolve a step map to its fixpoints by pointer jumping."""
    t = nxt.copy()
    while True:
        t2 = t[t]
        if np.array_equal(t2, t):
            return t
        t = t2


def extract_base_partitions(flow: FlowAssignment) -> list[BasePartition]:
    """Group points by their (minimum, maximum) pair.

    Partitions come back ordered by key, so their list position is a stable
    handle for the cancellation sequence and the tree builder.
    """
    n = flow.max_of.shape[0]
    key = flow.min_of.astype(np.int64) * n + flow.max_of
    order = np.argsort(key, kind="stable")
    sorted_keys = key[order]
    starts = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    bounds = np.r_[starts, n]
    parts = []
    for s, e in zip(bounds[:-1], bounds[1:]):
        k = int(sorted_keys[s])
        parts.append(BasePartition(key=(k // n, k % n), points=np.sort(order[s:e])))
    return parts


class _SaddleSide:
    """Boundary saddles between regions of one extremum kind.

    Regions are induced by a per-point label array; the saddle of a label
    pair is the extremal edge value over the edges joining their regions.
    Recomputed from scratch whenever the labels change (the merge count is
    small compared to the edge count, and correctness is easier to see).
    """

    def __init__(self, edges, edge_value, labels, take_max: bool):
        self.eu = edges[:, 0]
        self.ev = edges[:, 1]
        self.edge_value = edge_value
        self.labels = labels
        self.take_max = take_max
        self._pairs = None

    def pairs(self) -> dict[tuple[int, int], float]:
        if self._pairs is None:
            self._pairs = self._recompute()
        return self._pairs

    def merge(self, dying: int, surviving: int):
        self.labels[self.labels == dying] = surviving
        self._pairs = None

    def _recompute(self):
        a = self.labels[self.eu]
        b = self.labels[self.ev]
        m = a != b
        if not m.any():
            return {}
        lo = np.minimum(a[m], b[m]).astype(np.int64)
        hi = np.maximum(a[m], b[m]).astype(np.int64)
        n = self.labels.shape[0]
        key = lo * n + hi
        w = self.edge_value[m]
        order = np.argsort(key)
        ks, ws = key[order], w[order]
        starts = np.flatnonzero(np.r_[True, ks[1:] != ks[:-1]])
        reduce = np.maximum.reduceat if self.take_max else np.minimum.reduceat
        saddles = reduce(ws, starts)
        return {
            (int(k // n), int(k % n)): float(s)
            for k, s in zip(ks[starts], saddles)
        }


def compute_cancellation_sequence(
    ds: Dataset,
    g: NeighborhoodGraph,
    flow: FlowAssignment,
    parts: list[BasePartition],
) -> CancellationSequence:
    """Cancel extrema pairwise in order of increasing persistence.

    For two adjacent maxima, the saddle value is the largest over their
    boundary edges of the lower endpoint value, and the persistence of the
    cancellation is (f(dying) - saddle) / range; minima are symmetric. The
    candidate with the smallest persistence is cancelled (ties: smaller
    dying index, then smaller surviving index, maxima before minima), its
    partitions merge with the survivor's same-other-extremum partitions or
    are relabeled, and the process repeats until one partition remains.
    The global minimum and maximum are never cancelled. If the graph is
    disconnected, the extrema remaining at the end are merged into the
    global ones at persistence 1.
    """
    if not parts:
        raise ValueError("need at least one base partition")
    f = ds.f
    n = ds.n
    frange = float(f.max() - f.min())
    global_max = int(np.argmax(f))
    global_min = int(np.argmin(f))

    edge_min = np.minimum(f[g.edges[:, 0]], f[g.edges[:, 1]])
    edge_max = np.maximum(f[g.edges[:, 0]], f[g.edges[:, 1]])
    max_side = _SaddleSide(g.edges, edge_min, flow.max_of.copy(), take_max=True)
    min_side = _SaddleSide(g.edges, edge_max, flow.min_of.copy(), take_max=False)

    alive: dict[tuple[int, int], int] = {p.key: h for h, p in enumerate(parts)}
    next_handle = len(parts)
    steps: list[CancellationStep] = []

    def normalized(raw: float) -> float:
        return raw / frange if frange > 0 else 0.0

    def candidates():
        found = []
        for side, kind, protected in (
            (max_side, MAX_MERGE, global_max),
            (min_side, MIN_MERGE, global_min),
        ):
            for (a, b), saddle in side.pairs().items():
                dying, surviving = _dying_of_pair(a, b, f, kind, protected)
                raw = f[dying] - saddle if kind == MAX_MERGE else saddle - f[dying]
                found.append((normalized(raw), dying, surviving, kind == MIN_MERGE, kind))
        return found

    def apply_cancellation(dying, surviving, kind, persistence):
        nonlocal next_handle
        side = max_side if kind == MAX_MERGE else min_side
        pos = 1 if kind == MAX_MERGE else 0  # slot of this kind within the key
        merges = []
        relabels = []
        for key in sorted(k for k in alive if k[pos] == dying):
            other = key[1 - pos]
            new_key = (other, surviving) if kind == MAX_MERGE else (surviving, other)
            h = alive.pop(key)
            if new_key in alive:
                partner = alive.pop(new_key)
                merged = next_handle
                next_handle += 1
                merges.append(MergeRecord(a=partner, b=h, new=merged, new_key=new_key))
                alive[new_key] = merged
            else:
                relabels.append((h, new_key))
                alive[new_key] = h
        side.merge(dying, surviving)
        steps.append(CancellationStep(
            persistence=persistence,
            dying_extremum=int(dying),
            surviving_extremum=int(surviving),
            kind=kind,
            merges=tuple(merges),
            relabels=tuple(relabels),
        ))

    while len(alive) > 1:
        cands = candidates()
        if not cands:
            _force_disconnected_merges(alive, f, global_max, global_min, apply_cancellation)
            break
        pers, dying, surviving, _, kind = min(cands)
        apply_cancellation(dying, surviving, kind, pers)

    final_handle = next(iter(alive.values()))
    return CancellationSequence(
        steps=tuple(steps),
        n_points=n,
        n_base=len(parts),
        value_range=frange,
        final_handle=final_handle,
    )


def _dying_of_pair(a, b, f, kind, protected):
    """Which extremum of an adjacent pair dies: the lower maximum (higher
    minimum); on exact value ties the protected global survives, otherwise
    the larger index dies."""
    fa, fb = f[a], f[b]
    if fa != fb:
        lower_dies = kind == MAX_MERGE
        a_dies = (fa < fb) == lower_dies
    elif a == protected:
        a_dies = False
    elif b == protected:
        a_dies = True
    else:
        a_dies = a > b
    return (a, b) if a_dies else (b, a)


def _force_disconnected_merges(alive, f, global_max, global_min, apply_cancellation):
    """Merge extrema stranded in separate graph components into the global
    pair at persistence 1."""
    for pos, kind, target in ((1, MAX_MERGE, global_max), (0, MIN_MERGE, global_min)):
        stranded = sorted({k[pos] for k in alive} - {target})
        for e in stranded:
            apply_cancellation(e, target, kind, 1.0)
