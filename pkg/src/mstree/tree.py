"""The partition merge tree: construction from a cancellation sequence,
point enumeration, icicle-style layout, cuts and selections, and derived
(reduced) trees that share the partition records.

A node's rectangle sits at its creation persistence and extends up to its
parent's creation level; horizontally it spans a contiguous range of the
global point enumeration, so the whole hierarchy needs O(n + p) storage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .msc import BasePartition, CancellationSequence

__all__ = [
    "Partition",
    "PartitionTree",
    "LayoutRect",
    "Selection",
    "TreeError",
    "build_tree",
    "layout_tree",
    "cut_at_persistence",
    "select_step_line",
    "validate_selection",
    "reduce_tree",
    "keep_min_points",
    "keep_min_lifespan",
    "keep_value_range",
]

ROOT_DESTRUCTION = 1.0  # a root rectangle extends to the top of the axis


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Immutable partition record, shared by every tree derived from the
    same decomposition. Wiring (parent/children) lives on the trees."""

    id: int
    persistence: float
    lo: int
    hi: int                       # half-open range into the point permutation
    min_ext: int
    max_ext: int
    extra_criticals: tuple[int, ...]  # associated critical points outside [lo, hi)

    @property
    def size(self) -> int:
        return self.hi - self.lo

    @property
    def exact_point_count(self) -> int:
        """Range size plus associated critical points living elsewhere."""
        return self.size + len(self.extra_criticals)


@dataclass(frozen=True)
class LayoutRect:
    node: int
    x: int
    width: int
    y: float
    height: float


@dataclass(frozen=True)
class Selection:
    nodes: frozenset[int]
    mode: str  # "global-line" | "step-line" | "discrete" | "non-consistent"


class PartitionTree:
    """A view over the shared partition collection.

    The original tree owns the records and the point permutation; reduced
    trees reference the same records with different parent/child wiring and
    carry a link to their source.
    """

    def __init__(self, partitions, root, permutation, parent, children, source=None):
        self.partitions: dict[int, Partition] = partitions
        self.root: int = root
        self.permutation: np.ndarray = permutation
        self._parent: dict[int, int | None] = parent
        self._children: dict[int, tuple[int, ...]] = children
        self.source: PartitionTree | None = source

    # -- structure ---------------------------------------------------------

    def __contains__(self, node: int) -> bool:
        return node in self._parent

    def __len__(self) -> int:
        return len(self._parent)

    def nodes(self) -> Iterable[int]:
        """Node ids in depth-first preorder."""
        return self._parent.keys()

    def node(self, node: int) -> Partition:
        self._check(node)
        return self.partitions[node]

    def parent_of(self, node: int) -> int | None:
        self._check(node)
        return self._parent[node]

    def children_of(self, node: int) -> tuple[int, ...]:
        self._check(node)
        return self._children[node]

    def is_leaf(self, node: int) -> bool:
        return not self.children_of(node)

    def leaves(self) -> list[int]:
        return [i for i in self.nodes() if not self._children[i]]

    def destruction_of(self, node: int) -> float:
        """Persistence level at which the node disappears (its parent's
        creation); the root never does within the [0, 1] axis."""
        p = self.parent_of(node)
        if p is None:
            return np.nextafter(ROOT_DESTRUCTION, np.inf)
        return self.partitions[p].persistence

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when a is a strict ancestor of b in this tree."""
        cur = self.parent_of(b)
        while cur is not None:
            if cur == a:
                return True
            cur = self._parent[cur]
        return False

    def point_ids(self, node: int) -> np.ndarray:
        """Original indices of the points in the node's range."""
        p = self.node(node)
        return self.permutation[p.lo:p.hi]

    def _check(self, node: int):
        if node not in self._parent:
            raise TreeError(f"unknown node id {node}")


def build_tree(parts: Sequence[BasePartition], seq: CancellationSequence) -> PartitionTree:
    """Replay a cancellation sequence over the base partitions.

    Leaves are the base partitions at persistence 0; every merge record
    creates one node whose persistence is the step's value. Relabels create
    no node. Ids are assigned in depth-first preorder from the root, and the
    point permutation enumerates points leaf by leaf in that order (original
    index order inside a leaf).
    """
    if not parts:
        raise TreeError("no base partitions")
    n = seq.n_points

    pers: dict[int, float] = {}
    key: dict[int, tuple[int, int]] = {}
    kids: dict[int, tuple[int, ...]] = {}
    points: dict[int, np.ndarray] = {}
    alive: set[int] = set()
    for h, p in enumerate(parts):
        pers[h] = 0.0
        key[h] = p.key
        kids[h] = ()
        points[h] = p.points
        alive.add(h)

    for step in seq.steps:
        for rec in step.merges:
            if rec.a not in alive or rec.b not in alive:
                raise TreeError(
                    f"inconsistent sequence: merge references unknown partition {rec}")
            pers[rec.new] = step.persistence
            key[rec.new] = rec.new_key
            kids[rec.new] = (rec.a, rec.b)
            alive.discard(rec.a)
            alive.discard(rec.b)
            alive.add(rec.new)
        for h, _ in step.relabels:
            if h not in alive:
                raise TreeError(f"inconsistent sequence: relabel of unknown partition {h}")

    if len(alive) != 1:
        raise TreeError(f"sequence does not replay to a single partition ({len(alive)} remain)")
    root_handle = alive.pop()

    # depth-first preorder ids, leaf-contiguous point ranges
    order: list[int] = []
    stack = [root_handle]
    while stack:
        h = stack.pop()
        order.append(h)
        stack.extend(reversed(kids[h]))
    ids = {h: i for i, h in enumerate(order)}

    permutation = np.empty(n, dtype=np.int64)
    lo: dict[int, int] = {}
    hi: dict[int, int] = {}
    cursor = 0
    for h in order:
        if not kids[h]:
            lo[h] = cursor
            cursor += points[h].shape[0]
            hi[h] = cursor
            permutation[lo[h]:hi[h]] = points[h]
    if cursor != n:
        raise TreeError(f"partitions cover {cursor} of {n} points")
    for h in reversed(order):
        if kids[h]:
            lo[h] = min(lo[c] for c in kids[h])
            hi[h] = max(hi[c] for c in kids[h])

    position = np.empty(n, dtype=np.int64)
    position[permutation] = np.arange(n)

    partitions: dict[int, Partition] = {}
    parent: dict[int, int | None] = {}
    children: dict[int, tuple[int, ...]] = {}
    for h in order:
        i = ids[h]
        mn, mx = key[h]
        extras = tuple(sorted({e for e in (mn, mx) if not lo[h] <= position[e] < hi[h]}))
        partitions[i] = Partition(
            id=i, persistence=pers[h], lo=lo[h], hi=hi[h],
            min_ext=mn, max_ext=mx, extra_criticals=extras)
        children[i] = tuple(ids[c] for c in kids[h])
        for c in kids[h]:
            parent[ids[c]] = i
    parent[ids[root_handle]] = None

    ordered_parent = {ids[h]: parent[ids[h]] for h in order}
    ordered_children = {ids[h]: children[ids[h]] for h in order}
    return PartitionTree(partitions, ids[root_handle], permutation,
                         ordered_parent, ordered_children)


def layout_tree(t: PartitionTree) -> list[LayoutRect]:
    """One rectangle per node: x/width from the point range, bottom edge at
    the creation persistence, top edge at the parent's creation level (the
    root extends to 1)."""
    rects = []
    for i in t.nodes():
        p = t.partitions[i]
        parent = t.parent_of(i)
        top = ROOT_DESTRUCTION if parent is None else t.partitions[parent].persistence
        rects.append(LayoutRect(node=i, x=p.lo, width=p.size,
                                y=p.persistence, height=top - p.persistence))
    return rects


def cut_at_persistence(t: PartitionTree, p: float) -> Selection:
    """All nodes alive at persistence level p: created at or below it and
    destroyed above it. On an original tree the result tiles [0, n)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"persistence threshold {p} outside [0, 1]")
    selected = []
    stack = [t.root]
    while stack:
        i = stack.pop()
        if t.partitions[i].persistence <= p:
            selected.append(i)
        else:
            stack.extend(t.children_of(i))
    return Selection(nodes=frozenset(selected), mode="global-line")


def select_step_line(t: PartitionTree, steps: Sequence[tuple[tuple[int, int], float]]) -> Selection:
    """Piecewise-constant persistence line: each step is ((lo, hi), level).

    The step intervals must tile [0, n). Per point column the line picks the
    unique node whose lifetime contains the level; where that would put an
    ancestor and its descendant in the selection together, the ancestor is
    pushed down to its children over the contested columns, so the result
    stays a tiling with no new partitions introduced.
    """
    n = t.permutation.shape[0]
    ordered = sorted(steps, key=lambda s: s[0][0])
    cursor = 0
    level = np.empty(n)
    for (lo, hi), lv in ordered:
        if lo != cursor or hi <= lo:
            raise TreeError(f"step intervals do not tile [0, {n})")
        if not 0.0 <= lv <= 1.0:
            raise ValueError(f"step level {lv} outside [0, 1]")
        level[lo:hi] = lv
        cursor = hi
    if cursor != n:
        raise TreeError(f"step intervals do not tile [0, {n})")

    sel = np.full(n, -1, dtype=np.int64)
    stack: list[tuple[int, np.ndarray]] = [(t.root, np.arange(n))]
    while stack:
        node, cols = stack.pop()
        p = t.partitions[node]
        here = level[cols] >= p.persistence
        sel[cols[here]] = node
        rest = cols[~here]
        if rest.size:
            for c in t.children_of(node):
                cp = t.partitions[c]
                sub = rest[(rest >= cp.lo) & (rest < cp.hi)]
                if sub.size:
                    stack.append((c, sub))

    # push conflicted ancestors down to their children until no selected
    # node is an ancestor of another
    while True:
        present = set(int(i) for i in np.unique(sel) if i >= 0)
        conflicted = set()
        for b in present:
            cur = t.parent_of(b)
            while cur is not None:
                if cur in present:
                    conflicted.add(cur)
                cur = t._parent[cur]
        if not conflicted:
            break
        moved = False
        for a in conflicted:
            for c in t.children_of(a):
                cp = t.partitions[c]
                cols = np.arange(cp.lo, cp.hi)
                mask = sel[cols] == a
                if mask.any():
                    sel[cols[mask]] = c
                    moved = True
        if not moved:
            break

    return Selection(nodes=frozenset(int(i) for i in np.unique(sel) if i >= 0),
                     mode="step-line")


def validate_selection(t: PartitionTree, nodes: Iterable[int], mode: str) -> Selection:
    """Check a node set against the rules of a selection mode.

    Every mode except "non-consistent" rejects selections containing an
    ancestor together with one of its descendants.
    """
    ids = frozenset(int(i) for i in nodes)
    for i in ids:
        t._check(i)
    if mode != "non-consistent":
        for b in ids:
            cur = t.parent_of(b)
            while cur is not None:
                if cur in ids:
                    raise TreeError(
                        f"ancestor-descendant pair ({cur}, {b}) not allowed in {mode} selection")
                cur = t._parent[cur]
    return Selection(nodes=ids, mode=mode)


KeepRule = Callable[[PartitionTree, int, int], bool]


def reduce_tree(t: PartitionTree, keep: KeepRule) -> PartitionTree:
    """Derived tree keeping the nodes where `keep(tree, node, new_parent)`
    is true; children of removed nodes reattach to their nearest kept
    ancestor. Removed leaves leave the bottom jagged: their points stay in
    the kept ancestor's range but no leaf node covers them. Partition
    records are shared, ids are preserved, and nothing about the source
    tree changes.
    """
    if not keep(t, t.root, t.root):
        raise TreeError("reduction would remove the root")

    parent: dict[int, int | None] = {t.root: None}
    children: dict[int, list[int]] = {t.root: []}
    stack: list[tuple[int, int]] = [(c, t.root) for c in reversed(t.children_of(t.root))]
    while stack:
        node, kept_ancestor = stack.pop()
        if keep(t, node, kept_ancestor):
            parent[node] = kept_ancestor
            children[kept_ancestor].append(node)
            children[node] = []
            kept_ancestor = node
        stack.extend((c, kept_ancestor) for c in reversed(t.children_of(node)))

    order = []
    stack = [t.root]
    while stack:
        i = stack.pop()
        order.append(i)
        stack.extend(reversed(children[i]))
    return PartitionTree(
        partitions=t.partitions,
        root=t.root,
        permutation=t.permutation,
        parent={i: parent[i] for i in order},
        children={i: tuple(children[i]) for i in order},
        source=t,
    )


def keep_min_points(threshold: int) -> KeepRule:
    """Drop partitions with fewer than `threshold` points."""
    return lambda t, node, _parent: node == t.root or t.partitions[node].size >= threshold


def keep_min_lifespan(threshold: float) -> KeepRule:
    """Drop partitions whose lifespan against their new parent is below
    `threshold` (lifespan is always relative to the resulting tree)."""
    def rule(t, node, new_parent):
        if node == t.root:
            return True
        span = t.partitions[new_parent].persistence - t.partitions[node].persistence
        return span >= threshold
    return rule


def keep_value_range(f: np.ndarray, lo: float, hi: float) -> KeepRule:
    """Keep partitions whose active-output values intersect [lo, hi];
    `f` is the active output column in original point order."""
    def rule(t, node, _parent):
        if node == t.root:
            return True
        vals = f[t.point_ids(node)]
        return bool((vals.max() >= lo) and (vals.min() <= hi))
    return rule
