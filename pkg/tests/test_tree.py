import numpy as np
import pytest

from conftest import make_dataset, pipeline
from mstree.dataset import standardize
from mstree.msc import BasePartition, CancellationSequence, CancellationStep, MergeRecord
from mstree.synthetic import random_smooth_dataset, sample_four_bumps
from mstree.tree import (
    TreeError,
    build_tree,
    cut_at_persistence,
    keep_min_lifespan,
    keep_min_points,
    layout_tree,
    reduce_tree,
    select_step_line,
    validate_selection,
)


def hand_sequence():
    """Four base partitions; one max cancellation merging two pairs at once,
    then a min cancellation joining the survivors into the root."""
    parts = [
        BasePartition(key=(2, 0), points=np.array([0, 2, 4])),
        BasePartition(key=(2, 1), points=np.array([1, 6])),
        BasePartition(key=(3, 0), points=np.array([3, 5])),
        BasePartition(key=(3, 1), points=np.array([7])),
    ]
    steps = (
        CancellationStep(
            persistence=0.4, dying_extremum=1, surviving_extremum=0, kind="max-merge",
            merges=(MergeRecord(a=0, b=1, new=4, new_key=(2, 0)),
                    MergeRecord(a=2, b=3, new=5, new_key=(3, 0))),
            relabels=()),
        CancellationStep(
            persistence=0.7, dying_extremum=3, surviving_extremum=2, kind="min-merge",
            merges=(MergeRecord(a=4, b=5, new=6, new_key=(2, 0)),),
            relabels=()),
    )
    seq = CancellationSequence(steps=steps, n_points=8, n_base=4,
                               value_range=4.4, final_handle=6)
    return parts, seq


def single_partition_tree(n=10):
    parts = [BasePartition(key=(0, n - 1), points=np.arange(n))]
    seq = CancellationSequence(steps=(), n_points=n, n_base=1,
                               value_range=1.0, final_handle=0)
    return build_tree(parts, seq)


@pytest.fixture(scope="module")
def double_merge_tree():
    return build_tree(*hand_sequence())


@pytest.fixture(scope="module")
def random_trees():
    trees = []
    for seed in range(8):
        ds = standardize(random_smooth_dataset(200, 2, seed=seed))
        trees.append(pipeline(ds)[4])
    return trees


# -- construction ---------------------------------------------------------------

def test_empty_sequence_single_node():
    t = single_partition_tree()
    assert len(t) == 1
    p = t.node(t.root)
    assert p.persistence == 0.0 and (p.lo, p.hi) == (0, 10)


def test_double_merge_replay_structure(double_merge_tree):
    t = double_merge_tree
    assert len(t) == 7
    root = t.root
    assert root == 0  # depth-first ids start at the root
    mergers = t.children_of(root)
    assert len(mergers) == 2
    # the two base partitions keyed with each minimum share a parent
    by_key = {(t.node(i).min_ext, t.node(i).max_ext): i for i in t.leaves()}
    assert t.parent_of(by_key[(2, 0)]) == t.parent_of(by_key[(2, 1)])
    assert t.parent_of(by_key[(3, 0)]) == t.parent_of(by_key[(3, 1)])
    assert t.parent_of(by_key[(2, 0)]) != t.parent_of(by_key[(3, 0)])
    persistences = {t.node(i).persistence for i in mergers}
    assert persistences == {0.4}
    assert t.node(root).persistence == 0.7


def test_leaf_ranges_tile_against_point_sets():
    ds = standardize(random_smooth_dataset(150, 1, seed=4))
    g, flow, parts, seq, t = pipeline(ds, k=4)
    seen = np.concatenate([t.point_ids(i) for i in t.leaves()])
    assert sorted(seen.tolist()) == list(range(150))
    # each leaf's range recovers exactly its base partition point set
    by_key = {p.key: set(p.points.tolist()) for p in parts}
    for i in t.leaves():
        node = t.node(i)
        assert set(t.point_ids(i).tolist()) == by_key[(node.min_ext, node.max_ext)]


def test_permutation_bijective(random_trees):
    for t in random_trees:
        n = t.permutation.shape[0]
        assert sorted(t.permutation.tolist()) == list(range(n))


def test_children_tile_parent(random_trees):
    for t in random_trees:
        for i in t.nodes():
            kids = t.children_of(i)
            if not kids:
                continue
            p = t.node(i)
            spans = sorted((t.node(c).lo, t.node(c).hi) for c in kids)
            assert spans[0][0] == p.lo and spans[-1][1] == p.hi
            for (a, b), (c, d) in zip(spans, spans[1:]):
                assert b == c


def test_nodes_store_ranges_not_point_lists(random_trees):
    t = random_trees[0]
    for p in t.partitions.values():
        for v in vars(p).values():
            assert not isinstance(v, (np.ndarray, list, set))


def test_inconsistent_sequence_raises():
    parts, seq = hand_sequence()
    bad = CancellationSequence(
        steps=(CancellationStep(0.4, 1, 0, "max-merge",
                                (MergeRecord(a=0, b=99, new=4, new_key=(2, 0)),), ()),),
        n_points=8, n_base=4, value_range=1.0, final_handle=4)
    with pytest.raises(TreeError, match="unknown partition"):
        build_tree(parts, bad)


def test_extra_criticals_counted_not_contained(double_merge_tree):
    t = double_merge_tree
    for i in t.nodes():
        p = t.node(i)
        pos = {int(x): k for k, x in enumerate(t.permutation)}
        for e in p.extra_criticals:
            assert not p.lo <= pos[e] < p.hi
        assert p.exact_point_count == p.size + len(p.extra_criticals)


# -- layout ----------------------------------------------------------------------

def test_single_node_layout():
    t = single_partition_tree(12)
    (r,) = layout_tree(t)
    assert (r.x, r.width, r.y, r.height) == (0, 12, 0.0, 1.0)


def test_parent_width_is_sum_of_children(double_merge_tree):
    rects = {r.node: r for r in layout_tree(double_merge_tree)}
    t = double_merge_tree
    for i in t.nodes():
        kids = t.children_of(i)
        if kids:
            assert rects[i].width == sum(rects[c].width for c in kids)


def test_layout_parent_bottom_meets_child_top(random_trees):
    for t in random_trees:
        rects = {r.node: r for r in layout_tree(t)}
        for i in t.nodes():
            parent = t.parent_of(i)
            if parent is not None:
                assert rects[i].y + rects[i].height == rects[parent].y
        assert rects[t.root].y + rects[t.root].height == 1.0


# -- cuts and selections -----------------------------------------------------------

def test_cut_at_zero_is_leaves(random_trees):
    for t in random_trees:
        assert cut_at_persistence(t, 0.0).nodes == frozenset(t.leaves())


def test_cut_at_one_is_root(random_trees):
    for t in random_trees:
        assert cut_at_persistence(t, 1.0).nodes == {t.root}


def test_cut_matches_linear_scan_oracle(random_trees):
    rng = np.random.default_rng(0)
    for t in random_trees:
        n = t.permutation.shape[0]
        for p in rng.uniform(0, 1, size=100):
            got = cut_at_persistence(t, p).nodes
            expect = {i for i in t.nodes()
                      if t.node(i).persistence <= p < t.destruction_of(i)}
            assert got == expect
            spans = sorted((t.node(i).lo, t.node(i).hi) for i in got)
            assert spans[0][0] == 0 and spans[-1][1] == n
            assert all(b == c for (_, b), (c, _) in zip(spans, spans[1:]))


def test_cut_rejects_out_of_range(double_merge_tree):
    with pytest.raises(ValueError):
        cut_at_persistence(double_merge_tree, 1.5)


def test_step_line_single_step_equals_cut(random_trees):
    t = random_trees[0]
    n = t.permutation.shape[0]
    for level in (0.0, 0.3, 0.9):
        assert (select_step_line(t, [((0, n), level)]).nodes
                == cut_at_persistence(t, level).nodes)


def test_step_line_pushes_conflicted_ancestor_down():
    # two leaves under a root; a step at the root's level over the right
    # half conflicts with the left leaf and resolves to both leaves
    t = build_tree(*two_leaf_sequence())
    left, right = t.children_of(t.root)
    lo, hi = t.node(left).lo, t.node(left).hi
    n = t.permutation.shape[0]
    sel = select_step_line(t, [((0, hi), 0.0), ((hi, n), 1.0)])
    assert sel.nodes == {left, right}


def two_leaf_sequence():
    parts = [BasePartition(key=(0, 2), points=np.array([0, 1, 2])),
             BasePartition(key=(3, 2), points=np.array([3, 4]))]
    steps = (CancellationStep(0.5, 3, 0, "min-merge",
                              (MergeRecord(a=0, b=1, new=2, new_key=(0, 2)),), ()),)
    return parts, CancellationSequence(steps=steps, n_points=5, n_base=2,
                                       value_range=1.0, final_handle=2)


def test_step_line_staircase_tiles(random_trees):
    rng = np.random.default_rng(7)
    for t in random_trees[:4]:
        n = t.permutation.shape[0]
        cuts = sorted(rng.choice(np.arange(1, n), size=3, replace=False).tolist())
        bounds = [0, *cuts, n]
        steps = [((bounds[i], bounds[i + 1]), float(rng.uniform(0, 1)))
                 for i in range(len(bounds) - 1)]
        sel = select_step_line(t, steps)
        spans = sorted((t.node(i).lo, t.node(i).hi) for i in sel.nodes)
        assert spans[0][0] == 0 and spans[-1][1] == n
        assert all(b == c for (_, b), (c, _) in zip(spans, spans[1:]))
        validate_selection(t, sel.nodes, "discrete")  # antichain


def test_step_line_rejects_non_tiling(double_merge_tree):
    with pytest.raises(TreeError, match="tile"):
        select_step_line(double_merge_tree, [((0, 4), 0.5)])


def test_validate_selection_modes(double_merge_tree):
    t = double_merge_tree
    leaf = t.leaves()[0]
    parent = t.parent_of(leaf)
    with pytest.raises(TreeError, match="ancestor-descendant"):
        validate_selection(t, {leaf, parent}, "discrete")
    ok = validate_selection(t, {leaf, parent}, "non-consistent")
    assert ok.nodes == {leaf, parent}
    two = [i for i in t.leaves()][:2]
    assert validate_selection(t, two, "discrete").nodes == set(two)
    with pytest.raises(TreeError, match="unknown node"):
        validate_selection(t, {999}, "discrete")


# -- reduction ---------------------------------------------------------------------

def test_keep_all_reduction_is_identity(random_trees):
    t = random_trees[0]
    r = reduce_tree(t, lambda *_: True)
    assert list(r.nodes()) == list(t.nodes())
    assert all(r.parent_of(i) == t.parent_of(i) for i in t.nodes())
    assert r.source is t
    assert r.partitions is t.partitions


def test_remove_middle_of_chain_reattaches_to_grandparent(double_merge_tree):
    t = double_merge_tree
    middle = t.children_of(t.root)[0]
    r = reduce_tree(t, lambda tree, node, parent: node != middle)
    for c in t.children_of(middle):
        assert r.parent_of(c) == t.root
    assert middle not in r
    # records untouched
    assert r.node(t.children_of(middle)[0]) is t.node(t.children_of(middle)[0])


def test_min_points_filter_scan():
    ds = standardize(sample_four_bumps(5000, seed=2))
    t = pipeline(ds)[4]
    r = reduce_tree(t, keep_min_points(100))
    assert len(r) < len(t)
    for i in r.nodes():
        assert i == r.root or r.node(i).size >= 100
    # every surviving node still has its nearest surviving ancestor as parent
    for i in r.nodes():
        if i == r.root:
            continue
        cur = t.parent_of(i)
        while cur not in r:
            cur = t.parent_of(cur)
        assert r.parent_of(i) == cur


def test_min_lifespan_uses_new_parent():
    t = build_tree(*hand_sequence())
    # dropping intermediates by lifespan threshold measured against the
    # nearest kept ancestor (the root), not the original parent
    r = reduce_tree(t, keep_min_lifespan(0.35))
    for i in r.nodes():
        if i != r.root:
            span = r.node(r.parent_of(i)).persistence - r.node(i).persistence
            assert span >= 0.35


def test_reduce_never_removes_root(random_trees):
    with pytest.raises(TreeError, match="root"):
        reduce_tree(random_trees[0], lambda tree, node, parent: False)


def test_derived_tree_jagged_bottom_cut():
    t = build_tree(*hand_sequence())
    small_leaf = next(i for i in t.leaves() if t.node(i).size == 1)
    r = reduce_tree(t, lambda tree, node, parent: node != small_leaf)
    sel = cut_at_persistence(r, 0.0)
    assert small_leaf not in sel.nodes
    spans = sorted((r.node(i).lo, r.node(i).hi) for i in sel.nodes)
    covered = sum(b - a for a, b in spans)
    assert covered == t.permutation.shape[0] - 1  # one empty column


def test_node_ids_shared_across_derivation(random_trees):
    t = random_trees[1]
    r = reduce_tree(t, keep_min_points(5))
    for i in r.nodes():
        assert r.node(i).id == t.node(i).id == i
