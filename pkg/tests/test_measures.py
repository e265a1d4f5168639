import io

import numpy as np
import pytest

from conftest import make_dataset, pipeline
from mstree.dataset import standardize
from mstree.measures import (
    AttributeStore,
    MeasureDef,
    MeasureError,
    load_cache,
    register_regression_measures,
    register_structural_measures,
    save_cache,
)
from mstree.regression import LinearModel
from mstree.synthetic import sample_four_bumps
from mstree.tree import keep_min_points, reduce_tree


@pytest.fixture()
def store(quad_pipeline, quad_dataset):
    ds, g, flow, parts, seq, tree = quad_pipeline
    s = AttributeStore(tree, ds)
    register_structural_measures(s)
    register_regression_measures(s, kind="ridge", ridge_lambda=1.0)
    return s


FIT_MEASURES = ("model", "dim_models", "relative_fitness", "relative_dim", "fitness")


def fit_computes(*stores):
    """Model-fit work across stores; the cheap structure-dependent wrappers
    (parent_fitness etc.) recompute per tree by design and are not counted."""
    return sum(s.compute_count[name] for s in stores for name in FIT_MEASURES)


# -- caching -----------------------------------------------------------------

def test_value_computed_once(store):
    root = store.tree.root
    v1 = store.get("lifespan", root)
    count = dict(store.compute_count)
    v2 = store.get("lifespan", root)
    assert v1 == v2
    assert dict(store.compute_count) == count


def test_pair_measure_cached_by_pair(store):
    t = store.tree
    leaf = t.leaves()[0]
    parent = t.parent_of(leaf)
    a = store.get("relative_fitness", parent, leaf)
    n_before = store.compute_count["relative_fitness"]
    b = store.get("relative_fitness", parent, leaf)
    assert a == b
    assert store.compute_count["relative_fitness"] == n_before
    # the swapped pair is a different key
    store.get("relative_fitness", leaf, parent)
    assert store.compute_count["relative_fitness"] == n_before + 1


def test_unknown_measure_and_node(store):
    with pytest.raises(MeasureError, match="unknown measure"):
        store.get("nope", store.tree.root)
    with pytest.raises(MeasureError, match="unknown node"):
        store.get("lifespan", 999)


def test_register_requires_replace(store):
    with pytest.raises(MeasureError, match="already registered"):
        store.register(MeasureDef("fitness", lambda s, n: 0.0))


def test_cycle_detection(store):
    with pytest.raises(MeasureError, match="cycle"):
        store.register(MeasureDef("loop", lambda s, n: 0.0, depends_on=("loop",)))
    store.register(MeasureDef("a", lambda s, n: 0.0, depends_on=("b",)))
    with pytest.raises(MeasureError, match="cycle"):
        store.register(MeasureDef("b", lambda s, n: 0.0, depends_on=("a",)))


def test_replacing_model_invalidates_dependents(store):
    t = store.tree
    store.evaluate_all("fitness")
    store.evaluate_all("child_dim_fitness")
    assert store.cached_entries("fitness")
    store.register(MeasureDef(
        "model",
        lambda s, n: LinearModel(np.zeros(s.dataset.d), 0.0, "ols", 0.0),
        param=None), replace=True)
    # model and its transitive dependents cleared, unrelated measures kept
    for name in ("model", "relative_fitness", "fitness", "parent_fitness", "child_fitness"):
        assert not store.cached_entries(name), name
    assert store.cached_entries("relative_dim")  # depends on dim_models, not model
    assert store.cached_entries("child_dim_fitness")
    # recomputation now uses the replacement
    zero_fit = store.get("fitness", t.leaves()[0])
    assert zero_fit <= 0.0


def test_invalidation_closure_exact(store):
    store.evaluate_all("lifespan")
    store.evaluate_all("size_norm")
    store.invalidate("lifespan_pair")
    assert not store.cached_entries("lifespan_pair")
    assert not store.cached_entries("lifespan")
    assert store.cached_entries("size_norm")


# -- parameterized measures -----------------------------------------------------

def test_reference_fitness_requires_reference(store):
    with pytest.raises(MeasureError, match="no reference model"):
        store.get("reference_fitness", store.tree.root)


def test_reference_change_is_invalidation_event(store):
    t = store.tree
    node = t.leaves()[0]
    ref = store.get("model", node)
    store.set_param("reference_fitness", ref)
    assert store.get("reference_fitness", node) == pytest.approx(
        store.get("fitness", node), abs=1e-12)
    first = store.compute_count["reference_fitness"]
    store.set_param("reference_fitness", store.get("model", t.root))
    assert not store.cached_entries("reference_fitness")
    store.get("reference_fitness", node)
    assert store.compute_count["reference_fitness"] == first + 1


def test_curve_parameter_in_cache_key(store):
    node = store.tree.root
    store.get("curve", node)
    store.set_param("curve", (0.5, 7))
    c = store.get("curve", node)
    assert c.levels.shape == (7,)
    assert store.compute_count["curve"] == 2


# -- structural builtins ----------------------------------------------------------

def test_structural_measures(store):
    t = store.tree
    root = t.root
    assert store.get("size_norm", root) == 1.0
    for leaf in t.leaves():
        assert store.get("lifespan", leaf) == t.node(t.parent_of(leaf)).persistence
    f = store.dataset.f
    assert store.get("min_value", root) == f.min()
    assert store.get("max_value", root) == f.max()


def test_shared_extremum_ids(store):
    t = store.tree
    # dense ids reproduce equality of the underlying extremum indices
    by_max = {}
    for i in t.nodes():
        by_max.setdefault(t.node(i).max_ext, set()).add(store.get("shared_max_id", i))
    assert all(len(v) == 1 for v in by_max.values())
    assert set().union(*by_max.values()) == set(range(len(by_max)))
    # the two leaves that keep the surviving maximum share its id
    keep = [i for i in t.nodes() if t.node(i).max_ext == 0]
    ids = {store.get("shared_max_id", i) for i in keep}
    assert len(ids) == 1


# -- chaining across derived trees ---------------------------------------------------

def test_chain_reuses_preserved_parent_pairs():
    ds = standardize(sample_four_bumps(800, seed=21))
    tree = pipeline(ds)[4]
    store = AttributeStore(tree, ds)
    register_structural_measures(store)
    register_regression_measures(store)
    store.evaluate_all("fitness")
    store.evaluate_all("parent_fitness")

    derived = reduce_tree(tree, keep_min_points(10))
    assert len(derived) < len(tree)
    dstore = store.derive(derived)
    before = fit_computes(store, dstore)
    for i in derived.nodes():
        dstore.get("fitness", i)
        if derived.parent_of(i) == tree.parent_of(i):  # preserved pair
            dstore.get("parent_fitness", i)
    assert fit_computes(store, dstore) == before


def test_chain_recomputes_new_pairs():
    ds = standardize(sample_four_bumps(800, seed=22))
    tree = pipeline(ds)[4]
    store = AttributeStore(tree, ds)
    register_structural_measures(store)
    register_regression_measures(store)
    store.evaluate_all("parent_fitness")

    # dropping short-lived internal nodes reattaches their children higher up
    from mstree.tree import keep_min_lifespan
    derived = reduce_tree(tree, keep_min_lifespan(0.02))
    dstore = store.derive(derived)
    rewired = [i for i in derived.nodes()
               if i != derived.root and derived.parent_of(i) != tree.parent_of(i)]
    assert rewired, "reduction should reattach at least one node"
    before = dstore.compute_count["relative_fitness"]
    for i in rewired:
        dstore.get("parent_fitness", i)
    assert dstore.compute_count["relative_fitness"] == before + len(rewired)
    assert dstore.compute_count["model"] == 0  # models all chained


def test_single_child_degenerate_parent_equals_fitness():
    # a derived node whose only child covers the same points: parent and
    # child fitness both equal plain fitness on those points
    ds = standardize(sample_four_bumps(400, seed=23))
    tree = pipeline(ds)[4]
    # find an internal node and drop its sibling-less chain: reduce keeping
    # one leaf's ancestry only is artificial, so instead compare on any
    # parent/child pair with identical ranges after reduction
    store = AttributeStore(tree, ds)
    register_regression_measures(store)
    derived = reduce_tree(tree, keep_min_points(2))
    dstore = store.derive(derived)
    same = [i for i in derived.nodes() if i != derived.root
            and derived.node(derived.parent_of(i)).lo == derived.node(i).lo
            and derived.node(derived.parent_of(i)).hi == derived.node(i).hi]
    for i in same:
        assert dstore.get("parent_fitness", i) == pytest.approx(
            dstore.get("fitness", i), abs=1e-12)


def test_invalidation_reaches_derived_local_dependents():
    ds = standardize(sample_four_bumps(300, seed=1))
    tree = pipeline(ds)[4]
    store = AttributeStore(tree, ds)
    register_regression_measures(store)
    derived = reduce_tree(tree, keep_min_points(3))
    dstore = store.derive(derived)
    dstore.register(MeasureDef("local_sq", lambda s, n: s.get("fitness", n) ** 2,
                               depends_on=("fitness",)))
    dstore.get("local_sq", derived.root)
    assert dstore.cached_entries("local_sq")
    store.set_param("model", ("ols", 0.0))  # invalidates fitness everywhere
    assert not dstore.cached_entries("local_sq")


def test_lifespan_recomputed_in_derived_tree(store):
    t = store.tree
    middle = t.children_of(t.root)[0]
    derived = reduce_tree(t, lambda tree, node, parent: node != middle)
    dstore = store.derive(derived)
    for c in t.children_of(middle):
        expect = t.node(t.root).persistence - t.node(c).persistence
        assert dstore.get("lifespan", c) == pytest.approx(expect, abs=1e-15)


# -- persistence ---------------------------------------------------------------------

def test_cache_round_trip(store):
    t = store.tree
    store.evaluate_all("fitness")
    assert len(store.cached_entries("fitness")) == len(t)
    buf = io.StringIO()
    save_cache(store, buf)

    fresh = AttributeStore(t, store.dataset)
    register_structural_measures(fresh)
    register_regression_measures(fresh)
    load_cache(fresh, io.StringIO(buf.getvalue()))
    assert set(fresh.cached_entries()) == set(store.cached_entries())
    for i in t.nodes():
        fresh.get("fitness", i)
    assert sum(fresh.compute_count.values()) == 0


def test_cache_file_lists_exactly_evaluated_fitness_entries(store):
    nodes = list(store.tree.nodes())
    for i in nodes:
        store.get("fitness", i)
    buf = io.StringIO()
    save_cache(store, buf)
    import json
    doc = json.loads(buf.getvalue())
    fitness_entries = [e for e in doc["entries"] if e["measure"] == "fitness"]
    assert len(fitness_entries) == len(nodes)


def test_cache_load_unknown_measure(store):
    store.get("fitness", store.tree.root)
    buf = io.StringIO()
    save_cache(store, buf)
    fresh = AttributeStore(store.tree, store.dataset)
    register_structural_measures(fresh)  # regression measures missing
    with pytest.raises(MeasureError, match="unknown measure 'fitness'"):
        load_cache(fresh, io.StringIO(buf.getvalue()))


def test_cache_version_mismatch(store):
    import json
    buf = io.StringIO()
    save_cache(store, buf)
    doc = json.loads(buf.getvalue())
    doc["version"] = 99
    with pytest.raises(MeasureError, match="version"):
        load_cache(store, io.StringIO(json.dumps(doc)))


def test_cache_preserves_non_finite_and_blob_values(store):
    t = store.tree
    store.register(MeasureDef("always_bad", lambda s, n: float("-inf")))
    store.get("always_bad", t.root)
    store.get("model", t.root)
    store.get("curve", t.root)
    buf = io.StringIO()
    save_cache(store, buf)
    fresh = AttributeStore(t, store.dataset)
    register_structural_measures(fresh)
    register_regression_measures(fresh)
    fresh.register(MeasureDef("always_bad", lambda s, n: 0.0))
    load_cache(fresh, io.StringIO(buf.getvalue()))
    assert fresh.get("always_bad", t.root) == float("-inf")
    m = fresh.get("model", t.root)
    assert np.allclose(m.coefficients, store.get("model", t.root).coefficients)
