"""Named attributes over tree nodes: lazy evaluation, caching, invalidation,
pair-keyed relative measures, and value reuse across derived trees.

A measure is a pure function of the tree (and the dataset) evaluated on
demand for a node or a node pair, with the result cached. Stores for
derived trees chain to their source's store: because node ids equal
partition ids everywhere, a value keyed by node (or by a node pair that
still exists) can be reused instead of recomputed.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .dataset import Dataset
from .regression import (
    DimModelVector,
    InverseCurve,
    LinearModel,
    RIDGE,
    cosine_similarity,
    dim_score_vector,
    fit_dim_models,
    fit_inverse_curve,
    fit_model,
    r2_score,
)
from .tree import PartitionTree

__all__ = [
    "MeasureDef",
    "MeasureError",
    "AttributeStore",
    "register_structural_measures",
    "register_regression_measures",
    "save_cache",
    "load_cache",
]

CACHE_FORMAT = "mstree-cache"
CACHE_VERSION = 1


class MeasureError(Exception):
    pass


@dataclass
class MeasureDef:
    """A measure definition.

    `compute(store, node)` for per-node measures, `compute(store, a, b)`
    for pair measures. `chainable` marks per-node measures that do not read
    the tree structure, so their values stay valid in derived trees; pair
    measures always chain on their own key. `param` is an optional
    parameter (bandwidth, reference model, ...) hashed into the cache key.
    """

    name: str
    compute: Callable[..., Any]
    pair: bool = False
    depends_on: tuple[str, ...] = ()
    chainable: bool = True
    param: Any = None


class AttributeStore:
    """Per-tree measure cache with a chain to the source tree's store.

    Concurrent `get` calls are safe in the get-or-compute sense: two racing
    computations may both run, but compute functions are pure so a single
    value wins harmlessly. Registration, parameter changes, and
    invalidation require exclusive access.
    """

    def __init__(self, tree: PartitionTree, dataset: Dataset,
                 chain: "AttributeStore | None" = None):
        self.tree = tree
        self.dataset = dataset
        self.chain = chain
        self._defs: dict[str, MeasureDef] = {}
        self._cache: dict[tuple, Any] = {}
        self.compute_count: Counter = Counter()
        self._dependents: list[AttributeStore] = []
        self._memo: dict = {}
        if chain is not None:
            chain._dependents.append(self)

    # -- definitions --------------------------------------------------------

    def resolve(self, name: str) -> tuple[MeasureDef, "AttributeStore"]:
        """The definition visible under `name` and the store that owns it."""
        st = self
        while st is not None:
            if name in st._defs:
                return st._defs[name], st
            st = st.chain
        raise MeasureError(f"unknown measure {name!r}")

    def measure(self, name: str) -> MeasureDef:
        return self.resolve(name)[0]

    def has_measure(self, name: str) -> bool:
        try:
            self.resolve(name)
            return True
        except MeasureError:
            return False

    def measure_names(self) -> list[str]:
        names = []
        st = self
        while st is not None:
            names.extend(n for n in st._defs if n not in names)
            st = st.chain
        return sorted(names)

    def register(self, mdef: MeasureDef, replace: bool = False):
        """Add a measure; replacing an existing one drops every cached value
        of it and of all measures that transitively depend on it."""
        exists = self.has_measure(mdef.name)
        if exists and not replace:
            raise MeasureError(f"measure {mdef.name!r} already registered")
        self._check_acyclic(mdef)
        if exists:
            self.invalidate(mdef.name)
        self._defs[mdef.name] = mdef

    def _check_acyclic(self, mdef: MeasureDef):
        defs = {n: self.measure(n) for n in self.measure_names()}
        defs[mdef.name] = mdef
        seen: set[str] = set()

        def visit(name: str, path: tuple[str, ...]):
            if name in path:
                cycle = " -> ".join(path[path.index(name):] + (name,))
                raise MeasureError(f"measure dependency cycle: {cycle}")
            if name in seen or name not in defs:
                return
            for dep in defs[name].depends_on:
                visit(dep, path + (name,))
            seen.add(name)

        visit(mdef.name, ())

    def set_param(self, name: str, param: Any):
        """Change a parameterized measure's parameter; an invalidation event."""
        mdef, owner = self.resolve(name)
        mdef.param = param
        owner.invalidate(name)

    def invalidate(self, name: str):
        """Clear cached values of `name` and of its transitive dependents,
        here and in every store derived from this one."""
        self._invalidate({name})

    def _invalidate(self, base: set[str]):
        # re-expand the dependency closure per store: derived stores may
        # carry local measures depending on the invalidated ones
        targets = set(base)
        grew = True
        names = self.measure_names()
        while grew:
            grew = False
            for other in names:
                if other in targets:
                    continue
                if targets & set(self.measure(other).depends_on):
                    targets.add(other)
                    grew = True
        for key in [k for k in self._cache if k[0] in targets]:
            del self._cache[key]
        for dep in self._dependents:
            dep._invalidate(targets)

    # -- evaluation ----------------------------------------------------------

    def get(self, name: str, node: int, node2: int | None = None) -> Any:
        """Cached-or-computed value of a measure for a node (or node pair).

        Lookup order: this store's cache, then the chain (for pair measures
        and structure-independent node measures), then compute and cache.
        """
        mdef, owner = self.resolve(name)
        if mdef.pair:
            if node2 is None:
                raise MeasureError(f"measure {name!r} needs a node pair")
            key = (int(node), int(node2))
        else:
            if node2 is not None:
                raise MeasureError(f"measure {name!r} takes a single node")
            key = (int(node),)
        for i in key:
            if i not in self.tree:
                raise MeasureError(f"unknown node {i}")
        ck = (name, key, param_hash(mdef.param))
        if ck in self._cache:
            return self._cache[ck]
        if mdef.pair or mdef.chainable:
            st = self.chain
            while st is not None:
                if ck in st._cache:
                    return st._cache[ck]
                if st is owner:
                    break
                st = st.chain
        value = mdef.compute(self, *key)
        self._cache[ck] = value
        self.compute_count[name] += 1
        return value

    def evaluate_all(self, name: str) -> dict[int, Any]:
        """The measure over every node of this store's tree, in node order."""
        return {i: self.get(name, i) for i in self.tree.nodes()}

    def cached_entries(self, name: str | None = None) -> list[tuple]:
        """Cache keys, optionally restricted to one measure (introspection)."""
        return [k for k in self._cache if name is None or k[0] == name]

    def derive(self, tree: PartitionTree) -> "AttributeStore":
        """Store for a derived tree, chained to this one."""
        return AttributeStore(tree, self.dataset, chain=self)

    def node_points(self, node: int) -> tuple[np.ndarray, np.ndarray]:
        """(inputs, active output) over the node's point range."""
        ids = self.tree.point_ids(node)
        return self.dataset.inputs[ids], self.dataset.f[ids]


# -- value serialization -----------------------------------------------------


def encode_value(v: Any) -> Any:
    if isinstance(v, LinearModel):
        return {"__t__": "model", **v.to_dict()}
    if isinstance(v, DimModelVector):
        return {"__t__": "dim_models", "models": [m.to_dict() for m in v.models]}
    if isinstance(v, InverseCurve):
        return {"__t__": "curve", **v.to_dict()}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if not np.isfinite(v):
            return {"__t__": "f", "v": repr(v)}
        return v
    if isinstance(v, np.integer):
        return int(v)
    if v is None or isinstance(v, (bool, int, str)):
        return v
    raise MeasureError(f"cannot serialize measure value of type {type(v).__name__}")


def decode_value(v: Any) -> Any:
    if isinstance(v, list):
        return tuple(decode_value(x) for x in v)
    if isinstance(v, dict):
        t = v.get("__t__")
        if t == "model":
            return LinearModel.from_dict(v)
        if t == "dim_models":
            return DimModelVector(tuple(LinearModel.from_dict(m) for m in v["models"]))
        if t == "curve":
            return InverseCurve.from_dict(v)
        if t == "f":
            return float(v["v"])
        raise MeasureError(f"cannot decode cache value {v!r}")
    return v


def param_hash(param: Any) -> str | None:
    if param is None:
        return None
    blob = json.dumps(encode_value(param), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def save_cache(store: AttributeStore, sink) -> None:
    """Write this store's cached values as versioned JSON. Measure functions
    are persisted by registered name only."""
    entries = []
    for (name, key, ph), value in store._cache.items():
        entries.append({
            "measure": name,
            "key": list(key),
            "param": ph,
            "value": encode_value(value),
        })
    entries.sort(key=lambda e: (e["measure"], e["key"], e["param"] or ""))
    doc = {"format": CACHE_FORMAT, "version": CACHE_VERSION, "entries": entries}
    _dump(doc, sink)


def load_cache(store: AttributeStore, source) -> None:
    """Load cached values saved by `save_cache`. Every measure named in the
    file must already be registered."""
    doc = _load(source)
    if doc.get("format") != CACHE_FORMAT:
        raise MeasureError("not a measure cache file")
    if doc.get("version") != CACHE_VERSION:
        raise MeasureError(f"unsupported cache version {doc.get('version')!r}")
    for e in doc["entries"]:
        name = e["measure"]
        if not store.has_measure(name):
            raise MeasureError(f"unknown measure {name!r} in cache file")
        key = tuple(int(i) for i in e["key"])
        store._cache[(name, key, e["param"])] = decode_value(e["value"])


def _dump(doc, sink):
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(source):
    if hasattr(source, "read"):
        return json.load(source)
    with open(source, "r", encoding="utf-8") as fh:
        return json.load(fh)


# -- builtin measures ---------------------------------------------------------


def register_structural_measures(store: AttributeStore) -> None:
    """Lifespan, value extrema, normalized size, and shared-extremum ids.

    Lifespan reads the parent, so it is routed through a pair measure keyed
    (parent, node); the per-node wrapper is structure-dependent and never
    reused across trees, while the pair values chain soundly.
    """

    def lifespan_pair(s, p, n):
        parts = s.tree.partitions
        if p == n:  # root: extends to the top of the persistence axis
            return 1.0 - parts[n].persistence
        return parts[p].persistence - parts[n].persistence

    def lifespan(s, n):
        p = s.tree.parent_of(n)
        return s.get("lifespan_pair", n if p is None else p, n)

    def min_value(s, n):
        return float(s.dataset.f[s.tree.point_ids(n)].min())

    def max_value(s, n):
        return float(s.dataset.f[s.tree.point_ids(n)].max())

    def size_norm(s, n):
        return s.tree.partitions[n].size / s.dataset.n

    def shared_id(which):
        def compute(s, n):
            memo_key = ("shared-ids", which)
            ids = s._memo.get(memo_key)
            if ids is None:
                distinct = {getattr(p, which) for p in s.tree.partitions.values()}
                ids = {e: r for r, e in enumerate(sorted(distinct))}
                s._memo[memo_key] = ids
            return ids[getattr(s.tree.partitions[n], which)]
        return compute

    store.register(MeasureDef("lifespan_pair", lifespan_pair, pair=True))
    store.register(MeasureDef("lifespan", lifespan, chainable=False,
                              depends_on=("lifespan_pair",)))
    store.register(MeasureDef("min_value", min_value))
    store.register(MeasureDef("max_value", max_value))
    store.register(MeasureDef("size_norm", size_norm))
    store.register(MeasureDef("shared_min_id", shared_id("min_ext")))
    store.register(MeasureDef("shared_max_id", shared_id("max_ext")))


def register_regression_measures(store: AttributeStore, kind: str = RIDGE,
                                 ridge_lambda: float = 1.0, bandwidth: float = 0.3,
                                 curve_samples: int = 25) -> None:
    """The model measure and everything defined on top of it.

    fitness(n) is the node's own model scored on its own points;
    parent_fitness(n) scores the parent's model on the node's points and
    child_fitness(n) the node's model on the parent's points. All three go
    through the pair measure relative_fitness so cross-evaluations are
    cached by (model node, data node) and survive tree reduction. The
    dimension measures do the same per input dimension and compare score
    vectors by cosine similarity. reference_fitness scores a user-chosen
    reference model (a parameter) on each node.
    """

    def model(s, n):
        k, lam = s.measure("model").param
        return fit_model(*s.node_points(n), kind=k, ridge_lambda=lam)

    def dim_models(s, n):
        k, lam = s.measure("dim_models").param
        return fit_dim_models(*s.node_points(n), kind=k, ridge_lambda=lam)

    def relative_fitness(s, model_node, data_node):
        m = s.get("model", model_node)
        return r2_score(m, *s.node_points(data_node))

    def fitness(s, n):
        return s.get("relative_fitness", n, n)

    def parent_fitness(s, n):
        p = s.tree.parent_of(n)
        return None if p is None else s.get("relative_fitness", p, n)

    def child_fitness(s, n):
        p = s.tree.parent_of(n)
        return None if p is None else s.get("relative_fitness", n, p)

    def relative_dim(s, model_node, data_node):
        models = s.get("dim_models", model_node)
        return tuple(float(v) for v in
                     dim_score_vector(models, *s.node_points(data_node)))

    def child_dim_fitness(s, n):
        p = s.tree.parent_of(n)
        if p is None:
            return None
        return cosine_similarity(s.get("relative_dim", n, n),
                                 s.get("relative_dim", n, p))

    def reference_fitness(s, n):
        ref = s.measure("reference_fitness").param
        if ref is None:
            raise MeasureError("no reference model set")
        return r2_score(ref, *s.node_points(n))

    def curve(s, n):
        h, m = s.measure("curve").param
        return fit_inverse_curve(*s.node_points(n), bandwidth=h, samples=m)

    store.register(MeasureDef("model", model, param=(kind, float(ridge_lambda))))
    store.register(MeasureDef("dim_models", dim_models, param=(kind, float(ridge_lambda))))
    store.register(MeasureDef("relative_fitness", relative_fitness, pair=True,
                              depends_on=("model",)))
    store.register(MeasureDef("fitness", fitness, depends_on=("relative_fitness",)))
    store.register(MeasureDef("parent_fitness", parent_fitness, chainable=False,
                              depends_on=("relative_fitness",)))
    store.register(MeasureDef("child_fitness", child_fitness, chainable=False,
                              depends_on=("relative_fitness",)))
    store.register(MeasureDef("relative_dim", relative_dim, pair=True,
                              depends_on=("dim_models",)))
    store.register(MeasureDef("child_dim_fitness", child_dim_fitness, chainable=False,
                              depends_on=("relative_dim",)))
    store.register(MeasureDef("reference_fitness", reference_fitness, param=None))
    store.register(MeasureDef("curve", curve, param=(float(bandwidth), int(curve_samples))))
