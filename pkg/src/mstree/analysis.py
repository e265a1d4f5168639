"""The analysis bundle: dataset + trees + measure stores + projection
presets, the full pipeline driver, and lossless persistence to a versioned
JSON file."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

import numpy as np

from .dataset import Dataset, standardize
from .measures import (
    AttributeStore,
    decode_value,
    encode_value,
    register_regression_measures,
    register_structural_measures,
)
from .msc import (
    build_neighborhood_graph,
    compute_cancellation_sequence,
    compute_flow,
    extract_base_partitions,
)
from .projection import ProjectionSpec, default_spec
from .regression import RIDGE
from .tree import (
    PartitionTree,
    Partition,
    build_tree,
    keep_min_lifespan,
    keep_min_points,
    keep_value_range,
    reduce_tree,
)

__all__ = ["AnalysisParams", "AnalysisBundle", "AnalysisError",
           "save_analysis", "load_analysis", "analysis_bytes"]

ANALYSIS_FORMAT = "mstree-analysis"
ANALYSIS_VERSION = 1

ORIGINAL = "orig"


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisParams:
    k: int = 15
    model_kind: str = RIDGE
    ridge_lambda: float = 1.0
    bandwidth: float = 0.3
    curve_samples: int = 25


class AnalysisBundle:
    """Everything the explorer works with for one dataset.

    Derived trees are registered under fresh handles and always chain to
    the tree (and measure store) they were reduced from.
    """

    def __init__(self, dataset: Dataset, tree: PartitionTree, params: AnalysisParams):
        self.dataset = dataset
        self.params = params
        self.trees: dict[str, PartitionTree] = {ORIGINAL: tree}
        self.tree_sources: dict[str, str | None] = {ORIGINAL: None}
        store = AttributeStore(tree, dataset)
        register_structural_measures(store)
        register_regression_measures(
            store, kind=params.model_kind, ridge_lambda=params.ridge_lambda,
            bandwidth=params.bandwidth, curve_samples=params.curve_samples)
        self.stores: dict[str, AttributeStore] = {ORIGINAL: store}
        self.presets: dict[str, ProjectionSpec] = {"default": default_spec(dataset.d)}
        self.sequence = None  # transient: set by analyze(), not persisted
        self.reference_node: int | None = None

    # -- pipeline -----------------------------------------------------------

    @classmethod
    def analyze(cls, raw: Dataset, params: AnalysisParams = AnalysisParams(),
                measures: tuple[str, ...] = ()) -> "AnalysisBundle":
        """Standardize, decompose, build the tree, evaluate the requested
        measures over all nodes."""
        ds = standardize(raw)
        graph = build_neighborhood_graph(ds, params.k)
        flow = compute_flow(ds, graph)
        parts = extract_base_partitions(flow)
        seq = compute_cancellation_sequence(ds, graph, flow, parts)
        tree = build_tree(parts, seq)
        bundle = cls(ds, tree, params)
        bundle.sequence = seq
        for name in measures:
            bundle.stores[ORIGINAL].evaluate_all(name)
        return bundle

    def tree_of(self, handle: str) -> PartitionTree:
        if handle not in self.trees:
            raise AnalysisError(f"unknown tree handle {handle!r}")
        return self.trees[handle]

    def store_of(self, handle: str) -> AttributeStore:
        if handle not in self.stores:
            raise AnalysisError(f"unknown tree handle {handle!r}")
        return self.stores[handle]

    def reduce(self, handle: str = ORIGINAL, min_points: int | None = None,
               min_lifespan: float | None = None,
               value_range: tuple[float, float] | None = None) -> str:
        """Register a reduced tree derived from `handle`; returns its handle."""
        src = self.tree_of(handle)
        rules = []
        if min_points is not None:
            rules.append(keep_min_points(min_points))
        if min_lifespan is not None:
            rules.append(keep_min_lifespan(min_lifespan))
        if value_range is not None:
            rules.append(keep_value_range(self.dataset.f, *value_range))
        if not rules:
            raise AnalysisError("no reduction rule given")
        derived = reduce_tree(src, lambda t, n, p: all(r(t, n, p) for r in rules))
        new = f"r{len(self.trees)}"
        self.trees[new] = derived
        self.tree_sources[new] = handle
        self.stores[new] = self.stores[handle].derive(derived)
        return new

    def set_reference(self, node: int) -> None:
        """Make `node`'s model the reference for reference_fitness (resets
        that measure's cached values)."""
        model = self.stores[ORIGINAL].get("model", node)
        self.stores[ORIGINAL].set_param("reference_fitness", model)
        self.reference_node = node


# -- persistence ---------------------------------------------------------------


def _dataset_doc(ds: Dataset) -> dict:
    return {
        "dimNames": list(ds.dim_names),
        "outputNames": list(ds.output_names),
        "activeOutput": ds.active_output,
        "inputs": [[float(v) for v in row] for row in ds.inputs],
        "outputs": [[float(v) for v in row] for row in ds.outputs],
        "rawMeans": [float(v) for v in ds.raw_means],
        "rawScales": [float(v) for v in ds.raw_scales],
    }


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def dataset_hash(ds: Dataset) -> str:
    return hashlib.sha256(_canonical(_dataset_doc(ds)).encode()).hexdigest()


def _tree_doc(t: PartitionTree) -> dict:
    nodes = []
    for i in t.nodes():
        p = t.partitions[i]
        nodes.append({
            "id": p.id,
            "persistence": float(p.persistence),
            "lo": p.lo,
            "hi": p.hi,
            "minExt": p.min_ext,
            "maxExt": p.max_ext,
            "extras": list(p.extra_criticals),
            "parent": t.parent_of(i),
            "children": list(t.children_of(i)),
        })
    return {"root": t.root, "nodes": nodes}


def _cache_doc(store: AttributeStore) -> list[dict]:
    entries = []
    for (name, key, ph), value in store._cache.items():
        entries.append({"measure": name, "key": list(key), "param": ph,
                        "value": encode_value(value)})
    entries.sort(key=lambda e: (e["measure"], e["key"], e["param"] or ""))
    return entries


def analysis_bytes(bundle: AnalysisBundle) -> bytes:
    ds_doc = _dataset_doc(bundle.dataset)
    doc = {
        "format": ANALYSIS_FORMAT,
        "version": ANALYSIS_VERSION,
        "params": asdict(bundle.params),
        "dataset": ds_doc,
        "datasetHash": hashlib.sha256(_canonical(ds_doc).encode()).hexdigest(),
        "permutation": [int(i) for i in bundle.trees[ORIGINAL].permutation],
        "trees": {
            h: {"source": bundle.tree_sources[h], **_tree_doc(t)}
            for h, t in bundle.trees.items()
        },
        "caches": {h: _cache_doc(s) for h, s in bundle.stores.items()},
        "presets": {name: spec.to_dict() for name, spec in bundle.presets.items()},
    }
    return _canonical(doc).encode()


def save_analysis(bundle: AnalysisBundle, sink) -> None:
    data = analysis_bytes(bundle)
    if hasattr(sink, "write"):
        sink.write(data)
    else:
        with open(sink, "wb") as fh:
            fh.write(data)


def load_analysis(source) -> AnalysisBundle:
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)

    if doc.get("format") != ANALYSIS_FORMAT:
        raise AnalysisError("not an analysis file")
    if doc.get("version") != ANALYSIS_VERSION:
        raise AnalysisError(f"unsupported analysis version {doc.get('version')!r}")
    got = hashlib.sha256(_canonical(doc["dataset"]).encode()).hexdigest()
    if got != doc["datasetHash"]:
        raise AnalysisError("dataset hash mismatch: analysis file is corrupt")

    dd = doc["dataset"]
    ds = Dataset(
        inputs=np.asarray(dd["inputs"], dtype=float),
        outputs=np.asarray(dd["outputs"], dtype=float),
        active_output=dd["activeOutput"],
        dim_names=tuple(dd["dimNames"]),
        output_names=tuple(dd["outputNames"]),
        raw_means=np.asarray(dd["rawMeans"], dtype=float),
        raw_scales=np.asarray(dd["rawScales"], dtype=float),
    )
    params = AnalysisParams(**doc["params"])
    permutation = np.asarray(doc["permutation"], dtype=np.int64)

    records: dict[int, Partition] = {}
    for nd in doc["trees"][ORIGINAL]["nodes"]:
        records[nd["id"]] = Partition(
            id=nd["id"], persistence=nd["persistence"], lo=nd["lo"], hi=nd["hi"],
            min_ext=nd["minExt"], max_ext=nd["maxExt"],
            extra_criticals=tuple(nd["extras"]))

    def make_tree(tdoc, source_tree):
        parent = {nd["id"]: nd["parent"] for nd in tdoc["nodes"]}
        children = {nd["id"]: tuple(nd["children"]) for nd in tdoc["nodes"]}
        return PartitionTree(records, tdoc["root"], permutation, parent, children,
                             source=source_tree)

    trees: dict[str, PartitionTree] = {}
    sources: dict[str, str | None] = {h: t["source"] for h, t in doc["trees"].items()}
    pending = list(doc["trees"].items())
    while pending:
        rest = []
        for h, tdoc in pending:
            src = tdoc["source"]
            if src is None:
                trees[h] = make_tree(tdoc, None)
            elif src in trees:
                trees[h] = make_tree(tdoc, trees[src])
            else:
                rest.append((h, tdoc))
        if len(rest) == len(pending):
            raise AnalysisError("derived tree references a missing source tree")
        pending = rest

    bundle = AnalysisBundle(ds, trees[ORIGINAL], params)
    bundle.trees = trees
    bundle.tree_sources = sources
    root_store = bundle.stores[ORIGINAL]
    stores = {ORIGINAL: root_store}
    remaining = [h for h in trees if h != ORIGINAL]
    while remaining:
        rest = []
        for h in remaining:
            src = sources[h]
            if src in stores:
                stores[h] = stores[src].derive(trees[h])
            else:
                rest.append(h)
        remaining = rest
    bundle.stores = stores

    for h, entries in doc["caches"].items():
        store = stores[h]
        for e in entries:
            key = tuple(int(i) for i in e["key"])
            store._cache[(e["measure"], key, e["param"])] = decode_value(e["value"])

    bundle.presets = {name: ProjectionSpec.from_dict(sd)
                      for name, sd in doc["presets"].items()}
    return bundle
