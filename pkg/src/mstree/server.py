"""HTTP JSON API over an analysis bundle, consumed by the explorer UI.

All endpoints are pure functions of (bundle state, request); the only
mutable server-side state is the registry of derived trees, stored
projection presets, and the current reference node (reference fitness is a
parameterized measure evaluated server-side). Large point payloads are
column-oriented arrays.
"""

from __future__ import annotations

import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .analysis import ORIGINAL, AnalysisBundle, AnalysisError, dataset_hash
from .measures import MeasureError, encode_value
from .projection import ProjectionSpec
from .tree import layout_tree

__all__ = ["create_app", "serve"]


class TreeNodeOut(BaseModel):
    id: int
    parent: int | None
    persistence: float
    range: tuple[int, int]
    minExt: int
    maxExt: int
    extraCriticalCount: int
    exactPointCount: int
    children: list[int]


class TreeOut(BaseModel):
    handle: str
    root: int
    nodes: list[TreeNodeOut]


class LayoutRectOut(BaseModel):
    node: int
    x: int
    width: int
    y: float
    height: float


class LayoutOut(BaseModel):
    handle: str
    rects: list[LayoutRectOut]


class ReduceIn(BaseModel):
    handle: str = ORIGINAL
    minPoints: int | None = None
    minLifespan: float | None = None
    valueRange: tuple[float, float] | None = None


class ReduceOut(BaseModel):
    handle: str
    source: str
    nodes: int


class ReferenceIn(BaseModel):
    node: int


class PresetIn(BaseModel):
    name: str
    spec: dict


def _api_value(v):
    """Measure values as JSON: non-finite floats become strings the client
    turns back into numbers, undefined values become null."""
    if v is None:
        return None
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if np.isnan(v):
            return "NaN"
        if np.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return v
    if isinstance(v, (bool, int, np.integer, str)):
        return int(v) if isinstance(v, np.integer) else v
    return encode_value(v)


def create_app(bundle: AnalysisBundle, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="mstree explorer service")
    lock = threading.Lock()

    def get_tree(handle: str):
        try:
            return bundle.tree_of(handle)
        except AnalysisError as e:
            raise HTTPException(status_code=404, detail=str(e))

    @app.get("/api/dataset/meta")
    def dataset_meta():
        ds = bundle.dataset
        return {
            "n": ds.n,
            "d": ds.d,
            "dimNames": list(ds.dim_names),
            "outputNames": list(ds.output_names),
            "activeOutput": ds.active_output,
            "datasetHash": dataset_hash(ds),
            "measures": bundle.stores[ORIGINAL].measure_names(),
            "trees": list(bundle.trees.keys()),
            "params": {
                "k": bundle.params.k,
                "modelKind": bundle.params.model_kind,
                "ridgeLambda": bundle.params.ridge_lambda,
                "bandwidth": bundle.params.bandwidth,
                "curveSamples": bundle.params.curve_samples,
            },
            "referenceNode": bundle.reference_node,
        }

    @app.get("/api/tree", response_model=TreeOut)
    def tree(handle: str = Query(default=ORIGINAL)):
        t = get_tree(handle)
        nodes = []
        for i in t.nodes():
            p = t.partitions[i]
            nodes.append(TreeNodeOut(
                id=p.id, parent=t.parent_of(i), persistence=p.persistence,
                range=(p.lo, p.hi), minExt=p.min_ext, maxExt=p.max_ext,
                extraCriticalCount=len(p.extra_criticals),
                exactPointCount=p.exact_point_count,
                children=list(t.children_of(i))))
        return TreeOut(handle=handle, root=t.root, nodes=nodes)

    @app.get("/api/tree/layout", response_model=LayoutOut)
    def tree_layout(handle: str = Query(default=ORIGINAL)):
        t = get_tree(handle)
        rects = [LayoutRectOut(node=r.node, x=r.x, width=r.width, y=r.y, height=r.height)
                 for r in layout_tree(t)]
        return LayoutOut(handle=handle, rects=rects)

    @app.post("/api/tree/reduce", response_model=ReduceOut)
    def tree_reduce(req: ReduceIn):
        with lock:
            try:
                handle = bundle.reduce(
                    handle=req.handle, min_points=req.minPoints,
                    min_lifespan=req.minLifespan, value_range=req.valueRange)
            except AnalysisError as e:
                raise HTTPException(status_code=400, detail=str(e))
        return ReduceOut(handle=handle, source=req.handle,
                         nodes=len(bundle.trees[handle]))

    @app.get("/api/measure/{name}")
    def measure(name: str, handle: str = Query(default=ORIGINAL)):
        t = get_tree(handle)
        store = bundle.store_of(handle)
        if not store.has_measure(name):
            raise HTTPException(status_code=404, detail=f"unknown measure {name!r}")
        if store.measure(name).pair:
            raise HTTPException(status_code=400,
                                detail=f"measure {name!r} is pair-keyed; query it per node pair")
        try:
            values = {str(i): _api_value(store.get(name, i)) for i in t.nodes()}
        except MeasureError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return {"handle": handle, "name": name, "values": values}

    @app.post("/api/reference")
    def set_reference(req: ReferenceIn):
        with lock:
            try:
                bundle.set_reference(req.node)
            except MeasureError as e:
                raise HTTPException(status_code=404, detail=str(e))
        return {"referenceNode": req.node}

    @app.get("/api/partition/{node}/points")
    def partition_points(node: int, cols: str | None = Query(default=None)):
        t = bundle.trees[ORIGINAL]
        if node not in t:
            raise HTTPException(status_code=404, detail=f"unknown node {node}")
        ds = bundle.dataset
        ids = t.point_ids(node)
        names = ([c.strip() for c in cols.split(",") if c.strip()]
                 if cols else list(ds.dim_names) + list(ds.output_names))
        columns = {}
        for name in names:
            try:
                columns[name] = [float(v) for v in ds.column(name)[ids]]
            except KeyError:
                raise HTTPException(status_code=404, detail=f"unknown column {name!r}")
        return {"node": node, "ids": [int(i) for i in ids], "columns": columns}

    @app.get("/api/partition/{node}/model")
    def partition_model(node: int):
        store = bundle.stores[ORIGINAL]
        try:
            m = store.get("model", node)
            fit = store.get("relative_fitness", node, node)
        except MeasureError as e:
            raise HTTPException(status_code=404, detail=str(e))
        return {"node": node, **m.to_dict(), "fitness": _api_value(fit)}

    @app.get("/api/partition/{node}/curve")
    def partition_curve(node: int, bandwidth: float | None = Query(default=None),
                        samples: int | None = Query(default=None)):
        store = bundle.stores[ORIGINAL]
        with lock:
            cur_h, cur_m = store.measure("curve").param
            want = (bandwidth if bandwidth is not None else cur_h,
                    samples if samples is not None else cur_m)
            if want != (cur_h, cur_m):
                if want[0] <= 0 or want[1] < 1:
                    raise HTTPException(status_code=400, detail="invalid curve parameters")
                store.set_param("curve", want)
        try:
            c = store.get("curve", node)
        except MeasureError as e:
            raise HTTPException(status_code=404, detail=str(e))
        return {"node": node, **c.to_dict()}

    @app.get("/api/projection/presets")
    def get_presets():
        return {"presets": {name: spec.to_dict() for name, spec in bundle.presets.items()}}

    @app.post("/api/projection/presets")
    def post_preset(req: PresetIn):
        try:
            spec = ProjectionSpec.from_dict(req.spec)
        except (KeyError, TypeError, ValueError) as e:
            raise HTTPException(status_code=400, detail=f"bad projection spec: {e}")
        if spec.axes.shape != (bundle.dataset.d, 2):
            raise HTTPException(status_code=400, detail="projection spec dimension mismatch")
        with lock:
            bundle.presets[req.name] = spec
        return {"name": req.name, "presets": sorted(bundle.presets)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(bundle: AnalysisBundle, port: int = 8472, host: str = "127.0.0.1",
          ui_dir: str | Path | None = None):
    """Run the explorer service (blocking)."""
    import uvicorn

    uvicorn.run(create_app(bundle, ui_dir=ui_dir), host=host, port=port)
