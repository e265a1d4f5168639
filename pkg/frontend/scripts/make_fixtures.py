#!/usr/bin/env python3
"""Generate (or verify) the frozen server-oracle fixtures for the frontend
contract tests.

    python3 scripts/make_fixtures.py           # rewrite fixtures/contract.json
    python3 scripts/make_fixtures.py --check   # fail if fixtures are stale
"""

import json
import sys
from pathlib import Path

import numpy as np

from mstree.analysis import ORIGINAL, AnalysisBundle, AnalysisParams
from mstree.projection import ProjectionSpec, default_spec, project
from mstree.synthetic import sample_four_bumps
from mstree.tree import cut_at_persistence, layout_tree

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "contract.json"


def build():
    raw = sample_four_bumps(400, noise=0.01, seed=3)
    bundle = AnalysisBundle.analyze(raw, AnalysisParams(k=12), measures=("fitness",))
    tree = bundle.trees[ORIGINAL]
    ds = bundle.dataset
    store = bundle.stores[ORIGINAL]

    nodes = []
    for i in tree.nodes():
        p = tree.node(i)
        nodes.append({
            "id": p.id, "parent": tree.parent_of(i), "persistence": p.persistence,
            "range": [p.lo, p.hi], "minExt": p.min_ext, "maxExt": p.max_ext,
            "extraCriticalCount": len(p.extra_criticals),
            "exactPointCount": p.exact_point_count,
            "children": list(tree.children_of(i)),
        })

    rng = np.random.default_rng(17)
    cut_levels = sorted(float(v) for v in rng.uniform(0.0, 1.0, size=10))
    cuts = [{"p": p, "nodes": sorted(cut_at_persistence(tree, p).nodes)}
            for p in cut_levels]

    spec = default_spec(ds.d)
    steered = ProjectionSpec(
        axes=np.array([[0.9, 0.2], [-0.3, 1.1]]), y_axis=np.array([0.15, 0.8]))
    sample_ids = rng.choice(ds.n, size=25, replace=False)
    sample_ids.sort()
    proj = []
    for name, sp in (("default", spec), ("steered", steered)):
        pos = project(sp, ds.inputs[sample_ids],
                      ds.f[sample_ids] if sp.y_axis is not None else None)
        proj.append({
            "name": name,
            "spec": sp.to_dict(),
            "positions": [[float(x), float(y)] for x, y in pos],
        })

    measures = {}
    for name in ("fitness", "size_norm"):
        vals = store.evaluate_all(name)
        measures[name] = {str(k): (v if v is None or np.isfinite(v) else repr(v))
                          for k, v in vals.items()}

    return {
        "meta": {"n": ds.n, "d": ds.d, "dimNames": list(ds.dim_names),
                 "outputNames": list(ds.output_names), "activeOutput": ds.active_output},
        "tree": {"root": tree.root, "nodes": nodes},
        "layout": {"rects": [
            {"node": r.node, "x": r.x, "width": r.width, "y": r.y, "height": r.height}
            for r in layout_tree(tree)]},
        "cuts": cuts,
        "projectionPoints": {
            "ids": [int(i) for i in sample_ids],
            "inputs": [[float(v) for v in row] for row in ds.inputs[sample_ids]],
            "output": [float(v) for v in ds.f[sample_ids]],
        },
        "projections": proj,
        "measures": measures,
    }


def main():
    doc = json.dumps(build(), sort_keys=True, indent=1)
    if "--check" in sys.argv:
        if not OUT.exists() or OUT.read_text() != doc:
            print("fixtures are stale: regenerate with scripts/make_fixtures.py")
            return 1
        print("fixtures match the core")
        return 0
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(doc)
    print(f"wrote {OUT} ({len(doc)} bytes)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
