// Contract tests against the frozen server oracle (fixtures/contract.json,
// regenerated by scripts/make_fixtures.py from the core package).

import { describe, expect, it } from "vitest";

import { project } from "../src/projection.js";
import { cutAtPersistence, indexTree } from "../src/selection.js";
import { TreeView } from "../src/treeview.js";
import { loadContract } from "./fixtures.js";
import { RecordingContext } from "./recording.js";

const fx = loadContract();
const index = indexTree(fx.tree.nodes, fx.tree.root);

describe("tree view geometry", () => {
  it("draws exactly one rectangle per layout node", () => {
    const view = new TreeView(1200, 400);
    view.setLayout(fx.layout.rects, fx.meta.n);
    view.values = fx.measures.fitness;
    const ctx = new RecordingContext();
    view.render(ctx);
    expect(ctx.rects("fillRect").length).toBe(fx.layout.rects.length);
    expect(fx.layout.rects.length).toBe(fx.tree.nodes.length);
  });

  it("measure switch changes fills but not geometry", () => {
    const view = new TreeView(1200, 400);
    view.setLayout(fx.layout.rects, fx.meta.n);

    view.values = fx.measures.fitness;
    const a = new RecordingContext();
    view.render(a);

    view.values = fx.measures.size_norm;
    const b = new RecordingContext();
    view.render(b);

    const geom = (ctx: RecordingContext) => ctx.rects("fillRect").map((o) => o.args);
    const fills = (ctx: RecordingContext) => ctx.rects("fillRect").map((o) => o.fill);
    expect(geom(b)).toEqual(geom(a));
    expect(fills(b)).not.toEqual(fills(a));
  });

  it("hit-testing returns the deepest rectangle under the cursor", () => {
    const view = new TreeView(1200, 400);
    view.setLayout(fx.layout.rects, fx.meta.n);
    const frame = view.frame();
    const root = frame.screen.find((r) => r.node === fx.tree.root)!;
    // a probe at the very bottom of the drawable band (inside the 8px
    // padding) must hit a leaf, not the root
    const hit = view.hitTest(root.x + root.w / 2, 391.8);
    expect(hit).not.toBeNull();
    const node = index.byId.get(hit!)!;
    expect(node.persistence).toBe(0);
  });
});

describe("persistence-line selection", () => {
  it("matches the server cut oracle at 10 dragged positions", () => {
    for (const cut of fx.cuts) {
      const got = [...cutAtPersistence(index, cut.p)].sort((x, y) => x - y);
      expect(got).toEqual(cut.nodes);
    }
  });

  it("tiles the point range", () => {
    for (const cut of fx.cuts) {
      const spans = [...cutAtPersistence(index, cut.p)]
        .map((id) => index.byId.get(id)!.range)
        .sort((a, b) => a[0] - b[0]);
      expect(spans[0][0]).toBe(0);
      expect(spans[spans.length - 1][1]).toBe(fx.meta.n);
      for (let i = 1; i < spans.length; i++) expect(spans[i][0]).toBe(spans[i - 1][1]);
    }
  });
});

describe("client projection", () => {
  it("matches the server oracle within 1e-6 for every spec", () => {
    for (const p of fx.projections) {
      const withY = p.spec.yAxis !== null;
      fx.projectionPoints.inputs.forEach((x, i) => {
        const got = project(p.spec, x, withY ? fx.projectionPoints.output[i] : undefined);
        expect(Math.abs(got[0] - p.positions[i][0])).toBeLessThan(1e-6);
        expect(Math.abs(got[1] - p.positions[i][1])).toBeLessThan(1e-6);
      });
    }
  });
});
