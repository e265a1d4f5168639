// Boots the explorer: fetches the analysis from the service and wires the
// three linked views. Hover and selection propagate everywhere; measure
// switches only recolor; axis drags re-project client-side and stay in
// sync with the server oracle.

import { api } from "./api.js";
import { buildDetailsModel, DetailsRow, renderDetailsSvg } from "./detailsview.js";
import { GraphView } from "./graphview.js";
import { defaultSpec } from "./projection.js";
import { cutAtPersistence, indexTree, stepLineThrough, TreeIndex, validateSelection } from "./selection.js";
import { Store } from "./state.js";
import { TreeView } from "./treeview.js";
import type { DatasetMeta, MeasureValue, SelectionMode, TreeDoc } from "./types.js";
import { measureNumber } from "./types.js";

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el as T;
};

async function boot() {
  const meta: DatasetMeta = await api.meta();
  const store = new Store({
    treeHandle: "orig",
    measure: meta.measures.includes("fitness") ? "fitness" : meta.measures[0],
    colormapLo: 0,
    colormapHi: 1,
    selection: [],
    selectionMode: "global-line",
    hovered: null,
    spec: defaultSpec(meta.d),
    colorOutput: meta.outputNames[meta.activeOutput],
  });

  const treeCanvas = $<HTMLCanvasElement>("#tree-canvas");
  const graphCanvas = $<HTMLCanvasElement>("#graph-canvas");
  const detailsDiv = $<HTMLDivElement>("#details");
  const tooltip = $<HTMLDivElement>("#tooltip");
  const treeView = new TreeView(treeCanvas.width, treeCanvas.height);
  const graphView = new GraphView(graphCanvas.width, graphCanvas.height);
  graphView.spec = store.state.spec!;

  let tree: TreeDoc = await api.tree(store.state.treeHandle);
  let index: TreeIndex = indexTree(tree.nodes, tree.root);
  let values: Record<string, MeasureValue> = {};

  const measureSel = $<HTMLSelectElement>("#measure");
  for (const m of meta.measures.filter((m) => !["model", "dim_models", "curve", "lifespan_pair"].includes(m))) {
    measureSel.add(new Option(m, m));
  }
  measureSel.value = store.state.measure;
  const handleSel = $<HTMLSelectElement>("#tree-handle");
  const refreshHandles = () => {
    api.meta().then((m) => {
      handleSel.innerHTML = "";
      for (const h of m.trees) handleSel.add(new Option(h, h));
      handleSel.value = store.state.treeHandle;
    });
  };
  refreshHandles();

  async function loadTree(handle: string) {
    tree = await api.tree(handle);
    index = indexTree(tree.nodes, tree.root);
    const layout = await api.layout(handle);
    treeView.setLayout(layout.rects, meta.n);
    graphView.nodes = tree.nodes;
    await loadMeasure(store.state.measure);
  }

  async function loadMeasure(name: string) {
    const stamp = store.stamp();
    const doc = await api.measure(name, store.state.treeHandle);
    if (!store.isCurrent(stamp)) return;
    values = doc.values;
    treeView.values = values;
    paintTree();
  }

  function paintTree() {
    treeView.colormapLo = store.state.colormapLo;
    treeView.colormapHi = store.state.colormapHi;
    treeView.selection = new Set(store.state.selection);
    treeView.hovered = store.state.hovered;
    const ctx = treeCanvas.getContext("2d")!;
    treeView.render(ctx as unknown as Parameters<TreeView["render"]>[0]);
  }

  function paintGraph() {
    graphView.selection = new Set(store.state.selection);
    graphView.highlighted = store.state.hovered;
    graphView.memberIds = (store.state.hovered !== null &&
      memberIdsOf.get(store.state.hovered)) || new Set();
    const ctx = graphCanvas.getContext("2d")!;
    graphView.render(ctx as unknown as Parameters<GraphView["render"]>[0]);
  }

  const memberIdsOf = new Map<number, Set<number>>();

  async function refreshSelectionData() {
    const ids = store.state.selection;
    const stamp = store.stamp();
    const cols = [...meta.dimNames, ...meta.outputNames];
    const rows: DetailsRow[] = [];
    const inputs: number[][] = [];
    const output: number[] = [];
    const color: number[] = [];
    const pids: number[] = [];
    const colorCol = store.state.colorOutput ?? meta.outputNames[meta.activeOutput];
    memberIdsOf.clear();
    graphView.curves.clear();
    for (const id of ids.slice(0, 8)) {
      const [points, model, curve] = await Promise.all([
        api.points(id, cols), api.model(id), api.curve(id),
      ]);
      rows.push({ node: id, points, model, curve });
      if (curve) graphView.curves.set(id, curve);
      memberIdsOf.set(id, new Set(points.ids));
      for (let i = 0; i < points.ids.length; i++) {
        inputs.push(meta.dimNames.map((d) => points.columns[d][i]));
        output.push(points.columns[meta.outputNames[meta.activeOutput]][i]);
        color.push(points.columns[colorCol][i]);
        pids.push(points.ids[i]);
      }
    }
    if (!store.isCurrent(stamp)) return;
    detailsDiv.innerHTML = rows.length
      ? renderDetailsSvg(
        buildDetailsModel(rows, {
          dimNames: meta.dimNames,
          outputName: meta.outputNames[meta.activeOutput],
          colorOutput: colorCol,
          normalization: ($<HTMLInputElement>("#norm-across").checked ? "across" : "per-model"),
        }),
        {
          dimNames: meta.dimNames,
          outputName: meta.outputNames[meta.activeOutput],
          colorOutput: colorCol,
        })
      : "<p class='hint'>no selection</p>";
    graphView.points = { inputs, output, color, ids: pids };
    paintGraph();
  }

  function setSelection(ids: number[]) {
    store.update({ selection: ids });
  }

  // --- tree view interactions
  let draggingLine = false;
  const stepClicks: number[] = [];
  treeCanvas.addEventListener("mousedown", (ev) => {
    if (store.state.selectionMode === "global-line") {
      draggingLine = true;
      dragLine(ev);
    }
  });
  window.addEventListener("mouseup", () => (draggingLine = false));
  treeCanvas.addEventListener("mousemove", (ev) => {
    if (draggingLine) {
      dragLine(ev);
      return;
    }
    const id = treeView.hitTest(ev.offsetX, ev.offsetY);
    if (id !== store.state.hovered) {
      store.update({ hovered: id });
      hoverReference(id);
    }
    if (id !== null) {
      const node = index.byId.get(id)!;
      const v = measureNumber(values[String(id)] ?? null);
      tooltip.style.display = "block";
      tooltip.style.left = `${ev.pageX + 12}px`;
      tooltip.style.top = `${ev.pageY + 12}px`;
      tooltip.textContent =
        `#${id}  points=${node.exactPointCount}` +
        (node.extraCriticalCount ? ` (+${node.extraCriticalCount} critical)` : "") +
        `  ${store.state.measure}=` + (v === null ? "n/a" : v.toPrecision(4));
    } else {
      tooltip.style.display = "none";
    }
  });
  treeCanvas.addEventListener("mouseleave", () => {
    tooltip.style.display = "none";
    store.update({ hovered: null });
  });
  treeCanvas.addEventListener("click", (ev) => {
    const id = treeView.hitTest(ev.offsetX, ev.offsetY);
    if (id === null) return;
    const mode = store.state.selectionMode;
    if (mode === "discrete" || mode === "non-consistent") {
      const cur = new Set(store.state.selection);
      if (cur.has(id)) cur.delete(id);
      else cur.add(id);
      try {
        setSelection(validateSelection(index, cur, mode));
      } catch (e) {
        flashStatus(String(e));
      }
    } else if (mode === "step-line") {
      stepClicks.push(id);
      setSelection([...stepLineThrough(index, stepClicks, 0)]);
    }
  });
  treeCanvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    if (ev.shiftKey) {
      treeView.cam.pan += (ev.deltaY / treeCanvas.width) * (meta.n / treeView.cam.scale);
    } else {
      treeView.zoom(ev.deltaY < 0 ? 1.25 : 0.8, (ev.offsetX / treeCanvas.width) * meta.n);
    }
    paintTree();
  });

  function dragLine(ev: MouseEvent) {
    const p = treeView.persistenceAt(ev.offsetY);
    treeView.persistenceLine = p;
    setSelection([...cutAtPersistence(index, p)]);
  }

  let referenceTimer: number | undefined;
  function hoverReference(id: number | null) {
    if (!$<HTMLInputElement>("#hover-reference").checked || id === null) return;
    window.clearTimeout(referenceTimer);
    referenceTimer = window.setTimeout(async () => {
      await api.setReference(id);
      if (store.state.measure === "reference_fitness") await loadMeasure("reference_fitness");
    }, 150);
  }

  // --- graph view interactions
  let dragAxis: number | null = null;
  graphCanvas.addEventListener("mousedown", (ev) => {
    dragAxis = graphView.hitAxis(ev.offsetX, ev.offsetY);
  });
  graphCanvas.addEventListener("mousemove", (ev) => {
    if (dragAxis !== null) {
      graphView.dragAxis(dragAxis, ev.offsetX, ev.offsetY);
      store.update({ spec: graphView.spec });
      paintGraph();
      return;
    }
    const id = graphView.hitEdge(ev.offsetX, ev.offsetY);
    if (id !== store.state.hovered) store.update({ hovered: id });
  });
  window.addEventListener("mouseup", () => (dragAxis = null));

  // hovering a row (or cell) in the details grid highlights the partition
  detailsDiv.addEventListener("mouseover", (ev) => {
    const el = (ev.target as Element).closest("[data-node]");
    const id = el ? Number(el.getAttribute("data-node")) : null;
    if (id !== store.state.hovered) store.update({ hovered: id });
  });
  detailsDiv.addEventListener("mouseleave", () => store.update({ hovered: null }));

  // --- controls
  measureSel.addEventListener("change", () => {
    store.update({ measure: measureSel.value });
    loadMeasure(measureSel.value);
  });
  handleSel.addEventListener("change", async () => {
    store.update({ treeHandle: handleSel.value, selection: [] });
    await loadTree(handleSel.value);
  });
  $<HTMLSelectElement>("#mode").addEventListener("change", (ev) => {
    const mode = (ev.target as HTMLSelectElement).value as SelectionMode;
    stepClicks.length = 0;
    store.update({ selectionMode: mode, selection: [] });
    treeView.persistenceLine = mode === "global-line" ? treeView.persistenceLine : null;
  });
  $<HTMLButtonElement>("#reduce").addEventListener("click", async () => {
    const minPoints = Number($<HTMLInputElement>("#min-points").value) || undefined;
    const minLifespan = Number($<HTMLInputElement>("#min-lifespan").value) || undefined;
    if (!minPoints && !minLifespan) return flashStatus("set a reduction rule first");
    const res = await api.reduce({ handle: store.state.treeHandle, minPoints, minLifespan });
    flashStatus(`registered ${res.handle} (${res.nodes} nodes)`);
    refreshHandles();
  });
  for (const id of ["#cmap-lo", "#cmap-hi"]) {
    $<HTMLInputElement>(id).addEventListener("change", () => {
      store.update({
        colormapLo: Number($<HTMLInputElement>("#cmap-lo").value),
        colormapHi: Number($<HTMLInputElement>("#cmap-hi").value),
      });
    });
  }
  $<HTMLInputElement>("#norm-across").addEventListener("change", () => refreshSelectionData());
  const colorSel = $<HTMLSelectElement>("#color-output");
  for (const name of meta.outputNames) colorSel.add(new Option(name, name));
  colorSel.value = meta.outputNames[meta.activeOutput];
  colorSel.addEventListener("change", () => {
    store.update({ colorOutput: colorSel.value });
    refreshSelectionData();
  });
  $<HTMLInputElement>("#curve-edges").addEventListener("change", (ev) => {
    graphView.curveMode = (ev.target as HTMLInputElement).checked;
    paintGraph();
  });

  function flashStatus(text: string) {
    const el = $<HTMLDivElement>("#status");
    el.textContent = text;
    window.setTimeout(() => {
      if (el.textContent === text) el.textContent = "";
    }, 4000);
  }

  store.subscribe((_state, changed) => {
    if (changed.includes("selection")) {
      paintTree();
      refreshSelectionData();
    }
    if (changed.includes("hovered") || changed.includes("colormapLo") ||
        changed.includes("colormapHi")) {
      paintTree();
      paintGraph();
    }
  });

  await loadTree(store.state.treeHandle);
  paintGraph();
}

boot().catch((e) => {
  document.body.innerHTML = `<pre style="color:#c62828">${e}</pre>`;
});
