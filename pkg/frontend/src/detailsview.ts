// Details view: one row per selected partition, one scatterplot column per
// input dimension. A shared output range spans every plot; each column
// shares its x range across rows. The inverse curve is overlaid with a
// one-standard-deviation band, and the model coefficients render as
// horizontal bars under the plots (intercept in the label column; green
// positive, red negative). Produces an SVG string so it is testable
// without a DOM.

import { measureColor } from "./colormap.js";
import type { CurveDoc, ModelDoc, PointsDoc } from "./types.js";

export interface DetailsRow {
  node: number;
  points: PointsDoc;
  model: ModelDoc;
  curve: CurveDoc | null;
}

export interface DetailsOptions {
  dimNames: string[];
  outputName: string;
  colorOutput?: string;
  cellWidth?: number;
  cellHeight?: number;
  barHeight?: number;
  normalization?: "per-model" | "across";
}

interface Extent {
  lo: number;
  hi: number;
}

function extent(values: number[], init?: Extent): Extent {
  let lo = init ? init.lo : Number.POSITIVE_INFINITY;
  let hi = init ? init.hi : Number.NEGATIVE_INFINITY;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return { lo, hi };
}

function scale(e: Extent, span: number): (v: number) => number {
  const w = e.hi - e.lo || 1;
  return (v) => ((v - e.lo) / w) * span;
}

export interface DetailsModel {
  rows: DetailsRow[];
  yRange: Extent;            // shared across every plot
  xRanges: Extent[];         // per dimension, shared across rows
  coefScale: number[];       // per row: divisor for bar lengths
}

export function buildDetailsModel(rows: DetailsRow[], opts: DetailsOptions): DetailsModel {
  const d = opts.dimNames.length;
  let yRange: Extent = { lo: Number.POSITIVE_INFINITY, hi: Number.NEGATIVE_INFINITY };
  const xRanges: Extent[] = Array.from({ length: d }, () => ({
    lo: Number.POSITIVE_INFINITY, hi: Number.NEGATIVE_INFINITY,
  }));
  for (const row of rows) {
    yRange = extent(row.points.columns[opts.outputName] ?? [], yRange);
    opts.dimNames.forEach((name, i) => {
      xRanges[i] = extent(row.points.columns[name] ?? [], xRanges[i]);
    });
  }
  const maxAbs = (c: number[]) => c.reduce((m, v) => Math.max(m, Math.abs(v)), 0);
  let coefScale: number[];
  if (opts.normalization === "across") {
    const g = rows.reduce((m, r) => Math.max(m, maxAbs(r.model.coefficients)), 0) || 1;
    coefScale = rows.map(() => g);
  } else {
    coefScale = rows.map((r) => maxAbs(r.model.coefficients) || 1);
  }
  return { rows, yRange, xRanges, coefScale };
}

export function renderDetailsSvg(model: DetailsModel, opts: DetailsOptions): string {
  const cw = opts.cellWidth ?? 160;
  const ch = opts.cellHeight ?? 120;
  const bh = opts.barHeight ?? 14;
  const label = 110;
  const gap = 8;
  const d = opts.dimNames.length;
  const rowH = ch + bh + gap;
  const width = label + d * (cw + gap);
  const height = model.rows.length * rowH + gap;
  const sy = scale(model.yRange, ch);
  const colorCol = opts.colorOutput ?? opts.outputName;

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  ];
  model.rows.forEach((row, ri) => {
    const top = gap + ri * rowH;
    const ys = row.points.columns[opts.outputName] ?? [];
    const colors = row.points.columns[colorCol] ?? ys;
    const cr = extent(colors);
    parts.push(
      `<text x="4" y="${top + ch / 2}" font-size="12" class="row-label" ` +
      `data-node="${row.node}">${row.node} (${row.points.ids.length})</text>`,
    );
    // intercept bar in the label column
    const iw = Math.min(Math.abs(row.model.intercept) / model.coefScale[ri], 1) * (label - 12);
    parts.push(barSvg(4, top + ch + 2, iw, bh, row.model.intercept));
    opts.dimNames.forEach((name, ci) => {
      const left = label + ci * (cw + gap);
      const sx = scale(model.xRanges[ci], cw);
      const xs = row.points.columns[name] ?? [];
      parts.push(`<g class="cell" data-node="${row.node}" data-dim="${name}">`);
      parts.push(`<rect x="${left}" y="${top}" width="${cw}" height="${ch}" ` +
        `fill="white" stroke="#bbb"/>`);
      if (row.curve && row.curve.levels.length > 1) {
        parts.push(curveBand(row.curve, ci, left, top, ch, sx, sy));
      }
      for (let i = 0; i < xs.length; i++) {
        const px = left + sx(xs[i]);
        const py = top + ch - sy(ys[i]);
        const t = cr.hi === cr.lo ? 0.5 : (colors[i] - cr.lo) / (cr.hi - cr.lo);
        parts.push(`<circle cx="${px.toFixed(1)}" cy="${py.toFixed(1)}" r="1.6" ` +
          `fill="${measureColor(t)}"/>`);
      }
      const c = row.model.coefficients[ci] ?? 0;
      const wc = Math.min(Math.abs(c) / model.coefScale[ri], 1) * cw;
      parts.push(barSvg(left, top + ch + 2, wc, bh, c));
      parts.push("</g>");
    });
  });
  parts.push("</svg>");
  return parts.join("\n");
}

function barSvg(x: number, y: number, w: number, h: number, value: number): string {
  const fill = value >= 0 ? "#2e7d32" : "#c62828"; // green positive, red negative
  return `<rect class="coef" x="${x}" y="${y}" width="${Math.max(w, 0.5).toFixed(1)}" ` +
    `height="${h - 4}" fill="${fill}"/>`;
}

function curveBand(
  curve: CurveDoc, dim: number, left: number, top: number, ch: number,
  sx: (v: number) => number, sy: (v: number) => number,
): string {
  const upper: string[] = [];
  const lower: string[] = [];
  const mid: string[] = [];
  for (let i = 0; i < curve.levels.length; i++) {
    const py = (top + ch - sy(curve.levels[i])).toFixed(1);
    const c = curve.centers[i][dim];
    const s = curve.spreads[i][dim];
    mid.push(`${(left + sx(c)).toFixed(1)},${py}`);
    upper.push(`${(left + sx(c + s)).toFixed(1)},${py}`);
    lower.push(`${(left + sx(c - s)).toFixed(1)},${py}`);
  }
  const band = [...upper, ...lower.reverse()].join(" ");
  return `<polygon points="${band}" fill="#1565c0" opacity="0.15"/>` +
    `<polyline points="${mid.join(" ")}" fill="none" stroke="#1565c0" stroke-width="1.5"/>`;
}
