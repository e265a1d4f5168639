// The hierarchy view: one rectangle per partition, x/width = point range,
// y = creation persistence (up), height = lifespan to the parent. Geometry
// is computed as pure data so it can be tested without a canvas; painting
// just replays it onto a 2D context.

import { measureColor, UNDEFINED_COLOR } from "./colormap.js";
import type { LayoutRect, MeasureValue } from "./types.js";
import { measureNumber } from "./types.js";

export interface Camera {
  scale: number; // horizontal zoom factor
  pan: number;   // horizontal pan in columns
}

export interface ScreenRect {
  node: number;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface CanvasLike {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  setLineDash(seg: number[]): void;
}

const PAD = 8;

/** Screen-space rectangles for the layout under a camera; independent of
 * the measure coloring so recoloring never moves geometry. */
export function computeScreenRects(
  rects: LayoutRect[], n: number, width: number, height: number, cam: Camera,
): ScreenRect[] {
  const sx = ((width - 2 * PAD) / n) * cam.scale;
  const innerH = height - 2 * PAD;
  return rects.map((r) => ({
    node: r.node,
    x: PAD + (r.x - cam.pan) * sx,
    y: PAD + (1 - (r.y + r.height)) * innerH,
    w: Math.max(r.width * sx, 0.5),
    h: Math.max(r.height * innerH, 0.5),
  }));
}

export function fillsFor(
  rects: LayoutRect[], values: Record<string, MeasureValue>,
  lo: number, hi: number,
): string[] {
  return rects.map((r) => {
    const v = values[String(r.node)];
    return v === undefined ? UNDEFINED_COLOR : measureColor(measureNumber(v), lo, hi);
  });
}

export interface TreeViewFrame {
  screen: ScreenRect[];
  fills: string[];
}

export class TreeView {
  rects: LayoutRect[] = [];
  n = 1;
  cam: Camera = { scale: 1, pan: 0 };
  width: number;
  height: number;
  values: Record<string, MeasureValue> = {};
  colormapLo = 0;
  colormapHi = 1;
  selection = new Set<number>();
  hovered: number | null = null;
  persistenceLine: number | null = null;

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  setLayout(rects: LayoutRect[], n: number): void {
    this.rects = rects;
    this.n = Math.max(n, 1);
  }

  frame(): TreeViewFrame {
    return {
      screen: computeScreenRects(this.rects, this.n, this.width, this.height, this.cam),
      fills: fillsFor(this.rects, this.values, this.colormapLo, this.colormapHi),
    };
  }

  render(ctx: CanvasLike): TreeViewFrame {
    const f = this.frame();
    ctx.clearRect(0, 0, this.width, this.height);
    for (let i = 0; i < f.screen.length; i++) {
      const r = f.screen[i];
      ctx.fillStyle = f.fills[i];
      ctx.fillRect(r.x, r.y, r.w, r.h);
      const emphasized = this.selection.has(r.node) || this.hovered === r.node;
      ctx.strokeStyle = emphasized ? "#000000" : "#666666";
      ctx.lineWidth = emphasized ? 1.5 : 0.4;
      ctx.strokeRect(r.x, r.y, r.w, r.h);
    }
    if (this.persistenceLine !== null) {
      const y = PAD + (1 - this.persistenceLine) * (this.height - 2 * PAD);
      ctx.strokeStyle = "#d32f2f";
      ctx.lineWidth = 1;
      ctx.setLineDash([5, 3]);
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(this.width, y);
      ctx.stroke();
      ctx.setLineDash([]);
    }
    return f;
  }

  /** Topmost (deepest) rectangle under a screen position. */
  hitTest(px: number, py: number): number | null {
    const screen = computeScreenRects(this.rects, this.n, this.width, this.height, this.cam);
    let best: ScreenRect | null = null;
    for (const r of screen) {
      if (px >= r.x && px <= r.x + r.w && py >= r.y && py <= r.y + r.h) {
        if (best === null || r.w <= best.w) best = r; // narrower = deeper
      }
    }
    return best ? best.node : null;
  }

  /** Screen y position -> persistence level (for dragging the cut line). */
  persistenceAt(py: number): number {
    const t = 1 - (py - PAD) / (this.height - 2 * PAD);
    return Math.max(0, Math.min(1, t));
  }

  zoom(factor: number, centerColumn: number): void {
    const s = Math.max(1, this.cam.scale * factor);
    this.cam.pan = centerColumn - (centerColumn - this.cam.pan) * (this.cam.scale / s);
    this.cam.scale = s;
  }
}
