// Graph view: selected partitions drawn as edges between their projected
// extrema over the projected point cloud, with draggable axis vectors
// (drag a tip to rotate and scale that dimension). Non-members of a
// highlighted partition fade to small gray points.

import { measureColor } from "./colormap.js";
import { project, projectAll } from "./projection.js";
import type { CanvasLike } from "./treeview.js";
import type { CurveDoc, ProjectionSpec, TreeNode } from "./types.js";

export interface GraphPoints {
  inputs: number[][];   // standardized inputs, one row per point
  output: number[];     // active output (drives projection's y axis)
  color: number[];      // column encoded as color
  ids: number[];        // original point indices
}

export interface GraphEdge {
  node: number;
  a: [number, number];
  b: [number, number];
}

export interface GraphFrame {
  positions: [number, number][];
  edges: GraphEdge[];
  axisTips: [number, number][];
  bounds: { lo: [number, number]; hi: [number, number] };
}

function pointSegmentDistance(
  px: number, py: number, a: [number, number], b: [number, number],
): number {
  const vx = b[0] - a[0];
  const vy = b[1] - a[1];
  const len2 = vx * vx + vy * vy;
  const t = len2 === 0 ? 0 : Math.max(0, Math.min(1,
    ((px - a[0]) * vx + (py - a[1]) * vy) / len2));
  const dx = px - (a[0] + t * vx);
  const dy = py - (a[1] + t * vy);
  return Math.sqrt(dx * dx + dy * dy);
}

export function partitionEdges(
  spec: ProjectionSpec, nodes: TreeNode[], selection: Set<number>,
  pointById: Map<number, { x: number[]; y: number }>,
): GraphEdge[] {
  const out: GraphEdge[] = [];
  for (const node of nodes) {
    if (!selection.has(node.id)) continue;
    const mn = pointById.get(node.minExt);
    const mx = pointById.get(node.maxExt);
    if (!mn || !mx) continue;
    out.push({
      node: node.id,
      a: project(spec, mn.x, mn.y),
      b: project(spec, mx.x, mx.y),
    });
  }
  return out;
}

export class GraphView {
  width: number;
  height: number;
  spec: ProjectionSpec = { axes: [], yAxis: null };
  points: GraphPoints = { inputs: [], output: [], color: [], ids: [] };
  nodes: TreeNode[] = [];
  selection = new Set<number>();
  highlighted: number | null = null;
  memberIds = new Set<number>();
  axisScale = 80; // pixels per unit axis vector
  curveMode = false;
  curves = new Map<number, CurveDoc>();

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  frame(): GraphFrame {
    const positions = projectAll(this.spec, this.points.inputs,
      this.spec.yAxis ? this.points.output : undefined);
    const pointById = new Map(this.points.ids.map((id, i) => [id, {
      x: this.points.inputs[i], y: this.points.output[i],
    }]));
    const edges = partitionEdges(this.spec, this.nodes, this.selection, pointById);
    let lo: [number, number] = [Infinity, Infinity];
    let hi: [number, number] = [-Infinity, -Infinity];
    for (const p of positions) {
      lo = [Math.min(lo[0], p[0]), Math.min(lo[1], p[1])];
      hi = [Math.max(hi[0], p[0]), Math.max(hi[1], p[1])];
    }
    if (!positions.length) {
      lo = [-1, -1];
      hi = [1, 1];
    }
    return { positions, edges, axisTips: this.axisTipsPx(), bounds: { lo, hi } };
  }

  toPx(bounds: GraphFrame["bounds"], p: [number, number]): [number, number] {
    const spanX = bounds.hi[0] - bounds.lo[0] || 1;
    const spanY = bounds.hi[1] - bounds.lo[1] || 1;
    const pad = 30;
    return [
      pad + ((p[0] - bounds.lo[0]) / spanX) * (this.width - 2 * pad),
      this.height - pad - ((p[1] - bounds.lo[1]) / spanY) * (this.height - 2 * pad),
    ];
  }

  axisTipsPx(): [number, number][] {
    const cx = this.width / 2;
    const cy = this.height / 2;
    return this.spec.axes.map(([vx, vy]) =>
      [cx + vx * this.axisScale, cy - vy * this.axisScale] as [number, number]);
  }

  /** Axis index whose tip is within `radius` px of the position. */
  hitAxis(px: number, py: number, radius = 10): number | null {
    const tips = this.axisTipsPx();
    for (let i = 0; i < tips.length; i++) {
      const dx = tips[i][0] - px;
      const dy = tips[i][1] - py;
      if (dx * dx + dy * dy <= radius * radius) return i;
    }
    return null;
  }

  /** Partition id of the edge closest to the position (within `radius`). */
  hitEdge(px: number, py: number, radius = 6): number | null {
    const f = this.frame();
    let best: number | null = null;
    let bestD = radius;
    for (const e of f.edges) {
      const a = this.toPx(f.bounds, e.a);
      const b = this.toPx(f.bounds, e.b);
      const d = pointSegmentDistance(px, py, a, b);
      if (d <= bestD) {
        bestD = d;
        best = e.node;
      }
    }
    return best;
  }

  /** Move an axis tip to a screen position (rotate + scale that vector). */
  dragAxis(dim: number, px: number, py: number): void {
    const cx = this.width / 2;
    const cy = this.height / 2;
    const axes = this.spec.axes.map((v, i) =>
      i === dim
        ? ([(px - cx) / this.axisScale, (cy - py) / this.axisScale] as [number, number])
        : ([...v] as [number, number]));
    this.spec = { axes, yAxis: this.spec.yAxis ? [...this.spec.yAxis] as [number, number] : null };
  }

  render(ctx: CanvasLike & {
    arc(x: number, y: number, r: number, a0: number, a1: number): void;
    fill(): void;
  }): GraphFrame {
    const f = this.frame();
    ctx.clearRect(0, 0, this.width, this.height);
    const cr = this.points.color.length
      ? this.points.color.reduce(
        (e, v) => ({ lo: Math.min(e.lo, v), hi: Math.max(e.hi, v) }),
        { lo: Infinity, hi: -Infinity })
      : { lo: 0, hi: 1 };
    for (let i = 0; i < f.positions.length; i++) {
      const [x, y] = this.toPx(f.bounds, f.positions[i]);
      const member = this.highlighted === null || this.memberIds.has(this.points.ids[i]);
      ctx.beginPath();
      ctx.arc(x, y, member ? 2.4 : 1.2, 0, 2 * Math.PI);
      const t = cr.hi === cr.lo ? 0.5 : (this.points.color[i] - cr.lo) / (cr.hi - cr.lo);
      ctx.fillStyle = member ? measureColor(t) : "#bdbdbd";
      ctx.fill();
    }
    for (const e of f.edges) {
      ctx.strokeStyle = this.highlighted === e.node ? "#000000" : "#424242";
      ctx.lineWidth = this.highlighted === e.node ? 2.5 : 1.2;
      // curve mode projects the partition's inverse curve; its polyline is
      // not guaranteed to end at the projected extrema
      const curve = this.curveMode ? this.curves.get(e.node) : undefined;
      if (curve && curve.levels.length > 1) {
        ctx.beginPath();
        curve.centers.forEach((c, i) => {
          const p = this.toPx(f.bounds, project(this.spec, c,
            this.spec.yAxis ? curve.levels[i] : undefined));
          if (i === 0) ctx.moveTo(p[0], p[1]);
          else ctx.lineTo(p[0], p[1]);
        });
        ctx.stroke();
      } else {
        const [x1, y1] = this.toPx(f.bounds, e.a);
        const [x2, y2] = this.toPx(f.bounds, e.b);
        ctx.beginPath();
        ctx.moveTo(x1, y1);
        ctx.lineTo(x2, y2);
        ctx.stroke();
      }
    }
    const cx = this.width / 2;
    const cy = this.height / 2;
    for (const [tx, ty] of f.axisTips) {
      ctx.strokeStyle = "#1565c0";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.moveTo(cx, cy);
      ctx.lineTo(tx, ty);
      ctx.stroke();
      ctx.beginPath();
      ctx.arc(tx, ty, 4, 0, 2 * Math.PI);
      ctx.fillStyle = "#1565c0";
      ctx.fill();
    }
    return f;
  }
}
