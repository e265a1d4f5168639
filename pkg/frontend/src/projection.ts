// Client-side star-coordinate projection. The server implementation is the
// normative oracle; this mirror exists so axis drags stay interactive.

import type { ProjectionSpec } from "./types.js";

export function defaultSpec(d: number): ProjectionSpec {
  const axes: [number, number][] = [];
  for (let i = 0; i < d; i++) {
    const angle = (i * Math.PI) / d;
    axes.push([Math.cos(angle), Math.sin(angle)]);
  }
  return { axes, yAxis: null };
}

export function project(spec: ProjectionSpec, x: number[], y?: number): [number, number] {
  if (x.length !== spec.axes.length) {
    throw new Error(`point dimension ${x.length} does not match spec ${spec.axes.length}`);
  }
  let px = 0;
  let py = 0;
  for (let i = 0; i < x.length; i++) {
    px += x[i] * spec.axes[i][0];
    py += x[i] * spec.axes[i][1];
  }
  if (spec.yAxis !== null && y !== undefined) {
    px += y * spec.yAxis[0];
    py += y * spec.yAxis[1];
  }
  return [px, py];
}

export function projectAll(spec: ProjectionSpec, xs: number[][], ys?: number[]): [number, number][] {
  return xs.map((x, i) => project(spec, x, ys ? ys[i] : undefined));
}

/** Scale and rotate one dimension's vector (dim === -1 targets the output
 * axis); every other vector is untouched. */
export function updateAxis(spec: ProjectionSpec, dim: number, scale = 1, rotate = 0): ProjectionSpec {
  const c = Math.cos(rotate);
  const s = Math.sin(rotate);
  const turn = ([vx, vy]: [number, number]): [number, number] =>
    [scale * (c * vx - s * vy), scale * (s * vx + c * vy)];
  if (dim === -1) {
    if (spec.yAxis === null) throw new Error("no output axis to update");
    return { axes: spec.axes.map((v) => [...v] as [number, number]), yAxis: turn(spec.yAxis) };
  }
  const axes = spec.axes.map((v, i) => (i === dim ? turn(v) : ([...v] as [number, number])));
  return { axes, yAxis: spec.yAxis ? ([...spec.yAxis] as [number, number]) : null };
}

/** Replace a vector so its tip lands on the dragged position. */
export function dragAxisTo(spec: ProjectionSpec, dim: number, tip: [number, number]): ProjectionSpec {
  const axes = spec.axes.map((v, i) => (i === dim ? ([...tip] as [number, number]) : ([...v] as [number, number])));
  return { axes, yAxis: spec.yAxis ? ([...spec.yAxis] as [number, number]) : null };
}
