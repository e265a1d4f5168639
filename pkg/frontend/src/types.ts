// Payload shapes of the analysis service API plus shared view types.

export interface TreeNode {
  id: number;
  parent: number | null;
  persistence: number;
  range: [number, number];
  minExt: number;
  maxExt: number;
  extraCriticalCount: number;
  exactPointCount: number;
  children: number[];
}

export interface TreeDoc {
  handle: string;
  root: number;
  nodes: TreeNode[];
}

export interface LayoutRect {
  node: number;
  x: number;
  width: number;
  y: number;
  height: number;
}

export interface LayoutDoc {
  handle: string;
  rects: LayoutRect[];
}

export interface DatasetMeta {
  n: number;
  d: number;
  dimNames: string[];
  outputNames: string[];
  activeOutput: number;
  measures: string[];
  trees: string[];
  referenceNode: number | null;
}

// Non-finite values travel as strings; undefined values as null.
export type MeasureValue = number | string | null;

export interface MeasureDoc {
  handle: string;
  name: string;
  values: Record<string, MeasureValue>;
}

export interface PointsDoc {
  node: number;
  ids: number[];
  columns: Record<string, number[]>;
}

export interface ModelDoc {
  node: number;
  coefficients: number[];
  intercept: number;
  kind: string;
  ridgeLambda: number;
  fitness: MeasureValue;
}

export interface CurveDoc {
  node: number;
  levels: number[];
  centers: number[][];
  spreads: number[][];
  bandwidth: number;
}

export interface ProjectionSpec {
  axes: [number, number][];
  yAxis: [number, number] | null;
}

export type SelectionMode = "global-line" | "step-line" | "discrete" | "non-consistent";

/** Parse a measure value off the wire: "Infinity"/"-Infinity"/"NaN" come
 * back as numbers, null stays null (undefined measure). */
export function measureNumber(v: MeasureValue): number | null {
  if (v === null) return null;
  return typeof v === "string" ? Number(v) : v;
}
