import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import type { LayoutRect, TreeNode } from "../src/types.js";

export interface Contract {
  meta: { n: number; d: number; dimNames: string[]; outputNames: string[] };
  tree: { root: number; nodes: TreeNode[] };
  layout: { rects: LayoutRect[] };
  cuts: { p: number; nodes: number[] }[];
  projectionPoints: { ids: number[]; inputs: number[][]; output: number[] };
  projections: {
    name: string;
    spec: { axes: [number, number][]; yAxis: [number, number] | null };
    positions: [number, number][];
  }[];
  measures: Record<string, Record<string, number | string | null>>;
}

const here = dirname(fileURLToPath(import.meta.url));

export function loadContract(): Contract {
  return JSON.parse(readFileSync(join(here, "..", "fixtures", "contract.json"), "utf-8"));
}
