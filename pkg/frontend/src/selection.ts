// Selection logic mirroring the server's semantics: persistence-line cuts,
// click-routed step lines, and validity checking per selection mode.

import type { SelectionMode, TreeNode } from "./types.js";

export interface TreeIndex {
  byId: Map<number, TreeNode>;
  root: number;
  n: number;
}

export function indexTree(nodes: TreeNode[], root: number): TreeIndex {
  const byId = new Map(nodes.map((nd) => [nd.id, nd]));
  const rootNode = byId.get(root);
  const n = rootNode ? rootNode.range[1] : 0;
  return { byId, root, n };
}

/** Nodes alive at persistence p: created at or below it, destroyed above. */
export function cutAtPersistence(t: TreeIndex, p: number): Set<number> {
  const out = new Set<number>();
  const stack = [t.root];
  while (stack.length) {
    const id = stack.pop()!;
    const node = t.byId.get(id)!;
    if (node.persistence <= p) {
      out.add(id);
    } else {
      stack.push(...node.children);
    }
  }
  return out;
}

/** True when a is a strict ancestor of b. */
export function isAncestor(t: TreeIndex, a: number, b: number): boolean {
  let cur = t.byId.get(b)?.parent ?? null;
  while (cur !== null) {
    if (cur === a) return true;
    cur = t.byId.get(cur)!.parent;
  }
  return false;
}

export function validateSelection(t: TreeIndex, ids: Iterable<number>, mode: SelectionMode): number[] {
  const list = [...new Set(ids)];
  if (mode !== "non-consistent") {
    for (const a of list) {
      for (const b of list) {
        if (a !== b && isAncestor(t, a, b)) {
          throw new Error(`ancestor-descendant pair (${a}, ${b}) not allowed in ${mode} selection`);
        }
      }
    }
  }
  return list;
}

/** Step-line selection built by clicking the partitions the line should
 * pass through: each clicked node pins its own range at its own level;
 * everything else is cut at the base level. Conflicting ancestors are
 * pushed down to their children, keeping the result a tiling. */
export function stepLineThrough(t: TreeIndex, clicked: number[], baseLevel: number): Set<number> {
  const level = new Float64Array(t.n).fill(baseLevel);
  for (const id of clicked) {
    const node = t.byId.get(id);
    if (!node) continue;
    const lv = node.persistence;
    for (let c = node.range[0]; c < node.range[1]; c++) level[c] = lv;
  }
  return stepLineSelect(t, level);
}

/** Per-column vertical hit followed by ancestor push-down (the server's
 * step-line semantics, reimplemented over column levels). */
export function stepLineSelect(t: TreeIndex, level: Float64Array): Set<number> {
  const sel = new Int32Array(t.n).fill(-1);
  const all = Array.from({ length: t.n }, (_, c) => c);
  const stack: Array<[number, number[]]> = [[t.root, all]];
  while (stack.length) {
    const [id, cols] = stack.pop()!;
    const node = t.byId.get(id)!;
    const rest: number[] = [];
    for (const c of cols) {
      if (level[c] >= node.persistence) sel[c] = id;
      else rest.push(c);
    }
    if (rest.length) {
      for (const cid of node.children) {
        const child = t.byId.get(cid)!;
        const sub = rest.filter((c) => child.range[0] <= c && c < child.range[1]);
        if (sub.length) stack.push([cid, sub]);
      }
    }
  }

  for (let guard = 0; guard < 64; guard++) {
    const present = new Set<number>();
    for (const id of sel) if (id >= 0) present.add(id);
    const conflicted = new Set<number>();
    for (const b of present) {
      let cur = t.byId.get(b)!.parent;
      while (cur !== null) {
        if (present.has(cur)) conflicted.add(cur);
        cur = t.byId.get(cur)!.parent;
      }
    }
    if (!conflicted.size) break;
    let moved = false;
    for (const a of conflicted) {
      for (const cid of t.byId.get(a)!.children) {
        const child = t.byId.get(cid)!;
        for (let c = child.range[0]; c < child.range[1]; c++) {
          if (sel[c] === a) {
            sel[c] = cid;
            moved = true;
          }
        }
      }
    }
    if (!moved) break;
  }
  const out = new Set<number>();
  for (const id of sel) if (id >= 0) out.add(id);
  return out;
}
