// Shared view state. Hover and selection changes propagate to every view
// through a plain listener bus; async responses carry the generation they
// were requested under so stale ones are dropped.

import type { ProjectionSpec, SelectionMode } from "./types.js";

export interface ViewState {
  treeHandle: string;
  measure: string;
  colormapLo: number;
  colormapHi: number;
  selection: number[];
  selectionMode: SelectionMode;
  hovered: number | null;
  spec: ProjectionSpec | null;
  colorOutput: string | null;
}

export type Listener = (state: ViewState, changed: (keyof ViewState)[]) => void;

export class Store {
  state: ViewState;
  private listeners: Listener[] = [];
  private generation = 0;

  constructor(initial: ViewState) {
    this.state = initial;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  update(patch: Partial<ViewState>): void {
    const changed = (Object.keys(patch) as (keyof ViewState)[]).filter(
      (k) => this.state[k] !== patch[k],
    );
    if (!changed.length) return;
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state, changed);
  }

  /** Stamp an async request; `isCurrent` tells whether its response is
   * still the latest one when it arrives. */
  stamp(): number {
    return ++this.generation;
  }

  isCurrent(stamp: number): boolean {
    return stamp === this.generation;
  }
}
