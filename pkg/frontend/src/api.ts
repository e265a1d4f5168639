// Typed fetch wrappers over the analysis service.

import type {
  CurveDoc,
  DatasetMeta,
  LayoutDoc,
  MeasureDoc,
  ModelDoc,
  PointsDoc,
  ProjectionSpec,
  TreeDoc,
} from "./types.js";

async function get<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  if (!resp.ok) throw new Error(`${url}: ${resp.status} ${await resp.text()}`);
  return resp.json() as Promise<T>;
}

async function post<T>(url: string, body: unknown): Promise<T> {
  const resp = await fetch(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) throw new Error(`${url}: ${resp.status} ${await resp.text()}`);
  return resp.json() as Promise<T>;
}

export const api = {
  meta: () => get<DatasetMeta>("/api/dataset/meta"),
  tree: (handle: string) => get<TreeDoc>(`/api/tree?handle=${encodeURIComponent(handle)}`),
  layout: (handle: string) => get<LayoutDoc>(`/api/tree/layout?handle=${encodeURIComponent(handle)}`),
  measure: (name: string, handle: string) =>
    get<MeasureDoc>(`/api/measure/${encodeURIComponent(name)}?handle=${encodeURIComponent(handle)}`),
  points: (node: number, cols: string[]) =>
    get<PointsDoc>(`/api/partition/${node}/points?cols=${encodeURIComponent(cols.join(","))}`),
  model: (node: number) => get<ModelDoc>(`/api/partition/${node}/model`),
  curve: (node: number, bandwidth?: number, samples?: number) => {
    const q = new URLSearchParams();
    if (bandwidth !== undefined) q.set("bandwidth", String(bandwidth));
    if (samples !== undefined) q.set("samples", String(samples));
    const qs = q.toString();
    return get<CurveDoc>(`/api/partition/${node}/curve${qs ? "?" + qs : ""}`);
  },
  reduce: (body: { handle?: string; minPoints?: number; minLifespan?: number }) =>
    post<{ handle: string; nodes: number }>("/api/tree/reduce", body),
  setReference: (node: number) => post<{ referenceNode: number }>("/api/reference", { node }),
  presets: () => get<{ presets: Record<string, ProjectionSpec> }>("/api/projection/presets"),
  savePreset: (name: string, spec: ProjectionSpec) =>
    post<{ name: string }>("/api/projection/presets", { name, spec }),
};
