// Blue-yellow-red map used across all views; the domain is clamped and
// configurable because fitness scores are unbounded below.

export const UNDEFINED_COLOR = "#9e9e9e";

export function blueYellowRed(t: number): [number, number, number] {
  const u = t < 0 ? 0 : t > 1 ? 1 : t;
  if (u < 0.5) {
    const s = u / 0.5;
    return [s, s, 1 - s];
  }
  const s = (u - 0.5) / 0.5;
  return [1, 1 - s, 0];
}

export function css(rgb: [number, number, number]): string {
  const ch = (v: number) => {
    const b = Math.max(0, Math.min(255, Math.round(255 * v)));
    return b.toString(16).padStart(2, "0");
  };
  return `#${ch(rgb[0])}${ch(rgb[1])}${ch(rgb[2])}`;
}

/** Map a measure value to a fill color. Undefined (null) values render
 * gray, outside the map; everything else is clamped into [lo, hi]. */
export function measureColor(value: number | null, lo = 0, hi = 1): string {
  if (value === null || Number.isNaN(value)) return UNDEFINED_COLOR;
  const t = hi === lo ? 0.5 : (value - lo) / (hi - lo);
  return css(blueYellowRed(t));
}
