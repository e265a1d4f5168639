"""Blue-yellow-red colormap shared by the SVG export and mirrored client-side."""

from __future__ import annotations

__all__ = ["blue_yellow_red", "css"]

UNDEFINED_COLOR = "#9e9e9e"  # values outside the map (e.g. root-only measures)


def blue_yellow_red(t: float) -> tuple[float, float, float]:
    """Piecewise-linear blue -> yellow -> red over t in [0, 1] (clamped)."""
    t = 0.0 if t < 0.0 else 1.0 if t > 1.0 else t
    if t < 0.5:
        u = t / 0.5
        return (u, u, 1.0 - u)
    u = (t - 0.5) / 0.5
    return (1.0, 1.0 - u, 0.0)


def css(rgb: tuple[float, float, float]) -> str:
    r, g, b = (max(0, min(255, round(255 * v))) for v in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"
