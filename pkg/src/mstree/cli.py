"""Command-line entry points: a thin layer over the library and the service.

    mstree analyze data.csv --output y -o data.analysis.json
    mstree reduce data.analysis.json --min-points 100
    mstree export data.analysis.json --what layout --format svg -o tree.svg
    mstree serve data.analysis.json --port 8472
"""

from __future__ import annotations

import csv as csv_mod
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import (
    ORIGINAL,
    AnalysisBundle,
    AnalysisError,
    AnalysisParams,
    load_analysis,
    save_analysis,
)
from .colors import UNDEFINED_COLOR, blue_yellow_red, css
from .dataset import DatasetError, load_table
from .measures import MeasureError
from .projection import project, project_partition_edges
from .tree import cut_at_persistence, layout_tree

DEFAULT_MEASURES = "lifespan,size_norm,min_value,max_value,fitness"


@click.group()
@click.version_option(__version__)
def main():
    """Persistence hierarchies of Morse-Smale partitions over sampled data."""


@main.command()
@click.argument("csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output", required=True,
              help="Name of the output column that drives the topology.")
@click.option("--output-columns", default=None,
              help="Comma-separated output column names (overrides the '|' marker column).")
@click.option("--k", default=15, type=click.IntRange(min=1), show_default=True,
              help="Neighborhood size for the k-NN graph.")
@click.option("--model-kind", default="ridge", type=click.Choice(["ridge", "ols"]),
              show_default=True)
@click.option("--ridge-lambda", default=1.0, type=click.FloatRange(min=0), show_default=True)
@click.option("--bandwidth", default=0.3, type=click.FloatRange(min=0, min_open=True),
              show_default=True, help="Inverse-curve kernel bandwidth (standardized y units).")
@click.option("--curve-samples", default=25, type=click.IntRange(min=1), show_default=True)
@click.option("--measures", default=DEFAULT_MEASURES, show_default=True,
              help="Comma-separated measures evaluated over all nodes.")
@click.option("-o", "--out", default=None, type=click.Path(dir_okay=False),
              help="Analysis file to write [default: <csv>.analysis.json].")
def analyze(csv, output, output_columns, k, model_kind, ridge_lambda, bandwidth,
            curve_samples, measures, out):
    """Run the full pipeline on a CSV table and write an analysis file."""
    out = out or str(Path(csv).with_suffix(".analysis.json"))
    outputs = [c for c in output_columns.split(",")] if output_columns else None
    try:
        raw = load_table(csv, active_output=output, output_columns=outputs)
        params = AnalysisParams(k=k, model_kind=model_kind, ridge_lambda=ridge_lambda,
                                bandwidth=bandwidth, curve_samples=curve_samples)
        wanted = tuple(m.strip() for m in measures.split(",") if m.strip())
        bundle = AnalysisBundle.analyze(raw, params, measures=wanted)
    except (DatasetError, MeasureError, ValueError) as e:
        raise click.ClickException(f"{csv}: {e}")
    save_analysis(bundle, out)
    t = bundle.trees[ORIGINAL]
    fitness = bundle.stores[ORIGINAL].get("fitness", t.root)
    click.echo(f"n={bundle.dataset.n} d={bundle.dataset.d} "
               f"leaves={len(t.leaves())} nodes={len(t)} "
               f"root_fitness={fitness:.4f}")
    click.echo(f"wrote {out}")


@main.command()
@click.argument("analysis", type=click.Path(exists=True, dir_okay=False))
@click.option("--tree", "handle", default=ORIGINAL, show_default=True,
              help="Handle of the tree to reduce.")
@click.option("--min-points", default=None, type=click.IntRange(min=1),
              help="Drop partitions with fewer points.")
@click.option("--min-lifespan", default=None, type=click.FloatRange(min=0),
              help="Drop partitions with a shorter lifespan (vs. their new parent).")
@click.option("--value-range", default=None,
              help="a:b — drop partitions whose values lie entirely outside [a, b].")
@click.option("-o", "--out", default=None, type=click.Path(dir_okay=False),
              help="Where to write the updated analysis [default: in place].")
def reduce(analysis, handle, min_points, min_lifespan, value_range, out):
    """Register a reduced tree inside an analysis file."""
    rng = None
    if value_range is not None:
        try:
            a, b = value_range.split(":")
            rng = (float(a), float(b))
        except ValueError:
            raise click.ClickException(f"bad --value-range {value_range!r}, expected a:b")
    bundle = _load(analysis)
    try:
        new = bundle.reduce(handle=handle, min_points=min_points,
                            min_lifespan=min_lifespan, value_range=rng)
    except AnalysisError as e:
        raise click.ClickException(str(e))
    save_analysis(bundle, out or analysis)
    click.echo(f"registered {new}: {len(bundle.trees[new])} of "
               f"{len(bundle.trees[handle])} nodes (from {handle})")


@main.command()
@click.argument("analysis", type=click.Path(exists=True, dir_okay=False))
@click.option("--what", required=True, type=click.Choice(["layout", "measures", "projection"]))
@click.option("--format", "fmt", default="json", type=click.Choice(["json", "csv", "svg"]),
              show_default=True)
@click.option("--tree", "handle", default=ORIGINAL, show_default=True)
@click.option("--measures", default=DEFAULT_MEASURES, show_default=True,
              help="Measures to evaluate for --what measures.")
@click.option("--measure", default=None, help="Measure coloring the layout SVG.")
@click.option("--preset", default="default", show_default=True,
              help="Projection preset for --what projection.")
@click.option("--level", default=0.0, type=click.FloatRange(0, 1), show_default=True,
              help="Persistence cut supplying the partition edges for --what projection.")
@click.option("-o", "--out", default="-", help="Output file, '-' for stdout.")
def export(analysis, what, fmt, handle, measures, measure, preset, level, out):
    """Export layout rectangles, measure tables, or projected points."""
    bundle = _load(analysis)
    try:
        if what == "layout":
            text = _export_layout(bundle, handle, fmt, measure)
        elif what == "measures":
            names = [m.strip() for m in measures.split(",") if m.strip()]
            text = _export_measures(bundle, handle, names, fmt)
        else:
            text = _export_projection(bundle, handle, preset, level, fmt)
    except (AnalysisError, MeasureError, KeyError, ValueError) as e:
        raise click.ClickException(str(e))
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}", err=True)


@main.command()
@click.argument("analysis", type=click.Path(exists=True, dir_okay=False))
@click.option("--port", default=8472, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui", default=None, type=click.Path(file_okay=False),
              help="Directory with the built explorer UI [default: ./frontend/dist if present].")
def serve(analysis, port, host, ui):
    """Serve the explorer API (and UI, when built) for an analysis file."""
    from .server import serve as run

    bundle = _load(analysis)
    if ui is None:
        candidate = Path("frontend") / "dist"
        ui = str(candidate) if candidate.is_dir() else None
    click.echo(f"serving on http://{host}:{port}")
    run(bundle, port=port, host=host, ui_dir=ui)


def _load(path) -> AnalysisBundle:
    try:
        return load_analysis(path)
    except (AnalysisError, json.JSONDecodeError) as e:
        raise click.ClickException(f"{path}: {e}")


def _export_layout(bundle, handle, fmt, measure):
    t = bundle.tree_of(handle)
    rects = layout_tree(t)
    if fmt == "json":
        return json.dumps({"handle": handle, "rects": [
            {"node": r.node, "x": r.x, "width": r.width, "y": r.y, "height": r.height}
            for r in rects]}, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv_mod.writer(buf)
        w.writerow(["node", "x", "width", "y", "height"])
        for r in rects:
            w.writerow([r.node, r.x, r.width, r.y, r.height])
        return buf.getvalue()
    values = bundle.store_of(handle).evaluate_all(measure) if measure else {}
    return _layout_svg(t, rects, values)


def _export_measures(bundle, handle, names, fmt):
    t = bundle.tree_of(handle)
    store = bundle.store_of(handle)
    table = {name: store.evaluate_all(name) for name in names}
    if fmt == "json":
        enc = {name: {str(i): _cell(v) for i, v in vals.items()}
               for name, vals in table.items()}
        return json.dumps({"handle": handle, "measures": enc}, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv_mod.writer(buf)
        w.writerow(["node", *names])
        for i in t.nodes():
            w.writerow([i, *(_cell(table[name][i]) for name in names)])
        return buf.getvalue()
    raise ValueError("measures export supports json or csv")


def _export_projection(bundle, handle, preset, level, fmt):
    if preset not in bundle.presets:
        raise AnalysisError(f"unknown projection preset {preset!r}")
    spec = bundle.presets[preset]
    ds = bundle.dataset
    t = bundle.tree_of(handle)
    pos = project(spec, ds.inputs, ds.f)
    edges = project_partition_edges(spec, t, cut_at_persistence(t, level), ds)
    if fmt == "json":
        return json.dumps({
            "spec": spec.to_dict(),
            "points": [[float(x), float(y)] for x, y in pos],
            "edges": [{"node": e["node"],
                       "a": [float(v) for v in e["a"]],
                       "b": [float(v) for v in e["b"]]} for e in edges],
        }, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv_mod.writer(buf)
        w.writerow(["px", "py"])
        for x, y in pos:
            w.writerow([float(x), float(y)])
        return buf.getvalue()
    return _projection_svg(pos, edges, ds)


def _layout_svg(t, rects, values, width=1000, height=600, pad=40):
    n = t.permutation.shape[0]
    sx = (width - 2 * pad) / n

    def fill(node):
        if not values:
            return "#cccccc"
        v = values.get(node)
        if v is None or not np.isfinite(v):
            return UNDEFINED_COLOR
        return css(blue_yellow_red(float(v)))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for r in sorted(rects, key=lambda r: -r.height):
        x = pad + r.x * sx
        w = max(r.width * sx, 0.5)
        y = pad + (1.0 - (r.y + r.height)) * (height - 2 * pad)
        h = max(r.height * (height - 2 * pad), 0.5)
        parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
                     f'fill="{fill(r.node)}" stroke="black" stroke-width="0.4"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _projection_svg(pos, edges, ds, width=800, height=800, pad=40):
    lo = pos.min(axis=0)
    hi = pos.max(axis=0)
    span = np.where(hi - lo == 0, 1.0, hi - lo)

    def to_px(p):
        q = (p - lo) / span
        return pad + q[0] * (width - 2 * pad), height - pad - q[1] * (height - 2 * pad)

    f = ds.f
    frange = np.where(f.max() - f.min() == 0, 1.0, f.max() - f.min())
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for p, v in zip(pos, f):
        x, y = to_px(p)
        color = css(blue_yellow_red(float((v - f.min()) / frange)))
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.5" fill="{color}"/>')
    for e in edges:
        (x1, y1), (x2, y2) = to_px(e["a"]), to_px(e["b"])
        parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                     f'stroke="black" stroke-width="1.2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cell(v):
    # same wire convention as the HTTP API: non-finite floats as strings
    if v is None:
        return None
    if isinstance(v, float) and not np.isfinite(v):
        if np.isnan(v):
            return "NaN"
        return "Infinity" if v > 0 else "-Infinity"
    return v


if __name__ == "__main__":
    main()
