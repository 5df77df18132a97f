"""Optional SVG line charts rendered from experiment CSVs.

Needs matplotlib (the ``plots`` extra).  Charts are cosmetic: every
checked quantity lives in the CSVs, nothing reads the images back.
Rendering is pinned for reproducible bytes: fixed hash salt, no
timestamp metadata.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .exceptions import ConfigError
from .experiments import read_csv_columns


def _load_pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise ConfigError(
            "plotting needs matplotlib; install the 'plots' extra"
        ) from exc
    matplotlib.use("svg", force=True)
    from matplotlib import pyplot

    pyplot.rcParams["svg.hashsalt"] = "dynadmm"
    return pyplot


def plot_csv(csv_path, svg_path: Optional[Path] = None) -> Path:
    """Render one CSV as a line chart; returns the SVG path.

    The first column is the shared axis; every other column becomes one
    line.  Positive-only data gets a log scale, the natural reading for
    error curves.
    """
    pyplot = _load_pyplot()
    csv_path = Path(csv_path)
    columns = read_csv_columns(csv_path)
    names = list(columns)
    if len(names) < 2:
        raise ConfigError(f"{csv_path} has no data columns to plot")
    axis_name = names[0]
    axis = columns[axis_name]
    figure, axes = pyplot.subplots(figsize=(7.0, 4.5))
    positive = True
    for name in names[1:]:
        values = columns[name]
        keep = ~np.isnan(values)
        axes.plot(axis[keep], values[keep], label=name, linewidth=1.4)
        if not np.all(values[keep] > 0.0):
            positive = False
    if positive:
        axes.set_yscale("log")
    axes.set_xlabel(axis_name)
    axes.set_title(csv_path.stem)
    axes.legend(loc="best", fontsize="small")
    axes.grid(True, alpha=0.3)
    out = Path(svg_path) if svg_path is not None else csv_path.with_suffix(".svg")
    figure.savefig(out, format="svg", metadata={"Date": None})
    pyplot.close(figure)
    return out


def plot_artifacts(paths: Iterable) -> list[Path]:
    """Render every CSV in ``paths``; returns the SVG paths in order."""
    return [plot_csv(path) for path in paths]
