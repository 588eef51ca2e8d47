"""Region-chart rendering (the only figure this package produces)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap
from matplotlib.patches import Patch

from .goodwin import STABLE_PERIODIC_ORBIT, STABLE_POINT, UNCERTIFIED, RegionGrid

#: palette: certification outcome -> fill color
REGION_COLORS = {
    STABLE_POINT: "#1f77b4",
    STABLE_PERIODIC_ORBIT: "#ff7f0e",
    UNCERTIFIED: "#cccccc",
}
_LABEL_INDEX = {UNCERTIFIED: 0, STABLE_POINT: 1, STABLE_PERIODIC_ORBIT: 2}


def render_region_svg(grid: RegionGrid, path) -> None:
    """Render the classification lattice to a byte-reproducible 800x600 SVG.

    The colormap is fixed (blue = stable point, orange = stable periodic
    orbit, gray = uncertified) and the output carries no timestamp or
    randomized ids, so identical grids produce identical files.
    """
    codes = np.zeros(grid.labels.shape, dtype=int)
    for label, idx in _LABEL_INDEX.items():
        codes[grid.labels == label] = idx

    plt.rcParams["svg.hashsalt"] = "pbcert-region"
    fig, ax = plt.subplots(figsize=(800 / 72, 600 / 72))
    cmap = ListedColormap([REGION_COLORS[UNCERTIFIED],
                           REGION_COLORS[STABLE_POINT],
                           REGION_COLORS[STABLE_PERIODIC_ORBIT]])
    ax.pcolormesh(grid.taus, grid.lams, codes, cmap=cmap, vmin=0, vmax=2,
                  shading="nearest")
    ax.set_xlabel("τ")
    ax.set_ylabel("λ")
    handles = [
        Patch(facecolor=REGION_COLORS[STABLE_POINT], label="stable point"),
        Patch(facecolor=REGION_COLORS[STABLE_PERIODIC_ORBIT],
              label="stable periodic orbit"),
        Patch(facecolor=REGION_COLORS[UNCERTIFIED], label="uncertified"),
    ]
    ax.legend(handles=handles, loc="upper right", framealpha=0.9)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
