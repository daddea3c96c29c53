"""Render the noiseless RSS field of both benchmark scenes.

Left: nominal pathloss over 1 km^2.  Right: the urban street scene, where
buildings cast hard shadows and mirror-grade walls pipe power down the
corridors.  Writes power_fields.png next to this script.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jamfield import noiseless_rss
from jamfield.scenes import open_field_scene, urban_street_scene

out = Path(__file__).with_name("power_fields.png")

fig, axes = plt.subplots(1, 2, figsize=(12, 5))
for ax, scenario, title in (
    (axes[0], open_field_scene(), "pathloss regime"),
    (axes[1], urban_street_scene(), "urban ray-traced regime"),
):
    n = 201
    xs = np.linspace(scenario.area.xmin, scenario.area.xmax, n)
    ys = np.linspace(scenario.area.ymin, scenario.area.ymax, n)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = np.full(len(pts), np.nan)
    if scenario.buildings is not None:
        ok = ~scenario.buildings.contains(pts)
    else:
        ok = np.linalg.norm(pts - scenario.jammer.theta, axis=1) > 0
    vals[ok] = noiseless_rss(scenario, pts[ok])
    field = vals.reshape(n, n)
    vmax = np.nanmax(field)
    mesh = ax.pcolormesh(gx, gy, field, cmap="viridis", vmin=vmax - 70, vmax=vmax,
                         shading="auto")
    fig.colorbar(mesh, ax=ax, label="RSS [dBW]")
    ax.plot(*scenario.jammer.theta, "r*", markersize=14)
    ax.set_title(title)
    ax.set_aspect("equal")

fig.tight_layout()
fig.savefig(out, dpi=150)
print(f"wrote {out}")
