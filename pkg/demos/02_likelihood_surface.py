"""Why the far-field clamp matters.

Evaluates the log-likelihood of one measurement campaign over a grid of
candidate jammer positions, once with the raw pathloss model (singular
whenever a candidate coincides with an observer) and once with the clamped
model, which fills the holes and keeps gradient ascent usable.  Writes
likelihood_surfaces.png.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jamfield import JammerParams, generate_dataset, log_likelihood
from jamfield.scenes import open_field_scene

scenario = open_field_scene(inr_db=25.0, rng_seed=3)
ds = generate_dataset(scenario)

# zoom to the neighbourhood of the strongest observations
center = ds.positions[0]
half = 60.0
xs = np.linspace(center[0] - half, center[0] + half, 161)
ys = np.linspace(center[1] - half, center[1] + half, 161)

fig, axes = plt.subplots(1, 2, figsize=(12, 5))
for ax, d_f, title in ((axes[0], 0.0, "raw pathloss model"),
                       (axes[1], scenario.d_f, "far-field clamped model")):
    surf = np.empty((len(ys), len(xs)))
    for r, y in enumerate(ys):
        for c, x in enumerate(xs):
            surf[r, c] = log_likelihood(
                ds, JammerParams([x, y], scenario.jammer.p0, scenario.jammer.gamma), d_f)
    finite = np.isfinite(surf)
    floor = np.percentile(surf[finite], 2.0)
    mesh = ax.pcolormesh(xs, ys, np.clip(surf, floor, None), cmap="magma", shading="auto")
    fig.colorbar(mesh, ax=ax, label="log-likelihood")
    ax.plot(ds.positions[:, 0], ds.positions[:, 1], "c.", ms=5, label="observers")
    ax.plot(*scenario.jammer.theta, "r*", ms=12, label="jammer")
    ax.set_title(f"{title} ({np.sum(~finite)} non-finite nodes)")
    ax.set_aspect("equal")
    ax.legend(loc="lower right")

out = Path(__file__).with_name("likelihood_surfaces.png")
fig.tight_layout()
fig.savefig(out, dpi=150)
print(f"wrote {out}")
