"""Cramer-Rao position bound across the survey area and across INR.

For a fixed crowd of observers, the achievable accuracy depends strongly on
where the jammer sits relative to them; this script maps the bound over jammer
positions and prints the bound for the top-15 geometry at each sweep INR.
Writes crb_map.png.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jamfield import JammerParams, crb_2d, generate_dataset, sigma_from_inr
from jamfield.scenes import open_field_scene

scenario = open_field_scene(inr_db=20.0, rng_seed=1)
ds = generate_dataset(scenario)
print(f"selected {len(ds)} strongest observations, sigma = {ds.sigma:.3f} dB")

print("\n  INR [dB]   bound dim1 [m]   bound dim2 [m]")
for inr in (0, 5, 10, 15, 20, 25, 30):
    sigma = sigma_from_inr(scenario.jammer.p0, inr)
    rep = crb_2d(ds.positions, scenario.jammer, sigma)
    b = rep.per_dimension_rmse_bound
    print(f"  {inr:8.1f}   {b[0]:14.4f}   {b[1]:14.4f}")

# map the bound over hypothetical jammer positions near the selected crowd
center = ds.positions.mean(axis=0)
half = 80.0
xs = np.linspace(center[0] - half, center[0] + half, 81)
ys = np.linspace(center[1] - half, center[1] + half, 81)
bound = np.full((len(ys), len(xs)), np.nan)
for r, y in enumerate(ys):
    for c, x in enumerate(xs):
        jp = JammerParams([x, y], scenario.jammer.p0, scenario.jammer.gamma)
        try:
            rep = crb_2d(ds.positions, jp, ds.sigma)
            bound[r, c] = np.sqrt(rep.per_dimension_variance.sum())
        except ValueError:
            pass  # candidate collides with an observer

fig, ax = plt.subplots(figsize=(6.5, 5.5))
mesh = ax.pcolormesh(xs, ys, np.log10(bound), cmap="cividis", shading="auto")
fig.colorbar(mesh, ax=ax, label="log10 CRB position bound [m]")
ax.plot(ds.positions[:, 0], ds.positions[:, 1], "w.", ms=6, label="observers")
ax.plot(*scenario.jammer.theta, "r*", ms=13, label="true jammer")
ax.set_aspect("equal")
ax.legend()
out = Path(__file__).with_name("crb_map.png")
fig.tight_layout()
fig.savefig(out, dpi=150)
print(f"\nwrote {out}")
