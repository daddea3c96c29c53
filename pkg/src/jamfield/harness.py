"""Monte Carlo experiment driver: INR sweeps, RMSE aggregation, CRB overlay.

Every (INR, realization) cell is an independent task, seeded from the master
seed by a splittable scheme keyed on the cell indices, so results are
byte-identical no matter how many workers execute them.  Observer draws and
the unit noise depend only on the realization index: INR levels share common
random numbers, which is also how the selected observer sets stay comparable
along a sweep.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .crb import crb_2d
from .estimators import EstimatorSpec, run_estimator
from .field import SingularGeometryError
from .propagation import ScenarioConfig, generate_dataset, noiseless_rss

CSV_HEADER = "estimator,inr_db,dim,rmse_m,crb_rmse_m,converged_frac,mean_ms"


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a scenario, the estimators to race, the INR grid, and seeds."""

    scenario: ScenarioConfig
    estimators: tuple[EstimatorSpec, ...]
    inr_grid_db: tuple[float, ...]
    n_mc: int
    output_dir: str = "out"
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "inr_grid_db", tuple(float(v) for v in self.inr_grid_db))
        if self.n_mc < 1:
            raise ValueError("n_mc must be >= 1")
        if len(self.inr_grid_db) == 0:
            raise ValueError("inr_grid_db must be nonempty")
        if list(self.inr_grid_db) != sorted(self.inr_grid_db):
            raise ValueError("inr_grid_db must be sorted ascending")

    @property
    def estimator_names(self) -> tuple[str, ...]:
        names = []
        for spec in self.estimators:
            name = spec.kind
            if sum(1 for s in self.estimators if s.kind == spec.kind) > 1:
                name = f"{spec.kind}_{sum(1 for n in names if n.startswith(spec.kind)) + 1}"
            names.append(name)
        return tuple(names)


@dataclass
class SweepResult:
    """Aggregated sweep statistics, indexed [estimator, inr, dim]."""

    estimator_names: tuple[str, ...]
    inr_grid_db: np.ndarray
    rmse_m: np.ndarray          # (E, I, D)
    crb_rmse_m: np.ndarray      # (I, D)
    converged_frac: np.ndarray  # (E, I)
    mean_ms: np.ndarray         # (E, I)
    n_mc: int

    def rmse_norm(self, estimator: str) -> np.ndarray:
        """Overall position-error RMSE per INR: sqrt(sum over dims of rmse^2)."""
        e = self.estimator_names.index(estimator)
        return np.sqrt(np.sum(self.rmse_m[e] ** 2, axis=1))


def rmse_per_dimension(estimates, truth) -> np.ndarray:
    """Per-dimension root-mean-square error of a batch of position estimates."""
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    if est.shape[0] == 0:
        raise ValueError("need at least one estimate")
    truth = np.asarray(truth, dtype=float)
    if est.shape[1] != truth.shape[0]:
        raise ValueError("dimension mismatch between estimates and truth")
    return np.sqrt(np.mean((est - truth) ** 2, axis=0))


def _realization_rngs(master_seed: int, mc_idx: int, inr_idx: int, n_estimators: int):
    """Dataset rng depends only on the realization; estimator rngs on the cell."""
    data_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(1, mc_idx))
    )
    est_rngs = [
        np.random.default_rng(
            np.random.SeedSequence(entropy=master_seed, spawn_key=(2, mc_idx, inr_idx, e))
        )
        for e in range(n_estimators)
    ]
    return data_rng, est_rngs


def _run_cell(args):
    """One (INR, realization) cell: dataset, CRB at truth, every estimator."""
    cfg, inr_idx, mc_idx = args
    scenario = replace(cfg.scenario, inr_db=cfg.inr_grid_db[inr_idx])
    data_rng, est_rngs = _realization_rngs(cfg.master_seed, mc_idx, inr_idx,
                                           len(cfg.estimators))
    ds = generate_dataset(scenario, data_rng)
    try:
        crb_var = crb_2d(ds.positions, scenario.jammer, ds.sigma).per_dimension_variance
    except SingularGeometryError:
        crb_var = np.full(2, np.nan)
    d = scenario.jammer.theta.size
    theta_hats = np.full((len(cfg.estimators), d), np.nan)
    converged = np.zeros(len(cfg.estimators), dtype=bool)
    wall_ms = np.zeros(len(cfg.estimators))
    for e, spec in enumerate(cfg.estimators):
        t0 = time.perf_counter()
        try:
            rep = run_estimator(ds, spec, scenario.d_f, scenario.area,
                                known=scenario.jammer, rng=est_rngs[e])
            theta_hats[e] = rep.theta_hat
            converged[e] = rep.converged
        except Exception:
            pass  # counted as a failure in the convergence rate
        wall_ms[e] = (time.perf_counter() - t0) * 1e3
    return (inr_idx, mc_idx), theta_hats, converged, wall_ms, crb_var


def run_sweep(cfg: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Execute the full sweep, optionally across a process pool.

    The aggregation is an ordered reduction over (inr, realization) keys, so
    the result is independent of worker count and scheduling.
    """
    n_e = len(cfg.estimators)
    n_i = len(cfg.inr_grid_db)
    d = cfg.scenario.jammer.theta.size
    tasks = [(cfg, i, m) for i in range(n_i) for m in range(cfg.n_mc)]
    if workers is None or workers <= 1:
        outcomes = [_run_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    outcomes.sort(key=lambda item: item[0])

    theta = np.full((n_e, n_i, cfg.n_mc, d), np.nan)
    conv = np.zeros((n_e, n_i, cfg.n_mc), dtype=bool)
    ms = np.zeros((n_e, n_i, cfg.n_mc))
    crb_var = np.full((n_i, cfg.n_mc, d), np.nan)
    for (i, m), th, cv, wm, cb in outcomes:
        theta[:, i, m] = th
        conv[:, i, m] = cv
        ms[:, i, m] = wm
        crb_var[i, m] = cb

    truth = cfg.scenario.jammer.theta
    err2 = (theta - truth) ** 2
    with np.errstate(invalid="ignore"):
        rmse = np.sqrt(np.nanmean(err2, axis=2))
    crb_rmse = np.sqrt(np.nanmean(crb_var, axis=1))
    return SweepResult(
        estimator_names=cfg.estimator_names,
        inr_grid_db=np.asarray(cfg.inr_grid_db),
        rmse_m=rmse,
        crb_rmse_m=crb_rmse,
        converged_frac=conv.mean(axis=2),
        mean_ms=ms.mean(axis=2),
        n_mc=cfg.n_mc,
    )


def render_csv(result: SweepResult, include_timing: bool = False) -> str:
    """The results table as CSV text with the fixed column header.

    Wall-clock means are written as 0.0 unless include_timing is set: the
    byte-identical determinism guarantee on results.csv cannot hold for
    measured times, so timing is opt-in (it lives on SweepResult regardless).
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for e, name in enumerate(result.estimator_names):
        for i, inr in enumerate(result.inr_grid_db):
            for dim in range(result.rmse_m.shape[2]):
                ms = result.mean_ms[e, i] if include_timing else 0.0
                writer.writerow([
                    name,
                    f"{inr:.9g}",
                    dim + 1,
                    f"{result.rmse_m[e, i, dim]:.9g}",
                    f"{result.crb_rmse_m[i, dim]:.9g}",
                    f"{result.converged_frac[e, i]:.9g}",
                    f"{ms:.9g}",
                ])
    return buf.getvalue()


def _plot_rmse(result: SweepResult, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "jamfield"
    n_dim = result.rmse_m.shape[2]
    fig, axes = plt.subplots(1, n_dim, figsize=(5.5 * n_dim, 4.2), squeeze=False)
    for dim in range(n_dim):
        ax = axes[0, dim]
        for e, name in enumerate(result.estimator_names):
            ax.semilogy(result.inr_grid_db, result.rmse_m[e, :, dim], marker="o", label=name)
        ax.semilogy(result.inr_grid_db, result.crb_rmse_m[:, dim], "k--", label="CRB")
        ax.set_xlabel("INR [dB]")
        ax.set_ylabel(f"RMSE dim {dim + 1} [m]")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def emit_outputs(result: SweepResult, out_dir, include_timing: bool = False) -> list:
    """Write results.csv and rmse_vs_inr.svg into out_dir; returns the paths."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    csv_path.write_text(render_csv(result, include_timing=include_timing))
    svg_path = out / "rmse_vs_inr.svg"
    _plot_rmse(result, svg_path)
    return [csv_path, svg_path]


def emit_field_heatmap(scenario: ScenarioConfig, path, grid_n: int = 201) -> None:
    """Render the noiseless power field of a scenario (figure-2 style map)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    area = scenario.area
    xs = np.linspace(area.xmin, area.xmax, grid_n)
    ys = np.linspace(area.ymin, area.ymax, grid_n)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = np.full(pts.shape[0], np.nan)
    if scenario.regime == "raytrace" and scenario.buildings is not None:
        outside = ~scenario.buildings.contains(pts)
        vals[outside] = noiseless_rss(scenario, pts[outside])
    else:
        d = np.linalg.norm(pts - scenario.jammer.theta, axis=1)
        ok = d > 0
        vals[ok] = noiseless_rss(scenario, pts[ok])
    field = vals.reshape(grid_n, grid_n)

    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    vmax = np.nanmax(field)
    mesh = ax.pcolormesh(gx, gy, field, cmap="viridis", vmin=vmax - 70.0, vmax=vmax,
                         shading="auto")
    fig.colorbar(mesh, ax=ax, label="RSS [dBW]")
    ax.plot(*scenario.jammer.theta, "r*", markersize=14, label="jammer")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
