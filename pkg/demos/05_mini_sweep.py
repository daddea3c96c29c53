"""A scaled-down INR sweep through the full harness.

Ten Monte Carlo realizations per INR instead of one hundred, MLE plus APBM,
with the CRB overlay; writes results.csv and rmse_vs_inr.svg into
demos/mini_sweep_out/.  The full-size counterparts live in demos/configs/ and
run through the CLI.
"""

from pathlib import Path

from jamfield import EstimatorSpec, ExperimentConfig, emit_outputs, run_sweep
from jamfield.scenes import open_field_scene

cfg = ExperimentConfig(
    scenario=open_field_scene(),
    estimators=(
        EstimatorSpec("mle_pathloss", epochs=400, lr=0.05, n_starts=5),
        EstimatorSpec("apbm", beta=1.0, epochs=400, lr=0.01, n_starts=5),
    ),
    inr_grid_db=(0.0, 10.0, 20.0, 30.0),
    n_mc=10,
    master_seed=12,
)

result = run_sweep(cfg, workers=2)
out = Path(__file__).with_name("mini_sweep_out")
paths = emit_outputs(result, out)

print(f"wrote {', '.join(str(p) for p in paths)}\n")
print(f"{'INR [dB]':>9s} {'CRB [m]':>10s}" + "".join(f" {n:>14s}" for n in result.estimator_names))
for i, inr in enumerate(result.inr_grid_db):
    crb = (result.crb_rmse_m[i] ** 2).sum() ** 0.5
    row = f"{inr:9.1f} {crb:10.3f}"
    for e in range(len(result.estimator_names)):
        row += f" {(result.rmse_m[e, i] ** 2).sum() ** 0.5:14.3f}"
    print(row)
