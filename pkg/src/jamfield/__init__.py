"""Crowdsourced GNSS-jammer localization sandbox.

Simulates received-signal-strength measurement campaigns under pathloss and
urban ray-traced propagation, and localizes the source with a family of
estimators (pathloss MLE, augmented physics-based model, network-only),
benchmarked against the analytic Cramer-Rao bound.
"""

from .crb import CrbReport, FisherMatrix, crb_2d, fim_numeric, fim_pathloss
from .estimators import (
    EstimateReport,
    EstimatorSpec,
    apbm_cost,
    apbm_fit,
    log_likelihood,
    mle_estimate,
    run_estimator,
)
from .field import (
    Dataset,
    JammerParams,
    Observation,
    Rect,
    SingularGeometryError,
    clamped_rss,
    clamped_rss_grad_theta,
    distance,
    pathloss_rss,
)
from .harness import (
    ExperimentConfig,
    SweepResult,
    emit_field_heatmap,
    emit_outputs,
    rmse_per_dimension,
    run_sweep,
)
from .mlp import (
    AdamState,
    MlpParams,
    adam_init,
    adam_step,
    init_mlp_params,
    load_mlp_params,
    mlp_forward,
    mlp_gradient,
    param_count,
    save_mlp_params,
)
from .scenes import open_field_scene, urban_polygons, urban_street_scene
from .propagation import (
    BuildingMap,
    RayTraceError,
    ScenarioConfig,
    generate_dataset,
    noiseless_rss,
    raytrace_rss,
    raytrace_rss_batch,
    sample_observers,
    sigma_from_inr,
    trace_paths,
)

__version__ = "0.1.0"
