"""Versioned JSON experiment configuration.

Schema (version 1):

    {
      "version": 1,
      "scenario": {
        "jammer": {"theta": [x, y], "p0_dbw": 10.0, "gamma": 2.0},
        "area": [xmin, xmax, ymin, ymax],
        "n_samples": 10000,
        "top_k": 15,
        "inr_db": 20.0,
        "regime": "pathloss" | "raytrace",
        "d_f": 1.0,                      # optional, default 1.0
        "rng_seed": 0,                   # optional, default 0
        "buildings": {                   # raytrace only
          "polygons": [[[x, y], ...], ...],
          "reflection_loss_db": 6.0,
          "max_reflections": 2,
          "no_path_floor_dbw": -200.0    # optional
        }
      },
      "estimators": [
        {"kind": "mle_pathloss", "epochs": 400, "lr": 0.05, "n_starts": 5,
         "beta": 1.0, "seed": 0,
         "init": {"theta": [x, y], "p0_dbw": -10.0, "gamma": 2.0}}  # optional
      ],
      "sweep": {
        "inr_grid_db": [0, 5, 10, 15, 20, 25, 30],
        "n_mc": 100,
        "master_seed": 0,
        "output_dir": "out"
      }
    }

Unknown keys raise, so typos fail loudly instead of silently using defaults.
"""

from __future__ import annotations

import json
from pathlib import Path

from .estimators import EstimatorSpec
from .field import JammerParams, Rect
from .harness import ExperimentConfig
from .propagation import NO_PATH_FLOOR_DBW, BuildingMap, ScenarioConfig

CONFIG_VERSION = 1


def _check_keys(block: dict, allowed, where: str) -> None:
    extra = set(block) - set(allowed)
    if extra:
        raise ValueError(f"unknown key(s) {sorted(extra)} in {where}")


def _jammer_from(block: dict, where: str) -> JammerParams:
    _check_keys(block, {"theta", "p0_dbw", "gamma"}, where)
    return JammerParams(theta=block["theta"], p0=float(block["p0_dbw"]),
                        gamma=float(block["gamma"]))


def _buildings_from(block: dict) -> BuildingMap:
    _check_keys(block, {"polygons", "reflection_loss_db", "max_reflections",
                        "no_path_floor_dbw"}, "scenario.buildings")
    return BuildingMap(
        polygons=tuple(block["polygons"]),
        reflection_loss_db=float(block.get("reflection_loss_db", 6.0)),
        max_reflections=int(block.get("max_reflections", 2)),
        no_path_floor_dbw=float(block.get("no_path_floor_dbw", NO_PATH_FLOOR_DBW)),
    )


def scenario_from_dict(block: dict) -> ScenarioConfig:
    _check_keys(block, {"jammer", "area", "n_samples", "top_k", "inr_db", "regime",
                        "d_f", "rng_seed", "buildings"}, "scenario")
    xmin, xmax, ymin, ymax = (float(v) for v in block["area"])
    buildings = None
    if "buildings" in block:
        buildings = _buildings_from(block["buildings"])
    return ScenarioConfig(
        jammer=_jammer_from(block["jammer"], "scenario.jammer"),
        area=Rect(xmin, xmax, ymin, ymax),
        n_samples=int(block["n_samples"]),
        top_k=int(block["top_k"]),
        inr_db=float(block["inr_db"]),
        regime=block.get("regime", "pathloss"),
        buildings=buildings,
        d_f=float(block.get("d_f", 1.0)),
        rng_seed=int(block.get("rng_seed", 0)),
    )


def estimator_from_dict(block: dict) -> EstimatorSpec:
    _check_keys(block, {"kind", "beta", "epochs", "lr", "n_starts", "seed", "init",
                        "hidden"}, "estimators[]")
    init = None
    if "init" in block:
        init = _jammer_from(block["init"], "estimators[].init")
    kwargs = {k: block[k] for k in ("beta", "epochs", "lr", "n_starts", "seed")
              if k in block}
    if "hidden" in block:
        kwargs["hidden"] = tuple(int(h) for h in block["hidden"])
    return EstimatorSpec(kind=block["kind"], init=init, **kwargs)


def config_from_dict(doc: dict) -> ExperimentConfig:
    _check_keys(doc, {"version", "scenario", "estimators", "sweep"}, "config")
    version = doc.get("version")
    if version != CONFIG_VERSION:
        raise ValueError(f"unsupported config version {version!r}")
    sweep = doc["sweep"]
    _check_keys(sweep, {"inr_grid_db", "n_mc", "master_seed", "output_dir"}, "sweep")
    return ExperimentConfig(
        scenario=scenario_from_dict(doc["scenario"]),
        estimators=tuple(estimator_from_dict(b) for b in doc.get("estimators", [])),
        inr_grid_db=tuple(float(v) for v in sweep["inr_grid_db"]),
        n_mc=int(sweep["n_mc"]),
        output_dir=str(sweep.get("output_dir", "out")),
        master_seed=int(sweep.get("master_seed", 0)),
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def config_to_dict(cfg: ExperimentConfig) -> dict:
    scen = cfg.scenario
    scenario = {
        "jammer": {
            "theta": scen.jammer.theta.tolist(),
            "p0_dbw": scen.jammer.p0,
            "gamma": scen.jammer.gamma,
        },
        "area": [scen.area.xmin, scen.area.xmax, scen.area.ymin, scen.area.ymax],
        "n_samples": scen.n_samples,
        "top_k": scen.top_k,
        "inr_db": scen.inr_db,
        "regime": scen.regime,
        "d_f": scen.d_f,
        "rng_seed": scen.rng_seed,
    }
    if scen.buildings is not None:
        scenario["buildings"] = {
            "polygons": [p.tolist() for p in scen.buildings.polygons],
            "reflection_loss_db": scen.buildings.reflection_loss_db,
            "max_reflections": scen.buildings.max_reflections,
            "no_path_floor_dbw": scen.buildings.no_path_floor_dbw,
        }
    estimators = []
    for spec in cfg.estimators:
        block = {
            "kind": spec.kind,
            "beta": spec.beta,
            "epochs": spec.epochs,
            "lr": spec.lr,
            "n_starts": spec.n_starts,
            "seed": spec.seed,
        }
        if spec.hidden != (200, 100):
            block["hidden"] = list(spec.hidden)
        if spec.init is not None:
            block["init"] = {
                "theta": spec.init.theta.tolist(),
                "p0_dbw": spec.init.p0,
                "gamma": spec.init.gamma,
            }
        estimators.append(block)
    return {
        "version": CONFIG_VERSION,
        "scenario": scenario,
        "estimators": estimators,
        "sweep": {
            "inr_grid_db": list(cfg.inr_grid_db),
            "n_mc": cfg.n_mc,
            "master_seed": cfg.master_seed,
            "output_dir": cfg.output_dir,
        },
    }


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")
