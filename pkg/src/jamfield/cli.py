"""Command-line front end: INR sweeps, CRB tables, and power-field maps."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .harness import emit_field_heatmap, emit_outputs, run_sweep


def _apply_overrides(cfg, args):
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if getattr(args, "out", None) is not None:
        cfg = dataclasses.replace(cfg, output_dir=str(args.out))
    return cfg


def _cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    result = run_sweep(cfg, workers=args.workers)
    paths = emit_outputs(result, cfg.output_dir, include_timing=args.timing)
    print(f"wrote {', '.join(str(p) for p in paths)}")
    for e, name in enumerate(result.estimator_names):
        worst = result.rmse_m[e].max()
        best = result.rmse_m[e].min()
        print(f"  {name}: per-dim RMSE {best:.3g}..{worst:.3g} m, "
              f"converged {result.converged_frac[e].mean():.0%}, "
              f"mean {result.mean_ms[e].mean():.0f} ms/fit")
    return 0


def _cmd_crb(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    cfg = dataclasses.replace(cfg, estimators=())
    result = run_sweep(cfg, workers=args.workers)
    dims = result.crb_rmse_m.shape[1]
    header = "inr_db" + "".join(f"  crb_rmse_dim{d+1}_m" for d in range(dims))
    print(header)
    for i, inr in enumerate(result.inr_grid_db):
        row = f"{inr:6.1f}" + "".join(f"  {result.crb_rmse_m[i, d]:16.6g}" for d in range(dims))
        print(row)
    return 0


def _cmd_field(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "field.png"
    emit_field_heatmap(cfg.scenario, path, grid_n=args.grid)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamfield",
        description="Simulate crowdsourced jammer RSS measurements and race "
                    "localization estimators against the Cramer-Rao bound.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the full INR sweep from a config file")
    run_p.add_argument("--config", required=True, help="experiment config (JSON)")
    run_p.add_argument("--out", default=None, help="output directory override")
    run_p.add_argument("--seed", type=int, default=None, help="master seed override")
    run_p.add_argument("--workers", type=int, default=None,
                       help="process pool size (default: serial)")
    run_p.add_argument("--timing", action="store_true",
                       help="write measured wall times into results.csv "
                            "(breaks byte-level reproducibility)")
    run_p.set_defaults(func=_cmd_run)

    crb_p = sub.add_parser("crb", help="print the CRB bound table for the sweep")
    crb_p.add_argument("--config", required=True)
    crb_p.add_argument("--seed", type=int, default=None)
    crb_p.add_argument("--workers", type=int, default=None)
    crb_p.set_defaults(func=_cmd_crb)

    field_p = sub.add_parser("field", help="emit the noiseless power-field heatmap")
    field_p.add_argument("--config", required=True)
    field_p.add_argument("--out", default=None)
    field_p.add_argument("--grid", type=int, default=201, help="heatmap grid resolution")
    field_p.set_defaults(func=_cmd_field)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
