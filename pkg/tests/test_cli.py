import json

import numpy as np
import pytest

from jamfield.cli import main
from jamfield.config import config_from_dict, config_to_dict, load_config, save_config
from jamfield.estimators import EstimatorSpec
from jamfield.field import JammerParams, Rect
from jamfield.harness import CSV_HEADER, ExperimentConfig
from jamfield.propagation import BuildingMap, ScenarioConfig


def tiny_config_dict(out_dir):
    return {
        "version": 1,
        "scenario": {
            "jammer": {"theta": [400.0, 600.0], "p0_dbw": 10.0, "gamma": 2.0},
            "area": [0.0, 1000.0, 0.0, 1000.0],
            "n_samples": 300,
            "top_k": 8,
            "inr_db": 20.0,
            "regime": "pathloss",
        },
        "estimators": [
            {"kind": "mle_pathloss", "epochs": 40, "lr": 0.05, "n_starts": 2},
        ],
        "sweep": {
            "inr_grid_db": [10.0, 20.0],
            "n_mc": 2,
            "master_seed": 5,
            "output_dir": str(out_dir),
        },
    }


class TestConfig:
    def test_round_trip(self, tmp_path):
        bmap = BuildingMap(([(10.0, 10.0), (20.0, 10.0), (20.0, 20.0), (10.0, 20.0)],),
                           reflection_loss_db=3.0, max_reflections=2)
        cfg = ExperimentConfig(
            scenario=ScenarioConfig(
                jammer=JammerParams([100.0, 100.0], 10.0, 2.0),
                area=Rect(0.0, 200.0, 0.0, 200.0),
                n_samples=100,
                top_k=5,
                inr_db=15.0,
                regime="raytrace",
                buildings=bmap,
            ),
            estimators=(
                EstimatorSpec("apbm", beta=1.0, epochs=100, lr=0.01, n_starts=2,
                              init=JammerParams([50.0, 50.0], -10.0, 2.0)),
            ),
            inr_grid_db=(10.0, 20.0),
            n_mc=4,
            output_dir="somewhere",
            master_seed=42,
        )
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        loaded = load_config(path)
        assert loaded.master_seed == 42
        assert loaded.scenario.regime == "raytrace"
        assert loaded.scenario.buildings.reflection_loss_db == 3.0
        assert loaded.estimators[0].init.p0 == -10.0
        np.testing.assert_array_equal(loaded.scenario.jammer.theta, [100.0, 100.0])
        assert config_to_dict(loaded) == config_to_dict(cfg)

    def test_unknown_key_rejected(self, tmp_path):
        doc = tiny_config_dict(tmp_path)
        doc["scenario"]["frequency_ghz"] = 1.5
        with pytest.raises(ValueError, match="frequency_ghz"):
            config_from_dict(doc)

    def test_version_check(self, tmp_path):
        doc = tiny_config_dict(tmp_path)
        doc["version"] = 99
        with pytest.raises(ValueError, match="version"):
            config_from_dict(doc)


class TestCli:
    def test_run_command(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_config_dict(tmp_path / "out")))
        assert main(["run", "--config", str(cfg_path)]) == 0
        csv_text = (tmp_path / "out" / "results.csv").read_text()
        assert csv_text.startswith(CSV_HEADER)
        assert (tmp_path / "out" / "rmse_vs_inr.svg").exists()

    def test_run_overrides(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_config_dict(tmp_path / "ignored")))
        out = tmp_path / "forced"
        assert main(["run", "--config", str(cfg_path), "--out", str(out),
                     "--seed", "9", "--workers", "2"]) == 0
        assert (out / "results.csv").exists()

    def test_crb_command(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_config_dict(tmp_path / "out")))
        assert main(["crb", "--config", str(cfg_path)]) == 0
        captured = capsys.readouterr().out
        assert "crb_rmse_dim1_m" in captured
        assert len(captured.strip().split("\n")) == 3  # header + 2 INR rows

    def test_field_command(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_config_dict(tmp_path / "out")))
        assert main(["field", "--config", str(cfg_path), "--grid", "51"]) == 0
        assert (tmp_path / "out" / "field.png").exists()
