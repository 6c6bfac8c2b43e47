import json
import math
import os

import pytest

from ergostab.cli import cli_main, main
from ergostab.config import (
    ConfigError,
    build_map,
    build_region,
    config_hash,
    dumps_config,
    loads_config,
    merge_config,
)
from ergostab.experiments import SCENARIOS, default_config
from ergostab.maps import StandardMapCylinder, TorusRotation


class TestConfigFormat:
    def test_roundtrip_byte_identical(self):
        for scenario in SCENARIOS:
            cfg = default_config(scenario)
            text = dumps_config(cfg)
            again = dumps_config(loads_config(text))
            assert again == text
            assert loads_config(text) == cfg

    def test_hash_stable_and_sensitive(self):
        cfg = default_config("rotation_approximants")
        h1 = config_hash(cfg)
        assert h1 == config_hash(json.loads(json.dumps(cfg)))
        cfg2 = merge_config(cfg, {"seed": cfg["seed"] + 1})
        assert config_hash(cfg2) != h1

    def test_merge_is_deep(self):
        base = {"a": {"x": 1, "y": 2}, "b": 3}
        out = merge_config(base, {"a": {"y": 7}})
        assert out == {"a": {"x": 1, "y": 7}, "b": 3}
        assert base["a"]["y"] == 2  # untouched

    def test_float_serialization_roundtrips_exactly(self):
        cfg = {"v": (math.sqrt(5) - 1) / 2, "w": 1e-17, "n": 3}
        back = loads_config(dumps_config(cfg))
        assert back["v"] == cfg["v"] and back["w"] == cfg["w"] and back["n"] == 3

    def test_invalid_toml_rejected(self):
        with pytest.raises(ConfigError):
            loads_config("this is = not [ valid")

    def test_build_map_kinds(self):
        assert build_map({"kind": "torus_rotation", "alpha": 0.3, "beta": 0.4}) == \
            TorusRotation(0.3, 0.4)
        assert build_map({"kind": "standard_map_cylinder", "K": 8.0}) == \
            StandardMapCylinder(8.0)
        skew = build_map({"kind": "skew_product",
                          "base": {"kind": "standard_map_cylinder", "K": 4.0},
                          "frequencies": [0.3, 0.4], "amplitudes": [0.1, 0.1]})
        assert skew.base == StandardMapCylinder(4.0)
        with pytest.raises(ConfigError):
            build_map({"kind": "lorenz"})

    def test_build_region_shapes(self):
        box = build_region({"shape": "box", "intervals": [[0.0, 0.5], [0.0, 1.0]]})
        assert box.volume() == pytest.approx(0.5)
        disk = build_region({"shape": "disk", "center": [0.5, 0.5], "diameter": 0.1})
        assert disk.diameter == 0.1
        with pytest.raises(ConfigError):
            build_region({"shape": "pentagon"})


class TestCli:
    def test_list_names_all_scenarios(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        for name in SCENARIOS:
            assert name in out

    def test_unknown_scenario_exits_2(self, capsys):
        assert main(["experiment", "nonexistent", "--out", "/tmp/x"]) == 2

    def test_missing_config_exits_2_without_outputs(self, tmp_path):
        out = tmp_path / "results"
        code = main(["experiment", "rotation_approximants",
                     "--config", str(tmp_path / "absent.toml"), "--out", str(out)])
        assert code == 2
        assert not out.exists()

    def test_bad_threads_rejected(self, tmp_path):
        assert main(["experiment", "rotation_approximants", "--threads", "0",
                     "--out", str(tmp_path)]) == 2

    def test_simulate_visit_fraction(self, tmp_path, capsys):
        cfg = "\n".join([
            'seed = 5',
            '[simulate]',
            'estimator = "visit_fraction"',
            'horizon = 500',
            '[map]',
            'kind = "torus_rotation"',
            f'alpha = {(math.sqrt(5) - 1) / 2!r}',
            f'beta = {math.sqrt(2) - 1!r}',
            '[ensemble]',
            'count = 16',
            '[regions.source]',
            'shape = "disk"',
            'center = [0.3, 0.3]',
            'diameter = 0.2',
            '[regions.detector]',
            'shape = "box"',
            'intervals = [[0.0, 0.25], [0.0, 0.25]]',
        ])
        path = tmp_path / "sim.toml"
        path.write_text(cfg)
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "visit_fraction" in out
        assert (tmp_path / "simulate__simulate.csv").exists()

    def test_simulate_occupancy(self, tmp_path, capsys):
        cfg = "\n".join([
            'seed = 3',
            '[simulate]',
            'estimator = "occupancy_decay"',
            'horizons = [100, 1000]',
            '[map]',
            'kind = "standard_map_cylinder"',
            'K = 8.0',
            '[ensemble]',
            'count = 16',
            '[regions.source]',
            'shape = "box"',
            'topology = ["real", "periodic"]',
            'intervals = [[-0.5, 0.5], [0.0, 1.0]]',
            '[regions.trap]',
            'shape = "box"',
            'topology = ["real", "periodic"]',
            f'intervals = [[{-math.pi!r}, {math.pi!r}], [0.0, 1.0]]',
        ])
        path = tmp_path / "occ.toml"
        path.write_text(cfg)
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 0
        assert "N=1000" in capsys.readouterr().out

    def test_koopman_fourier_dump(self, tmp_path, capsys):
        cfg = "\n".join([
            '[koopman]',
            'basis = "fourier"',
            'cutoff = 4',
            '[map]',
            'kind = "torus_rotation"',
            'alpha = 0.37',
            'beta = 0.21',
            'alpha_rational = "3/8"',
        ])
        path = tmp_path / "koop.toml"
        path.write_text(cfg)
        assert main(["koopman", "--config", str(path), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "operator.npz").exists()
        out = capsys.readouterr().out
        assert "unitarity defect" in out

    def test_koopman_ulam_dump_csv(self, tmp_path):
        cfg = "\n".join([
            'seed = 11',
            '[koopman]',
            'basis = "ulam"',
            'samples_per_cell = 30',
            'n_op = 4096',
            'tol = 0.001',
            '[koopman.partition]',
            'cells = [8, 8]',
            '[map]',
            'kind = "standard_map_torus"',
            'K = 1.0',
        ])
        path = tmp_path / "ulam.toml"
        path.write_text(cfg)
        assert main(["koopman", "--config", str(path), "--out", str(tmp_path),
                     "--format", "csv"]) == 0
        assert (tmp_path / "operator.npz").exists()
        assert (tmp_path / "projector.npz").exists()
        assert (tmp_path / "operator.csv").exists()

    def test_cli_main_alias(self):
        assert cli_main(["list"]) == 0
