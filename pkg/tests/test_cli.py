"""End-to-end tests of the command line through run_cli."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from src.cli import run_cli
from src.potential import builtin_potential
from src.storage import load_a_function, load_path, load_reconstruction, read_json, save_potential


def write_config(directory, **entries) -> str:
    document = {"potential": {"builtin": "zero", "L": math.pi, "n": 2000}, "J": 4}
    document.update(entries)
    target = directory / "job.json"
    target.write_text(json.dumps(document))
    return str(target)


def test_forward_zero_box(tmp_path):
    """forward writes E_j = j^2 and a_j = 2 j^2 / pi."""
    config = write_config(tmp_path, potential={"builtin": "zero", "L": math.pi, "n": 4000})
    assert run_cli(["forward", "--config", config, "--out", str(tmp_path / "out")]) == 0
    measure = read_json(str(tmp_path / "out" / "measure.json"))
    assert measure["eigenvalues"][0] == pytest.approx(1.0, abs=1e-8)
    assert measure["weights"][0] == pytest.approx(2.0 / math.pi, abs=1e-8)
    assert measure["eigenvalues"][1] == pytest.approx(4.0, abs=1e-8)
    assert measure["weights"][1] == pytest.approx(8.0 / math.pi, abs=1e-8)
    assert measure["provenance"]["J"] == 4
    report = read_json(str(tmp_path / "out" / "eigen_report.json"))
    assert len(report["eigenvalues"]) == 4


def test_missing_config_exits_with_two(tmp_path):
    """An absent configuration file is an I/O error."""
    assert run_cli(["forward", "--config", str(tmp_path / "nope.json")]) == 2


def test_unknown_potential_exits_with_two(tmp_path):
    """Invalid configuration content is reported with exit code 2."""
    config = write_config(tmp_path, potential={"builtin": "morse"})
    assert run_cli(["forward", "--config", config]) == 2


def test_path_command(tmp_path, capsys):
    """path writes the perturbed target; an impossible weight exits with 3."""
    config = write_config(tmp_path, perturbation={"1": 1.0}, output_dir="out")
    assert run_cli(["path", "--config", config]) == 0
    assert "support [1] " in capsys.readouterr().out
    path = load_path(str(tmp_path / "out" / "path.json"))
    assert list(path.support) == [1]
    assert path.target.weights[0] == pytest.approx(2.0 / math.pi + 1.0, rel=1e-7)

    bad = write_config(tmp_path, perturbation={"1": -(2.0 / math.pi + 0.1)})
    assert run_cli(["path", "--config", bad]) == 3


def test_afunc_command(tmp_path):
    """A_t vanishes at t = 0 and is linear in t."""
    config = write_config(tmp_path, perturbation={"1": 1.0}, t=[0.0, 0.5, 1.0])
    out = tmp_path / "out"
    assert run_cli(["afunc", "--config", config, "--out", str(out), "--alpha-n", "51"]) == 0
    start = load_a_function(str(out / "afunc_t0.csv"))
    half = load_a_function(str(out / "afunc_t0.5.csv"))
    end = load_a_function(str(out / "afunc_t1.csv"))
    assert start.alpha.size == 51
    assert np.all(start.values == 0.0)
    nonzero = half.values != 0.0
    assert np.any(nonzero)
    assert np.all(end.values[nonzero] / half.values[nonzero] == 2.0)


def test_reconstruct_at_zero_reproduces_potential(tmp_path):
    """reconstruct at t = 0 writes the potential file samples unchanged."""
    pot = builtin_potential("quadratic", 8.0, 1600)
    save_potential(str(tmp_path / "pot.json"), pot)
    config = write_config(
        tmp_path, potential={"file": "pot.json"}, J=5, perturbation={"2": 0.5}, t=[0.0]
    )
    out = tmp_path / "out"
    assert run_cli(["reconstruct", "--config", config, "--out", str(out)]) == 0
    x, values, det = load_reconstruction(str(out / "reconstruct_t0.csv"))
    assert np.array_equal(values, pot.samples)
    assert np.all(det == 1.0)
    sidecar = read_json(str(out / "reconstruct_t0.json"))
    assert sidecar["support"] == [2]


def test_verify_self_check_passes(tmp_path):
    """The unperturbed path certifies with exit code 0."""
    config = write_config(tmp_path, t=[0.0, 1.0])
    out = tmp_path / "out"
    assert run_cli(["verify", "--config", config, "--out", str(out)]) == 0
    report = read_json(str(out / "report.json"))
    assert report["pass"] is True
    assert [record["eig_dev"] for record in report["records"]] == [0.0, 0.0]


def test_verify_detects_foreign_potential(tmp_path):
    """A path from V = 0 checked against V = 0.5 fails with exit code 1."""
    base = tmp_path / "base"
    base.mkdir()
    assert run_cli(["path", "--config", write_config(base), "--out", str(base)]) == 0

    shifted = builtin_potential("zero", math.pi, 2000).shifted(0.5)
    save_potential(str(tmp_path / "shifted.json"), shifted)
    config = write_config(
        tmp_path, potential={"file": "shifted.json"}, path="base/path.json", t=[0.0]
    )
    out = tmp_path / "out"
    assert run_cli(["verify", "--config", config, "--out", str(out)]) == 1
    report = read_json(str(out / "report.json"))
    assert report["pass"] is False
    assert report["records"][0]["eig_dev"] == pytest.approx(0.5, rel=1e-6)


def test_malformed_potential_file_exits_with_two(tmp_path):
    """Potential files with non-list samples or a non-numeric L are configuration errors."""
    for index, record in enumerate(
        (
            {"L": 3.0, "n": 2, "samples": 5},
            {"L": 3.0, "n": 2, "samples": [{}, {}, {}]},
            {"L": "x", "n": 2, "samples": [0.0, 0.0, 0.0]},
        )
    ):
        name = f"pot{index}.json"
        (tmp_path / name).write_text(json.dumps(record))
        config = write_config(tmp_path, potential={"file": name})
        assert run_cli(["forward", "--config", config, "--out", str(tmp_path / "out")]) == 2


def test_afunc_regularized_on_linear_potential(tmp_path):
    """--regularized writes Richardson residuals below 1e-3 for V = x."""
    config = write_config(
        tmp_path,
        potential={"builtin": "linear", "L": 40.0, "n": 4000},
        J=10,
        perturbation={"1": 0.1},
        t=[0.0, 1.0],
    )
    out = tmp_path / "out"
    argv = ["afunc", "--config", config, "--out", str(out), "--alpha-n", "21", "--regularized"]
    assert run_cli(argv) == 0
    for tag in ("t0", "t1"):
        a_function = load_a_function(str(out / f"afunc_regularized_{tag}.csv"), kind="regularized")
        assert a_function.alpha.size == 21
        assert a_function.alpha[0] > 0.0
        assert np.all(np.isfinite(a_function.values))
        assert np.max(a_function.residuals) < 1e-3


def test_pipeline_output_is_byte_identical(tmp_path):
    """Two runs of forward and reconstruct write identical files."""
    config = write_config(tmp_path, perturbation={"1": 1.0}, t=[0.0, 0.5, 1.0])
    runs = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert run_cli(["forward", "--config", config, "--out", str(out)]) == 0
        assert run_cli(["reconstruct", "--config", config, "--out", str(out)]) == 0
        runs.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    assert sorted(runs[0]) == sorted(runs[1])
    assert "reconstruct_t0.5.csv" in runs[0]
    assert runs[0] == runs[1]
