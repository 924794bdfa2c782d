"""Unit tests for artifact storage."""

from __future__ import annotations

import os

import numpy as np
import pytest

from src.afunction import alpha_grid, delta_a
from src.errors import ConfigError, PathDataError
from src.measure import SpectralMeasure, make_path, perturb_weights
from src.potential import builtin_potential
from src.reconstruct import reconstruct_at
from src.storage import (
    load_a_function,
    load_measure,
    load_path,
    load_potential,
    load_reconstruction,
    read_json,
    save_a_function,
    save_measure,
    save_path,
    save_potential,
    save_reconstruction,
    write_json,
)


@pytest.fixture
def measure():
    return SpectralMeasure([1.0, 4.0], [1.0 / 3.0, 2.0 / 7.0], {"source": "test", "J": 2})


def test_potential_file(tmp_path):
    """Samples come back bitwise with L, n and label."""
    pot = builtin_potential("quadratic", 3.7, 50)
    target = str(tmp_path / "pot.json")
    save_potential(target, pot)
    again = load_potential(target)
    assert np.array_equal(again.samples, pot.samples)
    assert again.length == pot.length
    assert again.label == "quadratic"


def test_measure_and_path_files(tmp_path, measure):
    """Measure and path files keep every double and the provenance."""
    save_measure(str(tmp_path / "measure.json"), measure)
    again = load_measure(str(tmp_path / "measure.json"))
    assert np.array_equal(again.weights, measure.weights)
    assert again.provenance == measure.provenance

    path = make_path(measure, perturb_weights(measure, {2: 0.1}), 1e-8)
    save_path(str(tmp_path / "path.json"), path)
    loaded = load_path(str(tmp_path / "path.json"))
    assert list(loaded.support) == [2]
    assert np.array_equal(loaded.target.weights, path.target.weights)


def test_a_function_csv(tmp_path, measure):
    """The alpha,A,residual table re-parses to the same doubles."""
    other = perturb_weights(measure, {1: 0.125})
    a = delta_a(other, measure, alpha_grid(1.5, 31))
    target = str(tmp_path / "afunc.csv")
    save_a_function(target, a)
    with open(target, encoding="utf-8") as f:
        assert f.readline().strip() == "alpha,A,residual"
    again = load_a_function(target)
    assert np.array_equal(again.alpha, a.alpha)
    assert np.array_equal(again.values, a.values)


def test_reconstruction_csv_and_sidecar(tmp_path, zero_box, zero_box_rank_one):
    """The reconstruction CSV holds x, V_t and the determinant track."""
    result = reconstruct_at(zero_box_rank_one, zero_box, 0.5)
    target = str(tmp_path / "reconstruct_t0.5.csv")
    save_reconstruction(target, result, {"t": 0.5})
    x, values, det = load_reconstruction(target)
    assert np.array_equal(values, result.potential.samples)
    assert np.array_equal(det, result.det_track)
    assert x[0] == 0.0
    assert read_json(str(tmp_path / "reconstruct_t0.5.json")) == {"t": 0.5}


def test_writes_leave_no_temporary_files(tmp_path, measure):
    """Only the final artifact remains in the directory."""
    save_measure(str(tmp_path / "nested" / "measure.json"), measure)
    assert os.listdir(tmp_path / "nested") == ["measure.json"]


def test_missing_and_malformed_files(tmp_path):
    """Unreadable inputs map to ConfigError."""
    with pytest.raises(ConfigError):
        read_json(str(tmp_path / "absent.json"))
    with pytest.raises(ConfigError):
        load_a_function(str(tmp_path / "absent.csv"))
    bad = tmp_path / "nan.json"
    bad.write_text('{"L": NaN}')
    with pytest.raises(ConfigError):
        read_json(str(bad))
    wrong = tmp_path / "wrong.csv"
    wrong.write_text("x,y,z\n1,2,3\n")
    with pytest.raises(ConfigError):
        load_a_function(str(wrong))


def test_non_finite_values_are_not_written(tmp_path):
    """NaN cannot reach a JSON artifact."""
    with pytest.raises(PathDataError):
        write_json(str(tmp_path / "bad.json"), {"value": float("nan")})
    assert not os.listdir(tmp_path)
