import json
import math

import numpy as np
import pytest

from su11tomo.simulation import (
    GridSpec,
    MeasurementRecord,
    NoiseMode,
    NoiseSpec,
    add_noise,
    sample_exact,
)
from su11tomo.states import DensityMatrix, state_perelomov


@pytest.fixture(scope="module")
def vacuum():
    return DensityMatrix(q=0, n_max=0, elements=[[1.0]])


def test_grid_points():
    g = GridSpec()
    y = g.y_values
    assert y.size == 101 and y[0] == 0.1 and y[-1] == pytest.approx(0.9, abs=1e-16)
    assert y[50] == pytest.approx(0.5, abs=1e-16)
    np.testing.assert_allclose(g.phi_values, 2 * np.pi * np.arange(20) / 20)


@pytest.mark.parametrize("kw", [dict(y_min=0.0), dict(y_max=1.0), dict(y_min=0.5, y_max=0.4),
                                dict(n_y=1), dict(n_phi=0)])
def test_grid_invariants(kw):
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_noise_spec_invariants():
    with pytest.raises(ValueError):
        NoiseSpec(tau=0)
    with pytest.raises(ValueError):
        NoiseSpec(seed=-1)
    assert NoiseSpec(mode="paper").mode is NoiseMode.PAPER_LITERAL


def test_exact_vacuum_record(vacuum):
    rec = sample_exact(vacuum, 0)
    expected = (1 - GridSpec().y_values)[:, None] * np.ones((1, 20))
    np.testing.assert_allclose(rec.values, expected, rtol=1e-15)
    assert rec.noise.mode is NoiseMode.EXACT


def test_charge_mismatch_rejected(vacuum):
    with pytest.raises(ValueError):
        sample_exact(vacuum, 1)


def test_exact_perelomov_matches_closed_form():
    eta = 0.6
    rho = state_perelomov(eta, 0, 120)
    rec = sample_exact(rho, 0)
    g = rec.grid
    y, phi = np.meshgrid(g.y_values, g.phi_values, indexing="ij")
    ref = (1 - y) * (1 - eta**2) / np.abs(1 - eta * np.sqrt(y) * np.exp(-1j * phi)) ** 2
    np.testing.assert_allclose(rec.values, ref, rtol=0, atol=1e-12)


def test_record_file_round_trip(tmp_path):
    rho = state_perelomov(0.5 + 0.2j, 1, 8)
    rec = add_noise(sample_exact(rho, 1, GridSpec(n_y=11, n_phi=7)), NoiseSpec(seed=3))
    path = tmp_path / "rec.json"
    rec.save(path)
    back = MeasurementRecord.load(path)
    np.testing.assert_array_equal(back.values, rec.values)
    assert back.noise == rec.noise and back.grid == rec.grid
    data = json.loads(path.read_text())
    assert set(data) == {"q", "grid", "noise", "values"}
    assert set(data["grid"]) == {"y_min", "y_max", "n_y", "n_phi"}
    assert set(data["noise"]) == {"mode", "tau", "seed"}


def test_record_csv(tmp_path):
    rec = sample_exact(DensityMatrix(q=0, n_max=0, elements=[[1.0]]), 0, GridSpec(n_y=3, n_phi=2))
    rec.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "y,phi,value"
    assert len(lines) == 1 + 6
    y, phi, v = map(float, lines[3].split(","))
    assert (y, phi) == (0.5, 0.0) and v == 0.5


@pytest.mark.parametrize("mode", ["shot", "paper"])
def test_infinite_tau_limit(vacuum, mode):
    rec = sample_exact(vacuum, 0)
    noisy = add_noise(rec, NoiseSpec(mode=mode, tau=10**300, seed=1))
    np.testing.assert_array_equal(noisy.values, rec.values)


def test_shot_noise_zero_probability_stays_zero():
    rec = MeasurementRecord(q=0, grid=GridSpec(n_y=2, n_phi=2), noise=NoiseSpec(mode="exact"),
                            values=np.zeros((2, 2)))
    assert np.all(add_noise(rec, NoiseSpec(seed=5)).values == 0)


def test_shot_noise_calibration(vacuum):
    rec = sample_exact(vacuum, 0)
    noisy = add_noise(rec, NoiseSpec(mode="shot", tau=20000, seed=11))
    v = rec.values
    z = (noisy.values - v) / np.sqrt(v * (1 - v) / 20000)
    assert 0.9 <= z.std() <= 1.1


def test_determinism():
    rho = state_perelomov(0.4, 0, 10)
    rec = sample_exact(rho, 0)
    for mode in ("shot", "paper"):
        a = add_noise(rec, NoiseSpec(mode=mode, seed=2024))
        b = add_noise(rec, NoiseSpec(mode=mode, seed=2024))
        c = add_noise(rec, NoiseSpec(mode=mode, seed=2025))
        assert a.values.tobytes() == b.values.tobytes()
        assert not np.array_equal(a.values, c.values)


def test_add_noise_requires_exact_record(vacuum):
    noisy = add_noise(sample_exact(vacuum, 0), NoiseSpec(seed=1))
    with pytest.raises(ValueError):
        add_noise(noisy, NoiseSpec(seed=2))


def test_moment_mode_keeps_values_exact(vacuum):
    rec = sample_exact(vacuum, 0)
    tagged = add_noise(rec, NoiseSpec(mode="moments", seed=1))
    np.testing.assert_array_equal(tagged.values, rec.values)
    assert tagged.noise.mode is NoiseMode.PAPER_MOMENTS


@pytest.mark.parametrize("mode", ["shot", "paper"])
def test_noise_unbiased(mode):
    # 10^4 draws at one grid point (value 0.3), 20000 trials each.
    v0 = 0.3
    grid = GridSpec(n_y=100, n_phi=100)
    rec = MeasurementRecord(q=0, grid=grid, noise=NoiseSpec(mode="exact"),
                            values=np.full((100, 100), v0))
    d = (add_noise(rec, NoiseSpec(mode=mode, seed=99)).values - v0).ravel()
    se = d.std(ddof=1) / math.sqrt(d.size)
    assert abs(d.mean()) < 3 * se


def test_paper_literal_noise_scales_with_sqrt_value():
    # E|R g| = E|R| E|g| = 0.5 * sqrt(2/pi); regress |dv| on sqrt(v/tau) through the origin.
    grid = GridSpec(n_y=200, n_phi=50)
    v = np.linspace(0.01, 0.99, 200)[:, None] * np.ones((1, 50))
    rec = MeasurementRecord(q=0, grid=grid, noise=NoiseSpec(mode="exact"), values=v)
    tau = 20000
    d = np.abs(add_noise(rec, NoiseSpec(mode="paper", tau=tau, seed=4)).values - v).ravel()
    x = np.sqrt(v.ravel() / tau)
    slope = (x @ d) / (x @ x)
    assert slope == pytest.approx(0.5 * math.sqrt(2 / math.pi), rel=0.05)
    # magnitude proportional to sqrt(v): the binned ratio is flat
    lo = d[x < np.median(x)].mean() / x[x < np.median(x)].mean()
    hi = d[x >= np.median(x)].mean() / x[x >= np.median(x)].mean()
    assert lo == pytest.approx(hi, rel=0.1)
