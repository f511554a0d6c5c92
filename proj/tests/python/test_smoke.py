# Copyright 2026 The qphot Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import cmath
import math

import numpy as np
import pytest

import qphot


def test_decibels():
    assert qphot.squeezing_db(0.75) == pytest.approx(-3.257, abs=1e-3)
    assert qphot.strength_from_db(qphot.squeezing_db(1.5)) == pytest.approx(1.5)


def test_crystal_is_symplectic():
    s = qphot.crystal_symplectic(3, 0.5, 7)
    omega = np.kron(np.eye(3), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert np.allclose(s @ omega @ s.T, omega, atol=1e-10)


def test_forecast_beats_constant():
    cfg = qphot.ReservoirConfig()
    cfg.modes = 4
    raw = qphot.synthetic_series(1000, 0)
    series, lo, hi = qphot.normalize_min_max(raw, 0, 651)
    assert lo < hi
    res = qphot.forecast(cfg, series, washout=50, train=600, test=300)
    assert res["test_nmse"] < 0.5 * res["constant_test_nmse"]
    assert len(res["test_predictions"]) == 300


def test_rows_shape():
    cfg = qphot.ReservoirConfig()
    cfg.modes = 2
    rows = qphot.run_sequence(cfg, [0.1, 0.5, 0.9])
    assert rows.shape == (3, qphot.observable_count(2))


def test_config_errors_are_typed():
    cfg = qphot.ReservoirConfig()
    cfg.modes = 0
    with pytest.raises(qphot.ConfigError):
        qphot.run_sequence(cfg, [0.1])
    with pytest.raises(qphot.ConfigError):
        qphot.set_log_level("loud")
    assert issubclass(qphot.PhysicsError, qphot.Error)


def test_vacuum_steady_state():
    rho = qphot.steady_state(qphot.ResonatorParams(drive=0.0), 8)
    assert rho[0, 0] == pytest.approx(1.0)
    xs, ps, w = qphot.wigner(rho, extent=2.0, points=5)
    assert w[2, 2] == pytest.approx(1 / math.pi)


def test_lobes_and_symmetry():
    p = qphot.ResonatorParams(3, 4, 0.4, 13.02, 0.2)
    rho = qphot.steady_state(p, 32)
    beta2 = qphot.lobe_amplitude(p) ** 2
    assert abs(qphot.mean_photon(rho) / beta2 - 1) < 0.15
    assert qphot.mandel_q(rho) < 0
    rotated = qphot.rotate(rho, 2 * math.pi / 3)
    assert np.max(np.abs(rotated - rho)) < 1e-8


def test_spectrum_and_window():
    p = qphot.ResonatorParams(3, 3, 0.4, qphot.drive_for_mean_photon(3, 3, 0.2, 4.0), 0.2)
    eig = qphot.spectrum(p, 16, 4)
    assert abs(eig[0][0]) < 1e-8
    w = qphot.metastable_window(p, 16)
    assert w["gap_ratio"] > 10
    assert w["t_start"] < w["t_end"]


def test_trajectory_decays_without_drive():
    p = qphot.ResonatorParams(3, 3, 0.0, 0.0, 0.0)
    psi = qphot.coherent(1.5, 20)
    rec = qphot.mc_trajectory(psi, p, 30.0, 3)
    assert rec["mean_n"][0] == pytest.approx(2.25, rel=1e-6)
    assert rec["mean_n"][-1] < 1e-6
    assert all(ch == 0 for _, ch in rec["jumps"])


def test_evolve_matches_decay():
    p = qphot.ResonatorParams(3, 3, 0.0, 0.0, 0.0)
    rho0 = qphot.projector(qphot.coherent(1.0, 12))
    states = qphot.evolve(rho0, p, [0.0, 1.0])
    assert qphot.mean_photon(states[1]) == pytest.approx(math.exp(-1.0), rel=1e-8)
    assert abs(qphot.expect_a(states[1]) - cmath.exp(-0.5)) < 1e-8


def test_cli_in_process(tmp_path):
    qphot.set_log_level("off")
    out = tmp_path / "out"
    cfg = tmp_path / "run.ini"
    cfg.write_text("[qam]\ndrive = 0\nmin_cutoff = 8\n")
    assert qphot.run_cli(["check-convergence", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "convergence.csv").exists()
    assert qphot.run_cli(["check-convergence", "--bogus"]) == 2
