"""State-space model handling: discretization, frequency response,
simulation, input synthesis, noise, and file formats."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

import oracles
from foloc.errors import ConfigurationError, IllConditionedError
from foloc.lti import (ContinuousModel, DiscreteModel, ForcedInputConfig,
                       SinusoidSpec, add_noise, discretize, generate_input,
                       load_input_config, load_model_csv, load_model_json,
                       save_input_config, save_model_json, simulate,
                       transfer_at)


def _stable_dense(seed: int, n: int) -> np.ndarray:
    # shifted random matrix, eigenvalues pushed left of the axis
    g = np.random.default_rng(seed)
    A = g.standard_normal((n, n))
    return A - (np.max(np.abs(np.linalg.eigvals(A))) + 0.5) * np.eye(n)


# ---------------------------------------------------------------------------
# discretize


def test_discretize_integrator_limit():
    model = ContinuousModel(A=[[0.0]], B=[[1.0]], C=[[1.0]],
                            check_stability=False)
    d = discretize(model, 0.5, check_stability=False)
    assert_allclose(d.A_d, [[1.0]])
    assert_allclose(d.B_d, [[0.5]])


def test_discretize_nilpotent_closed_form():
    model = ContinuousModel(A=[[0.0, 1.0], [0.0, 0.0]], B=[[0.0], [1.0]],
                            C=[[1.0, 0.0]], check_stability=False)
    d = discretize(model, 1.0, check_stability=False)
    assert_allclose(d.A_d, [[1.0, 1.0], [0.0, 1.0]])
    assert_allclose(d.B_d, [[0.5], [1.0]])


def test_discretize_scalar_closed_form():
    model = ContinuousModel(A=[[-1.0]], B=[[1.0]], C=[[1.0]])
    d = discretize(model, 1.0)
    assert_allclose(d.A_d, [[np.exp(-1.0)]], rtol=1e-14)
    assert_allclose(d.B_d, [[1.0 - np.exp(-1.0)]], rtol=1e-14)


def test_discretize_matches_series_oracle():
    A = _stable_dense(3, 8)
    B = np.random.default_rng(4).standard_normal((8, 3))
    model = ContinuousModel(A=A, B=B, C=np.eye(8))
    d = discretize(model, 1.0 / 30.0)
    A_ref, B_ref = oracles.zoh_discretize_series(A, B, 1.0 / 30.0)
    assert_allclose(d.A_d, A_ref, atol=1e-10)
    assert_allclose(d.B_d, B_ref, atol=1e-10)


def test_discretize_rejects_bad_period():
    model = ContinuousModel(A=[[-1.0]], B=[[1.0]], C=[[1.0]])
    with pytest.raises(ConfigurationError):
        discretize(model, 0.0)


def test_unstable_model_rejected():
    with pytest.raises(ConfigurationError):
        ContinuousModel(A=[[0.2]], B=[[1.0]], C=[[1.0]])
    with pytest.raises(ConfigurationError):
        DiscreteModel(A_d=[[1.01]], B_d=[[1.0]], C=[[1.0]], T=0.1)


# ---------------------------------------------------------------------------
# transfer_at


def test_transfer_scalar_dc():
    d = DiscreteModel(A_d=[[0.5]], B_d=[[1.0]], C=[[2.0]], T=1.0)
    assert_allclose(transfer_at(d, 0.0), [[4.0 + 0.0j]], rtol=1e-14)


def test_transfer_scalar_closed_form():
    a, b, c = 0.73, 1.4, -0.6
    d = DiscreteModel(A_d=[[a]], B_d=[[b]], C=[[c]], T=0.1)
    for omega in (0.0, 0.3, 1.1, np.pi):
        expected = c * b / (np.exp(1j * omega) - a)
        assert_allclose(transfer_at(d, omega)[0, 0], expected, rtol=1e-12)


def test_transfer_conjugate_symmetry(small_model):
    for omega in (0.1, 0.7, 2.0):
        H_pos = transfer_at(small_model, omega)
        H_neg = transfer_at(small_model, -omega)
        assert_allclose(H_pos, np.conj(H_neg), rtol=1e-12)


def test_transfer_matches_dense_inverse_oracle():
    g = np.random.default_rng(11)
    A_d = 0.8 * g.standard_normal((2, 2))
    A_d /= 2.0 * np.max(np.abs(np.linalg.eigvals(A_d)))
    B_d = g.standard_normal((2, 3))
    C = g.standard_normal((2, 2))
    d = DiscreteModel(A_d=A_d, B_d=B_d, C=C, T=0.5)
    for omega in (0.0, 0.4, 1.9):
        assert_allclose(transfer_at(d, omega),
                        oracles.dense_transfer(A_d, B_d, C, omega),
                        atol=1e-12)


def test_transfer_near_singular_raises():
    # eigenvalue within 1e-16 of the unit circle at z=1
    d = DiscreteModel(A_d=np.diag([1.0 - 1e-16, 0.0]), B_d=np.eye(2),
                      C=np.eye(2), T=1.0, check_stability=False)
    with pytest.raises(IllConditionedError):
        transfer_at(d, 0.0)


# ---------------------------------------------------------------------------
# generate_input


def test_generate_input_phase_offset():
    config = ForcedInputConfig(num_channels=2, sinusoids=[
        SinusoidSpec(location=0, amplitude=1.0, frequency_hz=0.7,
                     phase_rad=np.pi / 2)])
    u = generate_input(config, 0.01, np.arange(4))
    assert u.shape == (2, 4)
    assert u[0, 0] == pytest.approx(1.0)
    assert np.all(u[1] == 0.0)


def test_generate_input_empty_config():
    u = generate_input(ForcedInputConfig(num_channels=3), 0.1, np.arange(5))
    assert u.shape == (3, 5)
    assert np.all(u == 0.0)


def test_generate_input_antiphase_cancels():
    sins = [SinusoidSpec(location=1, amplitude=0.4, frequency_hz=1.0,
                         phase_rad=0.3),
            SinusoidSpec(location=1, amplitude=0.4, frequency_hz=1.0,
                         phase_rad=0.3 + np.pi)]
    u = generate_input(ForcedInputConfig(num_channels=2, sinusoids=sins),
                       0.02, np.arange(50))
    assert_allclose(u[1], 0.0, atol=1e-15)


def test_generate_input_rejects_super_nyquist():
    config = ForcedInputConfig(num_channels=1, sinusoids=[
        SinusoidSpec(location=0, amplitude=1.0, frequency_hz=16.0)])
    with pytest.raises(ConfigurationError):
        generate_input(config, 1.0 / 30.0, np.arange(10))


def test_sinusoid_spec_validation():
    with pytest.raises(ConfigurationError):
        SinusoidSpec(location=-1, amplitude=1.0, frequency_hz=1.0)
    with pytest.raises(ConfigurationError):
        SinusoidSpec(location=0, amplitude=-0.1, frequency_hz=1.0)
    with pytest.raises(ConfigurationError):
        SinusoidSpec(location=0, amplitude=1.0, frequency_hz=0.0)


# ---------------------------------------------------------------------------
# simulate


def test_simulate_zero_input_zero_output(small_model):
    u = np.zeros((small_model.m, 40))
    assert np.all(simulate(small_model, u) == 0.0)


def test_simulate_unit_delay():
    d = DiscreteModel(A_d=[[0.0]], B_d=[[1.0]], C=[[1.0]], T=1.0)
    y = simulate(d, np.array([[1.0, 1.0, 1.0]]))
    assert_allclose(y, [[0.0, 1.0, 1.0]])


def test_simulate_linearity(small_model, rng):
    u1 = rng.standard_normal((small_model.m, 60))
    u2 = rng.standard_normal((small_model.m, 60))
    lhs = simulate(small_model, u1 + u2)
    rhs = simulate(small_model, u1) + simulate(small_model, u2)
    assert_allclose(lhs, rhs, atol=1e-12)


def test_simulate_steady_state_matches_transfer(small_model):
    # single sinusoid; after the transient the per-channel amplitude
    # equals the transfer-entry modulus times the input amplitude
    f, a, loc = 1.2, 0.5, 2
    T = small_model.T
    omega = 2.0 * np.pi * f * T
    rho = small_model.spectral_radius
    settle = int(np.ceil(5.0 * 1.0 / -np.log(rho)))  # 5 time constants
    period = int(round(1.0 / (f * T)))
    num = settle + 40 * period
    config = ForcedInputConfig(num_channels=small_model.m, sinusoids=[
        SinusoidSpec(location=loc, amplitude=a, frequency_hz=f)])
    y = simulate(small_model, generate_input(config, T, np.arange(num)))
    H = transfer_at(small_model, omega)
    tail = y[:, settle:]
    for ch in range(small_model.p):
        est = 0.5 * (tail[ch].max() - tail[ch].min())
        assert est == pytest.approx(a * abs(H[ch, loc]), rel=0.01)


def test_simulate_matches_rk4_oracle():
    A = _stable_dense(21, 6)
    g = np.random.default_rng(22)
    B = g.standard_normal((6, 2))
    C = g.standard_normal((3, 6))
    T = 1.0 / 30.0
    u = g.standard_normal((2, 90))
    d = discretize(ContinuousModel(A=A, B=B, C=C), T)
    y = simulate(d, u)
    y_ref = oracles.rk4_zoh_outputs(A, B, C, u, T, substeps=400)
    scale = np.max(np.abs(y_ref))
    assert np.max(np.abs(y - y_ref)) / scale < 1e-8


def test_simulate_initial_state():
    d = DiscreteModel(A_d=[[0.5]], B_d=[[1.0]], C=[[1.0]], T=1.0)
    y = simulate(d, np.zeros((1, 3)), x0=np.array([2.0]))
    assert_allclose(y, [[2.0, 1.0, 0.5]])


# ---------------------------------------------------------------------------
# add_noise


def test_add_noise_disabled_at_infinite_snr(small_model, rng):
    y = rng.standard_normal((3, 100))
    out = add_noise(y, np.inf, seed=5)
    assert out is not y
    assert np.array_equal(out, y)


def test_add_noise_variance_calibration():
    c = 3.0
    y = np.full((1, 100_000), c)
    noisy = add_noise(y, 10.0, seed=42)
    var = np.var(noisy - y)
    assert var == pytest.approx(c * c / 10.0, rel=0.05)


def test_add_noise_deterministic():
    y = np.random.default_rng(1).standard_normal((2, 500))
    assert np.array_equal(add_noise(y, 10.0, seed=9),
                          add_noise(y, 10.0, seed=9))
    assert not np.array_equal(add_noise(y, 10.0, seed=9),
                              add_noise(y, 10.0, seed=10))


def test_add_noise_zero_channel_stays_clean():
    y = np.zeros((2, 200))
    y[1] = 1.0
    noisy = add_noise(y, 10.0, seed=0)
    assert np.all(noisy[0] == 0.0)
    assert np.any(noisy[1] != 1.0)


def test_add_noise_power_window():
    # reference power taken over the tail window only
    y = np.concatenate([np.zeros(5000), np.full(5000, 2.0)])[None, :]
    noisy = add_noise(y, 10.0, seed=3, power_window=(5000, 10000))
    var = np.var((noisy - y)[0])
    assert var == pytest.approx(4.0 / 10.0, rel=0.05)


# ---------------------------------------------------------------------------
# file formats


def test_model_json_round_trip(tmp_path):
    model = ContinuousModel(A=[[-1.0, 0.2], [0.0, -2.0]],
                            B=[[1.0], [0.5]], C=[[1.0, 0.0]])
    path = tmp_path / "model.json"
    save_model_json(model, path)
    loaded = load_model_json(path)
    assert_allclose(loaded.A, model.A)
    assert_allclose(loaded.B, model.B)
    assert_allclose(loaded.C, model.C)


def test_model_json_schema(tmp_path):
    model = ContinuousModel(A=[[-1.0]], B=[[1.0]], C=[[2.0]])
    path = tmp_path / "model.json"
    save_model_json(model, path)
    raw = json.loads(path.read_text())
    assert set(raw) == {"A", "B", "C"}
    assert raw["C"] == [[2.0]]


def test_model_csv_load(tmp_path):
    a, b, c = tmp_path / "A.csv", tmp_path / "B.csv", tmp_path / "C.csv"
    a.write_text("-1.0,0.2\n0.0,-2.0\n")
    b.write_text("1.0\n0.5\n")
    c.write_text("1.0,0.0\n")
    model = load_model_csv(a, b, c)
    assert model.n == 2 and model.m == 1 and model.p == 1


def test_input_config_round_trip(tmp_path):
    config = ForcedInputConfig(num_channels=4, sinusoids=[
        SinusoidSpec(location=1, amplitude=0.2, frequency_hz=1.5,
                     phase_rad=-0.4),
        SinusoidSpec(location=3, amplitude=0.1, frequency_hz=0.5)])
    path = tmp_path / "inputs.json"
    save_input_config(config, path)
    loaded = load_input_config(path, num_channels=4)
    assert loaded.num_channels == 4
    assert [s.location for s in loaded.sinusoids] == [1, 3]
    assert loaded.sinusoids[0].phase_rad == pytest.approx(-0.4)


def test_model_json_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"A": [[-1.0]], "B": [[1.0]]}')
    with pytest.raises(ConfigurationError):
        load_model_json(path)
