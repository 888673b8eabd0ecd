"""Linear time-invariant plant models and forced-sinusoid simulation.

Continuous plants dx/dt = A x + B u, y = C x are discretized exactly
under a zero-order hold on u, producing x[k+1] = A_d x[k] + B_d u[k],
y[k] = C x[k] with sample period T. Input channels are driven by sums
of sinusoids; measurements can be degraded with Gaussian noise at a
prescribed SNR.
"""

from __future__ import annotations

import json
import math
from dataclasses import InitVar, dataclass, field

import numpy as np
from scipy.linalg import expm, get_lapack_funcs, lu_factor, lu_solve

from .errors import ConfigurationError, IllConditionedError, NumericalError

# Reciprocal condition number below 1/_COND_LIMIT is treated as singular.
_COND_LIMIT = 1e14


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(value, dtype=float))
    if arr.ndim != 2:
        raise ConfigurationError(f"{name} must be a matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    return arr


@dataclass
class ContinuousModel:
    """Continuous plant (A, B, C) with n states, m inputs, p outputs.

    A is required to be Hurwitz (every eigenvalue has strictly negative
    real part) so that a forced steady state exists. Tests may bypass
    the check with ``check_stability=False`` to probe limit cases.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    check_stability: InitVar[bool] = True

    def __post_init__(self, check_stability: bool):
        self.A = _as_matrix(self.A, "A")
        self.B = _as_matrix(self.B, "B")
        self.C = _as_matrix(self.C, "C")
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ConfigurationError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise ConfigurationError(
                f"B has {self.B.shape[0]} rows, expected {n}")
        if self.C.shape[1] != n:
            raise ConfigurationError(
                f"C has {self.C.shape[1]} columns, expected {n}")
        if check_stability and not self.is_stable:
            raise ConfigurationError(
                "A must be Hurwitz (all eigenvalues with negative real part)")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def is_stable(self) -> bool:
        return bool(np.max(np.linalg.eigvals(self.A).real) < 0.0)


@dataclass
class DiscreteModel:
    """Sampled plant (A_d, B_d, C) with sample period T seconds.

    A_d is required to be Schur (spectral radius strictly below 1)
    unless constructed with ``check_stability=False``.
    """

    A_d: np.ndarray
    B_d: np.ndarray
    C: np.ndarray
    T: float
    check_stability: InitVar[bool] = True

    def __post_init__(self, check_stability: bool):
        self.A_d = _as_matrix(self.A_d, "A_d")
        self.B_d = _as_matrix(self.B_d, "B_d")
        self.C = _as_matrix(self.C, "C")
        n = self.A_d.shape[0]
        if self.A_d.shape != (n, n):
            raise ConfigurationError(f"A_d must be square, got {self.A_d.shape}")
        if self.B_d.shape[0] != n:
            raise ConfigurationError(
                f"B_d has {self.B_d.shape[0]} rows, expected {n}")
        if self.C.shape[1] != n:
            raise ConfigurationError(
                f"C has {self.C.shape[1]} columns, expected {n}")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise ConfigurationError(f"sample period must be positive, got {self.T}")
        if check_stability and not self.is_stable:
            raise ConfigurationError(
                "A_d must have spectral radius below 1")

    @property
    def n(self) -> int:
        return self.A_d.shape[0]

    @property
    def m(self) -> int:
        return self.B_d.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def fs(self) -> float:
        return 1.0 / self.T

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.A_d))))

    @property
    def is_stable(self) -> bool:
        return self.spectral_radius < 1.0


@dataclass
class SinusoidSpec:
    """One sinusoid a*sin(2*pi*f*k*T + phi) injected at an input channel."""

    location: int
    amplitude: float
    frequency_hz: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if self.location < 0:
            raise ConfigurationError(f"location must be >= 0, got {self.location}")
        if self.amplitude < 0:
            raise ConfigurationError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.frequency_hz <= 0:
            raise ConfigurationError(
                f"frequency must be positive, got {self.frequency_hz}")


@dataclass
class ForcedInputConfig:
    """Sinusoids driving an m-channel input.

    The detection stage assumes only a few of the m channels are active;
    that sparsity is a modelling convention, not enforced here.
    """

    num_channels: int
    sinusoids: list[SinusoidSpec] = field(default_factory=list)

    def __post_init__(self):
        if self.num_channels < 1:
            raise ConfigurationError(
                f"need at least one input channel, got {self.num_channels}")
        for s in self.sinusoids:
            if s.location >= self.num_channels:
                raise ConfigurationError(
                    f"sinusoid location {s.location} out of range "
                    f"[0, {self.num_channels})")

    @property
    def active_locations(self) -> list[int]:
        return sorted({s.location for s in self.sinusoids})


def discretize(model: ContinuousModel, T: float,
               check_stability: bool = True) -> DiscreteModel:
    """Exact zero-order-hold discretization with sample period T.

    A_d = exp(A T) and B_d = int_0^T exp(A s) ds B are read off the
    matrix exponential of the augmented block [[A, B], [0, 0]] * T, so
    both come from a single evaluation and the integral needs no
    invertibility assumption on A.
    """
    if not (T > 0.0 and math.isfinite(T)):
        raise ConfigurationError(f"sample period must be positive, got {T}")
    n, m = model.n, model.m
    block = np.zeros((n + m, n + m))
    block[:n, :n] = model.A
    block[:n, n:] = model.B
    E = expm(block * T)
    if not np.all(np.isfinite(E)):
        raise NumericalError("matrix exponential overflowed; check A and T")
    return DiscreteModel(E[:n, :n], E[:n, n:], model.C.copy(), T,
                         check_stability=check_stability)


def transfer_at(model: DiscreteModel, omega: float) -> np.ndarray:
    """Transfer matrix C (e^{j omega} I - A_d)^{-1} B_d at one frequency.

    omega is in radians per sample. The resolvent is applied through an
    LU solve rather than an explicit inverse; a reciprocal-condition
    estimate guards against near-singular evaluation points.
    """
    z = complex(np.cos(omega), np.sin(omega))
    M = z * np.eye(model.n) - model.A_d.astype(complex)
    lu, piv = lu_factor(M)
    gecon = get_lapack_funcs("gecon", (M,))
    rcond, info = gecon(lu, np.linalg.norm(M, 1), norm="1")
    if info != 0 or not (rcond > 1.0 / _COND_LIMIT):
        raise IllConditionedError(
            f"resolvent at omega={omega:.6g} is numerically singular "
            f"(rcond={rcond:.3g})")
    X = lu_solve((lu, piv), model.B_d.astype(complex))
    return model.C @ X


def generate_input(config: ForcedInputConfig, T: float,
                   sample_indices) -> np.ndarray:
    """Evaluate the forced input u[r, k] over the given sample indices.

    Every frequency must sit strictly below the Nyquist rate 1/(2 T).
    """
    if not (T > 0.0 and math.isfinite(T)):
        raise ConfigurationError(f"sample period must be positive, got {T}")
    k = np.asarray(sample_indices, dtype=float)
    if k.ndim != 1:
        raise ConfigurationError("sample_indices must be one-dimensional")
    u = np.zeros((config.num_channels, k.size))
    for s in config.sinusoids:
        if s.frequency_hz >= 0.5 / T:
            raise ConfigurationError(
                f"frequency {s.frequency_hz} Hz is at or above Nyquist "
                f"({0.5 / T} Hz)")
        u[s.location] += s.amplitude * np.sin(
            2.0 * np.pi * s.frequency_hz * k * T + s.phase_rad)
    return u


def simulate(model: DiscreteModel, inputs: np.ndarray,
             x0: np.ndarray | None = None) -> np.ndarray:
    """Run the sampled recursion and return the p x S output record.

    y[k] is taken before the state update, so y[0] = C x0 (zero state
    by default). The map from inputs to outputs is linear.
    """
    u = np.atleast_2d(np.asarray(inputs, dtype=float))
    if u.shape[0] != model.m:
        raise ConfigurationError(
            f"inputs have {u.shape[0]} channels, model expects {model.m}")
    S = u.shape[1]
    if S < 1:
        raise ConfigurationError("need at least one input sample")
    if x0 is None:
        x = np.zeros(model.n)
    else:
        x = np.asarray(x0, dtype=float).reshape(-1)
        if x.size != model.n:
            raise ConfigurationError(
                f"x0 has {x.size} entries, expected {model.n}")
    y = np.empty((model.p, S))
    for k in range(S):
        y[:, k] = model.C @ x
        x = model.A_d @ x + model.B_d @ u[:, k]
    if not np.all(np.isfinite(y)):
        raise NumericalError("simulation diverged to non-finite values",
                             last_iterate=x)
    return y


def add_noise(measurements: np.ndarray, snr_db: float, seed: int,
              power_window: tuple[int, int] | None = None) -> np.ndarray:
    """Add per-channel white Gaussian noise at the requested SNR.

    The noise variance for channel i is its mean-square signal value
    divided by 10^(snr_db/10). ``power_window`` selects the sample range
    (start, stop) over which that reference power is measured; by
    default the whole record is used. Callers analysing a post-transient
    block should pass that block so the SNR refers to the data actually
    analysed. ``snr_db=inf`` returns an unmodified copy. Output is
    deterministic in (seed, shape).
    """
    y = np.atleast_2d(np.asarray(measurements, dtype=float))
    if y.size == 0:
        raise ConfigurationError("measurements are empty")
    if math.isinf(snr_db) and snr_db > 0:
        return y.copy()
    if power_window is None:
        lo, hi = 0, y.shape[1]
    else:
        lo, hi = power_window
        if not (0 <= lo < hi <= y.shape[1]):
            raise ConfigurationError(
                f"power_window {power_window} outside record of "
                f"length {y.shape[1]}")
    power = np.mean(y[:, lo:hi] ** 2, axis=1)
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    return y + rng.standard_normal(y.shape) * sigma[:, None]


# ---------------------------------------------------------------------------
# File formats


def save_model_json(model: ContinuousModel, path) -> None:
    """Write {"A": ..., "B": ..., "C": ...} with row-major nested lists."""
    payload = {"A": model.A.tolist(), "B": model.B.tolist(),
               "C": model.C.tolist()}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_model_json(path, check_stability: bool = True) -> ContinuousModel:
    with open(path) as fh:
        payload = json.load(fh)
    missing = {"A", "B", "C"} - set(payload)
    if missing:
        raise ConfigurationError(
            f"model file {path} is missing keys: {sorted(missing)}")
    return ContinuousModel(payload["A"], payload["B"], payload["C"],
                           check_stability=check_stability)


def _load_matrix_csv(path) -> np.ndarray:
    try:
        return np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))
    except ValueError as exc:
        raise ConfigurationError(f"could not parse matrix CSV {path}: {exc}")


def load_model_csv(a_path, b_path, c_path,
                   check_stability: bool = True) -> ContinuousModel:
    """Assemble a model from three CSV files, one matrix each."""
    return ContinuousModel(_load_matrix_csv(a_path), _load_matrix_csv(b_path),
                           _load_matrix_csv(c_path),
                           check_stability=check_stability)


def save_input_config(config: ForcedInputConfig, path) -> None:
    """Write the sinusoid list as a JSON array of plain objects."""
    rows = [{"location": s.location, "amplitude": s.amplitude,
             "frequency_hz": s.frequency_hz, "phase_rad": s.phase_rad}
            for s in config.sinusoids]
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=1)
        fh.write("\n")


def load_input_config(path, num_channels: int) -> ForcedInputConfig:
    with open(path) as fh:
        rows = json.load(fh)
    if not isinstance(rows, list):
        raise ConfigurationError(
            f"input config {path} must be a JSON array of sinusoids")
    sins = []
    for row in rows:
        try:
            sins.append(SinusoidSpec(location=int(row["location"]),
                                     amplitude=float(row["amplitude"]),
                                     frequency_hz=float(row["frequency_hz"]),
                                     phase_rad=float(row.get("phase_rad", 0.0))))
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(
                f"bad sinusoid entry {row!r} in {path}: {exc}")
    return ForcedInputConfig(num_channels=num_channels, sinusoids=sins)
