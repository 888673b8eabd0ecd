"""Windowed DFT of measurement records and peak-bin detection.

The analysis block is the N samples starting at index L, where L skips
the decaying transient. The DFT is scaled by 2 over the window's
coherent gain (sum of window values), so an on-grid sinusoid of
amplitude a shows modulus a at its bin. The complex exponent keeps the
absolute sample index k, not k - L, which references every phase to
sample 0; solved input phasors then line up with sinusoid phases at
k = 0 regardless of where the analysis block starts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .lti import DiscreteModel

WINDOWS = ("rectangular", "hamming")


def hamming_window(num_samples: int) -> np.ndarray:
    """Symmetric Hamming window 0.54 - 0.46 cos(2 pi k / (N - 1))."""
    if num_samples < 2:
        raise ConfigurationError(
            f"window needs at least 2 samples, got {num_samples}")
    k = np.arange(num_samples)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (num_samples - 1))


def window_values(name: str, num_samples: int) -> np.ndarray:
    if name == "rectangular":
        return np.ones(num_samples)
    if name == "hamming":
        return hamming_window(num_samples)
    raise ConfigurationError(
        f"unknown window {name!r}, expected one of {WINDOWS}")


@dataclass
class SpectrumConfig:
    """Analysis block parameters: DFT length, transient cutoff, window."""

    n_dft: int
    threshold: float
    transient_cutoff: int = 0
    window: str = "hamming"

    def __post_init__(self):
        if self.n_dft < 2:
            raise ConfigurationError(f"n_dft must be >= 2, got {self.n_dft}")
        if self.transient_cutoff < 0:
            raise ConfigurationError(
                f"transient_cutoff must be >= 0, got {self.transient_cutoff}")
        if not self.threshold > 0:
            raise ConfigurationError(
                f"threshold must be positive, got {self.threshold}")
        if self.window not in WINDOWS:
            raise ConfigurationError(
                f"unknown window {self.window!r}, expected one of {WINDOWS}")


@dataclass
class SpectrumResult:
    """Scaled spectrum plus (after detection) the retained bins.

    values: p x N complex matrix of scaled DFT values per channel.
    bins: detected bin indices, ascending, inside [1, N/2).
    bin_omegas: the matching frequencies 2 pi l / N in radians/sample.
    """

    values: np.ndarray
    bins: np.ndarray = field(
        default_factory=lambda: np.array([], dtype=int))
    bin_omegas: np.ndarray = field(
        default_factory=lambda: np.array([], dtype=float))

    @property
    def num_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_dft(self) -> int:
        return self.values.shape[1]

    @property
    def num_bins(self) -> int:
        return int(self.bins.size)


def windowed_dft(measurements: np.ndarray,
                 config: SpectrumConfig) -> SpectrumResult:
    """Scaled DFT of the analysis block y[L : L + N] per channel.

    Returns values[i, q] = (2 / sum(w)) * sum_k y[i, k] w[k - L]
    exp(-2j pi q k / N) with k running over the block. Requires the
    record to hold at least L + N samples.
    """
    y = np.atleast_2d(np.asarray(measurements, dtype=float))
    N, L = config.n_dft, config.transient_cutoff
    if y.shape[1] < L + N:
        raise ConfigurationError(
            f"record has {y.shape[1]} samples, need at least L + N = {L + N}")
    w = window_values(config.window, N)
    segment = y[:, L:L + N] * w
    raw = np.fft.fft(segment, axis=1)
    # Restore the absolute-index phase reference: the FFT above indexes
    # the block from 0, which is a shift by L samples.
    q = np.arange(N)
    phase_ref = np.exp(-2j * np.pi * q * (L % N) / N)
    return SpectrumResult(values=(2.0 / w.sum()) * raw * phase_ref)


def detect_bins(result: SpectrumResult, threshold: float) -> SpectrumResult:
    """Keep bins l in [1, N/2) whose cross-channel max modulus exceeds
    the threshold. DC and the mirrored upper half are never candidates.
    """
    if not threshold > 0:
        raise ConfigurationError(
            f"threshold must be positive, got {threshold}")
    N = result.n_dft
    upper = (N + 1) // 2
    mags = np.abs(result.values[:, 1:upper]).max(axis=0)
    bins = 1 + np.nonzero(mags > threshold)[0]
    return replace(result, bins=bins,
                   bin_omegas=2.0 * np.pi * bins / N)


def default_transient_cutoff(model: DiscreteModel,
                             decay: float = 1e-4) -> int:
    """Smallest L with spectral_radius(A_d)^L < decay.

    With the default decay of 1e-4 the slowest mode has shrunk by four
    orders of magnitude before the analysis block starts.
    """
    if not 0 < decay < 1:
        raise ConfigurationError(f"decay must be in (0, 1), got {decay}")
    rho = model.spectral_radius
    if rho >= 1.0:
        raise ConfigurationError(
            f"no settling: spectral radius {rho:.6g} >= 1")
    if rho == 0.0:
        return 1
    L = max(int(np.ceil(np.log(decay) / np.log(rho))), 0)
    while rho ** L >= decay:
        L += 1
    return L


def one_sided_magnitudes(result: SpectrumResult) -> tuple[np.ndarray, np.ndarray]:
    """Bins 0..N//2 and the p x (N//2 + 1) matrix of moduli."""
    half = result.n_dft // 2
    bins = np.arange(half + 1)
    return bins, np.abs(result.values[:, :half + 1])


def suggest_tau(result: SpectrumResult, quantile: float = 0.9,
                margin: float = 4.0) -> float:
    """Empirical detection threshold: margin times a noise-floor quantile.

    Convenience extension for records where active bins occupy a small
    fraction of the spectrum; the quantile of the cross-channel max
    modulus over candidate bins then tracks the noise floor. With a
    tapered window, mind that bins next to a strong peak carry a
    sizeable fraction of that peak, so widely unequal peaks need a
    threshold above the strongest peak's neighbours.
    """
    if not 0 < quantile < 1:
        raise ConfigurationError(f"quantile must be in (0, 1), got {quantile}")
    N = result.n_dft
    upper = (N + 1) // 2
    if upper <= 1:
        raise ConfigurationError("spectrum too short to estimate a floor")
    mags = np.abs(result.values[:, 1:upper]).max(axis=0)
    return float(margin * np.quantile(mags, quantile))


# ---------------------------------------------------------------------------
# File formats


def save_measurements_csv(path, measurements: np.ndarray, fs: float) -> None:
    """Write one row per sample, one column per channel, after a
    ``# fs=<Hz>`` header line."""
    y = np.atleast_2d(np.asarray(measurements, dtype=float))
    if not (fs > 0 and np.isfinite(fs)):
        raise ConfigurationError(f"fs must be positive, got {fs}")
    with open(path, "w", newline="") as fh:
        fh.write(f"# fs={fs!r}\n")
        writer = csv.writer(fh)
        for k in range(y.shape[1]):
            writer.writerow([repr(float(v)) for v in y[:, k]])


def load_measurements_csv(path) -> tuple[np.ndarray, float]:
    """Read a measurement record; returns (p x S array, fs)."""
    fs = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("fs="):
                    fs = float(body[3:])
                continue
            rows.append([float(v) for v in line.split(",")])
    if fs is None:
        raise ConfigurationError(f"{path} has no '# fs=<Hz>' header line")
    if not rows:
        raise ConfigurationError(f"{path} contains no samples")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ConfigurationError(f"{path} has ragged rows: widths {sorted(widths)}")
    return np.asarray(rows, dtype=float).T, fs


def save_spectrum_csv(path, result: SpectrumResult, fs: float) -> None:
    """Write the one-sided spectrum as (bin, frequency_hz, channel,
    real, imag, modulus) rows."""
    if not (fs > 0 and np.isfinite(fs)):
        raise ConfigurationError(f"fs must be positive, got {fs}")
    N = result.n_dft
    half = N // 2
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "frequency_hz", "channel", "real", "imag",
                         "modulus"])
        for l in range(half + 1):
            f_hz = l * fs / N
            for i in range(result.num_channels):
                v = result.values[i, l]
                writer.writerow([l, f"{float(f_hz)!r}", i,
                                 f"{float(v.real)!r}", f"{float(v.imag)!r}",
                                 f"{float(abs(v))!r}"])


def load_spectrum_csv(path) -> dict[str, np.ndarray]:
    """Read back a spectrum CSV into column arrays keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols: dict[str, list] = {name: [] for name in reader.fieldnames or []}
        for row in reader:
            for name, value in row.items():
                cols[name].append(value)
    if not cols:
        raise ConfigurationError(f"{path} is empty")
    out: dict[str, np.ndarray] = {}
    for name, values in cols.items():
        dtype = int if name in ("bin", "channel") else float
        out[name] = np.asarray(values, dtype=dtype)
    return out
