"""Source localization: detected bins -> per-bin solves -> estimates.

At each detected bin l the unknown input phasor vector u_l satisfies
ytilde_l = H(e^{j omega_l}) u_l, where ytilde_l is the scaled spectrum
column and H is the sampled transfer matrix. The joint system over all
K bins is block diagonal, so solving the bins independently is exactly
equivalent to solving the stacked system; the blocks are never
materialized into one dense matrix. Each recovered nonzero entry maps
back to a sinusoid: an input a*sin(omega*k + phi) has phasor
-j*a*e^{j phi}, so amplitude is the modulus and phase is the angle
plus pi/2.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .classo import (ClassoProblem, ClassoSolution, SolveOptions, lambda_max,
                     solve)
from .errors import ConfigurationError, FolocError, NumericalError
from .lti import DiscreteModel, transfer_at
from .spectrum import (SpectrumConfig, SpectrumResult, default_transient_cutoff,
                       detect_bins, windowed_dft)

STATUS_OK = "ok"
STATUS_EMPTY = "no oscillation detected"

# Relative floor under which a solved coefficient counts as zero.
SUPPORT_EPS_REL = 1e-6

# Column pairs closer than this in angle get a collinearity warning.
COLLINEARITY_COS = 1.0 - 1e-6


@dataclass
class StackedSystem:
    """Block-diagonal frequency-domain system over the detected bins.

    blocks[i] is the p x m transfer matrix at bins[i]; rhs[i] is the
    corresponding spectrum column. The dense stacked form exists only
    for diagnostics and tests.
    """

    bins: np.ndarray
    bin_omegas: np.ndarray
    blocks: list[np.ndarray]
    rhs: list[np.ndarray]

    @property
    def num_bins(self) -> int:
        return int(self.bins.size)

    @property
    def num_channels(self) -> int:
        return self.blocks[0].shape[0] if self.blocks else 0

    @property
    def num_locations(self) -> int:
        return self.blocks[0].shape[1] if self.blocks else 0

    def stacked_rhs(self) -> np.ndarray:
        return np.concatenate(self.rhs) if self.rhs else np.zeros(0, complex)

    def stacked_matrix(self) -> np.ndarray:
        """Materialize the block-diagonal matrix (tests/diagnostics only)."""
        p = self.num_channels
        m = self.num_locations
        K = self.num_bins
        M = np.zeros((p * K, m * K), dtype=complex)
        for i, block in enumerate(self.blocks):
            M[i * p:(i + 1) * p, i * m:(i + 1) * m] = block
        return M


@dataclass
class SourceEstimate:
    """One recovered sinusoid: where, how strong, at what frequency."""

    location: int
    bin: int
    frequency_hz: float
    amplitude: float
    phase_rad: float
    value: complex


@dataclass
class LocalizationReport:
    """Full output of a localization run."""

    status: str
    bins: list[int]
    bin_frequencies_hz: list[float]
    solutions: list[np.ndarray]
    support: set[tuple[int, int]]
    estimates: list[SourceEstimate]
    diagnostics: dict = field(default_factory=dict)


@dataclass
class LocalizeConfig:
    """End-to-end pipeline options.

    Exactly one of lam (absolute penalty) or alpha (fraction of the
    data-dependent lambda_max) must be set. transient_cutoff=None picks
    the default settling length from the model.
    """

    n_dft: int
    threshold: float
    transient_cutoff: int | None = None
    window: str = "hamming"
    lam: float | None = None
    alpha: float | None = None
    solve_opts: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        if (self.lam is None) == (self.alpha is None):
            raise ConfigurationError(
                "set exactly one of lam and alpha")
        if self.lam is not None and self.lam < 0:
            raise ConfigurationError(f"lam must be >= 0, got {self.lam}")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(
                f"alpha must be in [0, 1], got {self.alpha}")


def wrap_phase(phi: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    return float(np.pi - (np.pi - phi) % (2.0 * np.pi))


def build_stacked(model: DiscreteModel,
                  result: SpectrumResult) -> StackedSystem:
    """Evaluate the transfer matrix at every detected bin and pair it
    with that bin's spectrum column."""
    if result.num_bins == 0:
        raise ConfigurationError("no detected bins to build a system from")
    if model.p != result.num_channels:
        raise ConfigurationError(
            f"model has {model.p} outputs, spectrum has "
            f"{result.num_channels} channels")
    blocks = [transfer_at(model, w) for w in result.bin_omegas]
    rhs = [result.values[:, l].copy() for l in result.bins]
    return StackedSystem(bins=result.bins.copy(),
                         bin_omegas=result.bin_omegas.copy(),
                         blocks=blocks, rhs=rhs)


def lambda_max_stacked(system: StackedSystem) -> float:
    """lambda_max of the stacked system: block diagonality makes it the
    max of the per-bin values."""
    return max(lambda_max(ClassoProblem(H=b, y=r))
               for b, r in zip(system.blocks, system.rhs))


def collinear_column_pairs(block: np.ndarray,
                           cos_limit: float = COLLINEARITY_COS) -> list[tuple[int, int]]:
    """Column index pairs whose absolute cosine exceeds the limit."""
    norms = np.linalg.norm(block, axis=0)
    gram = np.abs(block.conj().T @ block)
    pairs = []
    d = block.shape[1]
    for i in range(d):
        for j in range(i + 1, d):
            denom = norms[i] * norms[j]
            if denom > 0 and gram[i, j] > cos_limit * denom:
                pairs.append((i, j))
    return pairs


def solve_stacked(system: StackedSystem, lam: float,
                  opts: SolveOptions | None = None,
                  warm_starts: list[np.ndarray] | None = None
                  ) -> list[ClassoSolution]:
    """Solve the K independent per-bin problems at a shared penalty.

    Identical in exact arithmetic to solving the materialized stacked
    system, because the blocks share no rows or columns. Solver errors
    are re-raised with the offending bin attached.
    """
    if lam < 0:
        raise ConfigurationError(f"lam must be >= 0, got {lam}")
    if opts is None:
        opts = SolveOptions()
    if warm_starts is not None and len(warm_starts) != system.num_bins:
        raise ConfigurationError(
            f"got {len(warm_starts)} warm starts for {system.num_bins} bins")
    solutions = []
    for i, (block, rhs) in enumerate(zip(system.blocks, system.rhs)):
        problem = ClassoProblem(H=block, y=rhs, lam=lam)
        bin_opts = SolveOptions(
            tol=opts.tol, max_sweeps=opts.max_sweeps,
            warm_start=None if warm_starts is None else warm_starts[i],
            track_history=opts.track_history)
        try:
            solutions.append(solve(problem, bin_opts))
        except NumericalError as exc:
            raise NumericalError(
                f"solver failed at bin {system.bins[i]}: {exc}",
                last_iterate=exc.last_iterate) from exc
    return solutions


def solution_support(solutions: list[np.ndarray], bins: np.ndarray,
                     eps_rel: float = SUPPORT_EPS_REL
                     ) -> set[tuple[int, int]]:
    """(location, bin) pairs whose coefficient clears the relative floor.

    The floor is eps_rel times the largest modulus across all bins, so
    a run solved to tolerance does not report numerically-zero dust.
    """
    peak = max((float(np.max(np.abs(u))) for u in solutions), default=0.0)
    if peak == 0.0:
        return set()
    floor = eps_rel * peak
    support = set()
    for l, u in zip(bins, solutions):
        for r in np.nonzero(np.abs(u) > floor)[0]:
            support.add((int(r), int(l)))
    return support


def recover_parameters(solutions: list[ClassoSolution] | list[np.ndarray],
                       result: SpectrumResult, T: float,
                       eps_rel: float = SUPPORT_EPS_REL) -> LocalizationReport:
    """Turn per-bin solution vectors into located sinusoid estimates.

    Bin l maps to frequency l / (N T) Hz. A coefficient u gives
    amplitude |u| and phase angle(u) + pi/2, wrapped into (-pi, pi].
    """
    if not (T > 0 and math.isfinite(T)):
        raise ConfigurationError(f"sample period must be positive, got {T}")
    vectors = [s.coefficients if isinstance(s, ClassoSolution) else
               np.asarray(s, dtype=complex).reshape(-1) for s in solutions]
    if len(vectors) != result.num_bins:
        raise ConfigurationError(
            f"got {len(vectors)} solutions for {result.num_bins} bins")
    N = result.n_dft
    support = solution_support(vectors, result.bins, eps_rel)
    estimates = []
    for l, u in zip(result.bins, vectors):
        f_hz = float(l) / (N * T)
        for r in sorted(loc for loc, b in support if b == l):
            value = complex(u[r])
            estimates.append(SourceEstimate(
                location=r, bin=int(l), frequency_hz=f_hz,
                amplitude=abs(value),
                phase_rad=wrap_phase(float(np.angle(value)) + 0.5 * np.pi),
                value=value))
    return LocalizationReport(
        status=STATUS_OK,
        bins=[int(l) for l in result.bins],
        bin_frequencies_hz=[float(l) / (N * T) for l in result.bins],
        solutions=vectors,
        support=support,
        estimates=estimates)


def empty_report(diagnostics: dict | None = None) -> LocalizationReport:
    return LocalizationReport(status=STATUS_EMPTY, bins=[],
                              bin_frequencies_hz=[], solutions=[],
                              support=set(), estimates=[],
                              diagnostics=diagnostics or {})


def localize(model: DiscreteModel, measurements: np.ndarray,
             config: LocalizeConfig) -> LocalizationReport:
    """Detect oscillation bins and localize their sources.

    Returns a report with status "no oscillation detected" (and no
    estimates) when nothing clears the detection threshold.
    """
    L = config.transient_cutoff
    if L is None:
        L = default_transient_cutoff(model)
    spec_config = SpectrumConfig(n_dft=config.n_dft,
                                 threshold=config.threshold,
                                 transient_cutoff=L, window=config.window)
    result = detect_bins(windowed_dft(measurements, spec_config),
                         config.threshold)
    diagnostics: dict = {
        "n_dft": config.n_dft,
        "transient_cutoff": L,
        "window": config.window,
        "threshold": config.threshold,
        "num_bins": result.num_bins,
        "num_channels": model.p,
        "num_locations": model.m,
        "warnings": [],
    }
    if result.num_bins == 0:
        diagnostics["lam"] = config.lam
        diagnostics["alpha"] = config.alpha
        return empty_report(diagnostics)

    system = build_stacked(model, result)
    lmax = lambda_max_stacked(system)
    lam = config.lam if config.lam is not None else config.alpha * lmax
    diagnostics["lam"] = lam
    diagnostics["alpha"] = config.alpha
    diagnostics["lambda_max"] = lmax

    if lam == 0.0 and model.p < model.m:
        message = ("lam=0 with fewer sensors than candidate locations: "
                   "the fit is underdetermined and localization claims "
                   "are not unique")
        warnings.warn(message)
        diagnostics["warnings"].append(message)
    for i, block in enumerate(system.blocks):
        pairs = collinear_column_pairs(block)
        if pairs:
            message = (f"bin {system.bins[i]}: near-collinear transfer "
                       f"columns {pairs}; entries at these locations are "
                       "interchangeable")
            warnings.warn(message)
            diagnostics["warnings"].append(message)

    solutions = solve_stacked(system, lam, config.solve_opts)
    diagnostics["solver"] = [
        {"bin": int(b), "iterations": s.iterations, "status": s.status,
         "final_delta": s.final_delta, "objective": s.objective}
        for b, s in zip(system.bins, solutions)]
    if config.solve_opts.track_history:
        diagnostics["trace"] = [
            dict(entry, bin=int(b), lam=lam)
            for b, s in zip(system.bins, solutions)
            for entry in s.history]
    report = recover_parameters(solutions, result, model.T)
    report.diagnostics = diagnostics
    return report


# ---------------------------------------------------------------------------
# Report files


def report_to_dict(report: LocalizationReport) -> dict:
    bins_payload = []
    for i, l in enumerate(report.bins):
        entries = [e for e in report.estimates if e.bin == l]
        bins_payload.append({
            "bin": l,
            "frequency_hz": report.bin_frequencies_hz[i],
            "solutions": [{
                "location": e.location,
                "amplitude": e.amplitude,
                "phase_rad": e.phase_rad,
                "real": e.value.real,
                "imag": e.value.imag,
            } for e in entries],
        })
    return {"status": report.status, "bins": bins_payload,
            "diagnostics": report.diagnostics}


def save_report_json(report: LocalizationReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=1)
        fh.write("\n")


def load_report_json(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    for key in ("status", "bins", "diagnostics"):
        if key not in payload:
            raise ConfigurationError(f"report {path} is missing {key!r}")
    return payload


REPORT_CSV_FIELDS = ["bin", "frequency_hz", "location", "amplitude",
                     "phase_rad", "real", "imag"]


def save_report_csv(report: LocalizationReport, path) -> None:
    """Flat one-row-per-estimate form of the report."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_CSV_FIELDS)
        for e in report.estimates:
            writer.writerow([e.bin, f"{float(e.frequency_hz)!r}", e.location,
                             f"{float(e.amplitude)!r}",
                             f"{float(e.phase_rad)!r}",
                             f"{float(e.value.real)!r}",
                             f"{float(e.value.imag)!r}"])


def load_report_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != REPORT_CSV_FIELDS:
            raise ConfigurationError(
                f"unexpected report columns in {path}: {reader.fieldnames}")
        rows = []
        for row in reader:
            rows.append({
                "bin": int(row["bin"]),
                "frequency_hz": float(row["frequency_hz"]),
                "location": int(row["location"]),
                "amplitude": float(row["amplitude"]),
                "phase_rad": float(row["phase_rad"]),
                "real": float(row["real"]),
                "imag": float(row["imag"]),
            })
    return rows
