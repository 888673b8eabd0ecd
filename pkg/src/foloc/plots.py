"""Figure rendering for CLI reports.

Every report-producing command writes a PNG next to its delimited
output; these helpers do the drawing. The Agg backend is forced so the
package works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import SweepResult
from .localizer import LocalizationReport
from .spectrum import SpectrumResult, one_sided_magnitudes


def plot_spectrum(result: SpectrumResult, fs: float, path,
                  threshold: float | None = None) -> None:
    """One-sided magnitude spectrum per channel with the detection
    threshold and any detected bins marked."""
    bins, mags = one_sided_magnitudes(result)
    freqs = bins * fs / result.n_dft
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for i in range(mags.shape[0]):
        ax.semilogy(freqs, np.maximum(mags[i], 1e-16), lw=0.8,
                    label=f"channel {i}")
    if threshold is not None:
        ax.axhline(threshold, color="k", ls="--", lw=1.0,
                   label="threshold")
    if result.num_bins:
        peak = np.abs(result.values[:, result.bins]).max(axis=0)
        ax.plot(result.bins * fs / result.n_dft, peak, "rv", ms=7,
                mfc="none", label="detected")
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel("scaled DFT modulus")
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_report(report: LocalizationReport, result: SpectrumResult,
                fs: float, path, threshold: float | None = None) -> None:
    """Spectrum panel plus recovered amplitude stems per location."""
    bins, mags = one_sided_magnitudes(result)
    freqs = bins * fs / result.n_dft
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(8, 7))
    for i in range(mags.shape[0]):
        ax0.semilogy(freqs, np.maximum(mags[i], 1e-16), lw=0.8,
                     label=f"channel {i}")
    if threshold is not None:
        ax0.axhline(threshold, color="k", ls="--", lw=1.0, label="threshold")
    for l in report.bins:
        ax0.axvline(l * fs / result.n_dft, color="r", alpha=0.25, lw=1.0)
    ax0.set_xlabel("frequency [Hz]")
    ax0.set_ylabel("scaled DFT modulus")
    ax0.legend(loc="upper right", fontsize=8)
    ax0.grid(True, which="both", alpha=0.3)

    if report.estimates:
        locations = [e.location for e in report.estimates]
        amplitudes = [e.amplitude for e in report.estimates]
        colors = [e.frequency_hz for e in report.estimates]
        sc = ax1.scatter(locations, amplitudes, c=colors, cmap="viridis",
                         s=45, zorder=3)
        ax1.vlines(locations, 0, amplitudes, lw=1.0, alpha=0.6)
        fig.colorbar(sc, ax=ax1, label="frequency [Hz]")
    else:
        ax1.text(0.5, 0.5, report.status, ha="center", va="center",
                 transform=ax1.transAxes)
    num_locations = report.diagnostics.get("num_locations")
    if num_locations:
        ax1.set_xlim(-0.5, num_locations - 0.5)
        ax1.set_xticks(range(num_locations))
    ax1.set_xlabel("input location")
    ax1.set_ylabel("recovered amplitude")
    ax1.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(result: SweepResult, path) -> None:
    """Mean TPR and FPR against alpha with min/max envelopes; the
    all-seeds-perfect range, when present, is shaded."""
    order = np.argsort(result.alphas)
    a = result.alphas[order]
    fig, axes = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    for ax, rates, name in ((axes[0], result.tpr, "TPR"),
                            (axes[1], result.fpr, "FPR")):
        mean = rates.mean(axis=1)[order]
        lo = rates.min(axis=1)[order]
        hi = rates.max(axis=1)[order]
        ax.fill_between(a, lo, hi, alpha=0.25, label="min/max over seeds")
        ax.plot(a, mean, "-o", ms=3, label="mean")
        if result.recommended_range is not None:
            ax.axvspan(*result.recommended_range, color="g", alpha=0.15,
                       label="all seeds exact")
        ax.axvline(result.best_alpha, color="k", ls=":", lw=1.0,
                   label="selected alpha")
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    axes[1].set_xlabel("alpha (fraction of lambda_max)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
