#!/usr/bin/env python3
"""Compare sensor placements on the benchmark plant.

Localization quality depends on which outputs are measured: the same
plant and the same sources can be easy or impossible to disentangle
depending on the rows of C. This demo keeps the benchmark dynamics and
inputs, swaps in alternative sensor rows, and sweeps the penalty for
each placement. Good placements show a wide range of penalties with
exact support recovery on every noise seed; poor ones never get there.

Synthetic illustration only; not part of the test suite's guarantees.

Usage: python3 scripts/sensor_placement_demo.py [out.png]
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from foloc.bench import default_scenario, tpr_fpr
from foloc.classo import SolveOptions
from foloc.localizer import (build_stacked, lambda_max_stacked,
                             solution_support, solve_stacked)
from foloc.lti import (ContinuousModel, add_noise, discretize,
                       generate_input, simulate)
from foloc.spectrum import (SpectrumConfig, default_transient_cutoff,
                            detect_bins, suggest_tau, windowed_dft)

ALPHAS = np.linspace(0.02, 0.9, 23)
SEEDS = range(5)
OPTS = SolveOptions(tol=1e-7, max_sweeps=1000)


def recovery_curve(scenario, A, B, C):
    """Fraction of noise seeds with exact support recovery, per alpha.

    The detection threshold is chosen from the first noisy record's
    spectrum, the same way a user would pick it by inspection.
    """
    dmodel = discretize(ContinuousModel(A, B, C), 1.0 / scenario.fs)
    L = default_transient_cutoff(dmodel)
    u = generate_input(scenario.inputs, dmodel.T,
                       np.arange(L + scenario.n_dft))
    y_clean = simulate(dmodel, u)
    probe = SpectrumConfig(n_dft=scenario.n_dft, threshold=1.0,
                           transient_cutoff=L, window="hamming")
    tau = suggest_tau(windowed_dft(
        add_noise(y_clean, scenario.snr_db, 0,
                  power_window=(L, L + scenario.n_dft)), probe))

    truth = scenario.true_support()
    config = SpectrumConfig(n_dft=scenario.n_dft, threshold=tau,
                            transient_cutoff=L, window="hamming")
    perfect = np.zeros(ALPHAS.size, dtype=int)
    for seed in SEEDS:
        y = add_noise(y_clean, scenario.snr_db, seed,
                      power_window=(L, L + scenario.n_dft))
        detected = detect_bins(windowed_dft(y, config), tau)
        if detected.num_bins == 0:
            continue
        system = build_stacked(dmodel, detected)
        lam_top = lambda_max_stacked(system)
        warm = None
        for ai in np.argsort(-ALPHAS):
            sols = solve_stacked(system, float(ALPHAS[ai]) * lam_top, OPTS,
                                 warm_starts=warm)
            warm = [s.coefficients for s in sols]
            t, f = tpr_fpr(truth, solution_support(warm, system.bins))
            if t == 1.0 and f == 0.0:
                perfect[ai] += 1
    return tau, perfect / len(list(SEEDS))


def perfect_window(frac):
    idx = np.flatnonzero(frac == 1.0)
    if idx.size == 0:
        return None
    return float(ALPHAS[idx[0]]), float(ALPHAS[idx[-1]])


def main() -> None:
    out_path = sys.argv[1] if len(sys.argv) > 1 else "sensor_placement.png"
    scenario = default_scenario()
    base = scenario.resolve_model()

    placements = [("benchmark rows", base.C)]
    rng = np.random.default_rng(1)
    for k in range(3):
        C = rng.standard_normal((base.p, base.n))
        C /= np.linalg.norm(C, axis=1)[:, None]
        placements.append((f"random rows {k}", C))

    fig, ax = plt.subplots(figsize=(7, 4))
    print(f"{'placement':18s} {'tau':>9s}  exact-recovery alpha window")
    for label, C in placements:
        tau, frac = recovery_curve(scenario, base.A, base.B, C)
        window = perfect_window(frac)
        shown = ("none" if window is None
                 else f"[{window[0]:.2f}, {window[1]:.2f}]")
        print(f"{label:18s} {tau:9.3g}  {shown}")
        ax.plot(ALPHAS, frac, marker="o", ms=3, label=label)
    ax.set_xlabel("penalty fraction alpha")
    ax.set_ylabel("fraction of seeds with exact recovery")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
