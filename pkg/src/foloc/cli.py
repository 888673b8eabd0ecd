"""Command-line interface.

Subcommands: gen-system, simulate, spectrum, localize, sweep. Exit
codes: 0 on success, 2 on configuration or input errors, 3 on
numerical failures, 4 when localization detects no oscillation (the
empty report is still written). Report-producing commands render a PNG
figure next to the delimited output unless --no-plot is given.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bench, classo, localizer, lti, plots, spectrum
from .errors import ConfigurationError, FolocError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_EMPTY = 4


def _figure_path(out_path: str) -> str:
    stem, _ = os.path.splitext(out_path)
    return stem + ".png"


def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="model JSON file with keys A, B, C")
    group.add_argument("--model-csv", nargs=3,
                       metavar=("A_CSV", "B_CSV", "C_CSV"),
                       help="three CSV files holding A, B, and C")


def _load_model(args) -> lti.ContinuousModel:
    if args.model is not None:
        return lti.load_model_json(args.model)
    return lti.load_model_csv(*args.model_csv)


def _cmd_gen_system(args) -> int:
    model = bench.random_stable_system(
        args.n, args.m, args.p, tuple(args.modal_freq), tuple(args.damping),
        args.seed)
    lti.save_model_json(model, args.out)
    print(f"wrote {args.out}: n={model.n} states, m={model.m} inputs, "
          f"p={model.p} outputs")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    model = _load_model(args)
    dmodel = lti.discretize(model, 1.0 / args.fs)
    L = args.L if args.L is not None else \
        spectrum.default_transient_cutoff(dmodel)
    total = L + args.N
    inputs = lti.load_input_config(args.inputs, model.m)
    u = lti.generate_input(inputs, dmodel.T, np.arange(total))
    y = lti.simulate(dmodel, u)
    y = lti.add_noise(y, args.snr_db, args.seed, power_window=(L, total))
    spectrum.save_measurements_csv(args.out, y, args.fs)
    print(f"wrote {args.out}: {total} samples x {model.p} channels "
          f"at {args.fs} Hz (transient cutoff {L})")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    y, fs = spectrum.load_measurements_csv(args.measurements)
    config = spectrum.SpectrumConfig(n_dft=args.N, threshold=args.tau,
                                     transient_cutoff=args.L,
                                     window=args.window)
    result = spectrum.detect_bins(spectrum.windowed_dft(y, config), args.tau)
    spectrum.save_spectrum_csv(args.out, result, fs)
    if not args.no_plot:
        plots.plot_spectrum(result, fs, _figure_path(args.out),
                            threshold=args.tau)
    freqs = [f"{l * fs / args.N:.6g}" for l in result.bins]
    print(f"wrote {args.out}; detected {result.num_bins} bins "
          f"{result.bins.tolist()} ({', '.join(freqs)} Hz)")
    return EXIT_OK


def _cmd_localize(args) -> int:
    model = _load_model(args)
    dmodel = lti.discretize(model, 1.0 / args.fs)
    y, fs = spectrum.load_measurements_csv(args.measurements)
    if abs(fs - args.fs) > 1e-9 * max(fs, args.fs):
        raise ConfigurationError(
            f"--fs {args.fs} disagrees with measurement header fs={fs}")
    opts = classo.SolveOptions(track_history=args.solver_trace is not None)
    config = localizer.LocalizeConfig(
        n_dft=args.N, threshold=args.tau, transient_cutoff=args.L,
        window=args.window, lam=args.lam, alpha=args.alpha,
        solve_opts=opts)
    report = localizer.localize(dmodel, y, config)

    if args.solver_trace is not None:
        classo.write_trace_csv(args.solver_trace,
                               report.diagnostics.pop("trace", []))
    if args.format == "json":
        localizer.save_report_json(report, args.out)
    else:
        localizer.save_report_csv(report, args.out)
    if not args.no_plot:
        L = report.diagnostics.get("transient_cutoff", 0)
        spec_cfg = spectrum.SpectrumConfig(
            n_dft=args.N, threshold=args.tau, transient_cutoff=L,
            window=args.window)
        result = spectrum.detect_bins(
            spectrum.windowed_dft(y, spec_cfg), args.tau)
        plots.plot_report(report, result, fs, _figure_path(args.out),
                          threshold=args.tau)

    print(f"wrote {args.out}: status={report.status!r}, "
          f"{len(report.bins)} bins, {len(report.estimates)} estimates")
    for e in report.estimates:
        print(f"  location {e.location:3d}  {e.frequency_hz:8.4f} Hz  "
              f"amplitude {e.amplitude:.6g}  phase {e.phase_rad:+.4f} rad")
    if report.status == localizer.STATUS_EMPTY:
        return EXIT_EMPTY
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scenario = bench.load_scenario(args.scenario)
    result = bench.sweep_alpha(scenario)
    os.makedirs(args.out_dir, exist_ok=True)
    sweep_path = os.path.join(args.out_dir, "sweep.csv")
    summary_path = os.path.join(args.out_dir, "sweep_summary.csv")
    estimates_path = os.path.join(args.out_dir, "estimates.csv")
    bench.write_sweep_csv(sweep_path, result)
    bench.write_sweep_summary_csv(summary_path, result)
    bench.write_estimates_csv(estimates_path, result.estimates)
    if not args.no_plot:
        plots.plot_sweep(result, os.path.join(args.out_dir, "sweep.png"))
    print(f"wrote {sweep_path}, {summary_path}, {estimates_path}")
    if result.recommended_range is not None:
        lo, hi = result.recommended_range
        print(f"all seeds recover the support exactly for "
              f"alpha in [{lo:.4g}, {hi:.4g}]")
    else:
        best = int(result.perfect_counts.max())
        print(f"no alpha recovered the support exactly on every seed "
              f"(best: {best}/{len(result.seeds)} seeds)")
    print(f"selected alpha: {result.best_alpha:.4g}")
    for r in result.estimates:
        print(f"  location {r.location:3d}  {r.frequency_hz:8.4f} Hz  "
              f"amplitude {r.amplitude_true:.4g} -> {r.amplitude_mean:.4g} "
              f"(std {r.amplitude_std:.2g})  phase {r.phase_true:+.4f} -> "
              f"{r.phase_mean:+.4f} (std {r.phase_std:.2g})  "
              f"detected {r.detected}/{r.detected + r.missed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foloc",
        description="Locate sparse forced-oscillation sources in sampled "
                    "linear systems and estimate their sinusoid parameters.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-system",
                       help="generate a seeded random stable model")
    g.add_argument("--n", type=int, default=32, help="state count (even)")
    g.add_argument("--m", type=int, default=16, help="input count")
    g.add_argument("--p", type=int, default=3, help="output count")
    g.add_argument("--modal-freq", type=float, nargs=2, default=(0.2, 2.5),
                   metavar=("LO", "HI"), help="modal frequency range [Hz]")
    g.add_argument("--damping", type=float, nargs=2, default=(0.05, 0.2),
                   metavar=("LO", "HI"), help="damping ratio range")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output model JSON path")
    g.set_defaults(func=_cmd_gen_system)

    s = sub.add_parser("simulate",
                       help="simulate forced sinusoids and write measurements")
    _add_model_arguments(s)
    s.add_argument("--inputs", required=True,
                   help="JSON array of {location, amplitude, frequency_hz, "
                        "phase_rad}")
    s.add_argument("--fs", type=float, default=30.0, help="sample rate [Hz]")
    s.add_argument("--N", type=int, default=600,
                   help="analysis block length; the record holds L + N "
                        "samples")
    s.add_argument("--L", type=int, default=None,
                   help="transient cutoff (default: settle the slowest mode)")
    s.add_argument("--snr-db", type=float, default=math.inf,
                   help="per-channel SNR in dB (default: no noise)")
    s.add_argument("--seed", type=int, default=0, help="noise seed")
    s.add_argument("--out", required=True, help="output measurement CSV path")
    s.set_defaults(func=_cmd_simulate)

    c = sub.add_parser("spectrum",
                       help="windowed DFT and peak-bin detection")
    c.add_argument("--measurements", required=True,
                   help="measurement CSV with '# fs=<Hz>' header")
    c.add_argument("--N", type=int, default=600, help="DFT length")
    c.add_argument("--L", type=int, default=0, help="transient cutoff")
    c.add_argument("--tau", type=float, required=True,
                   help="detection threshold on the cross-channel max "
                        "modulus")
    c.add_argument("--window", choices=spectrum.WINDOWS, default="hamming")
    c.add_argument("--out", required=True, help="output spectrum CSV path")
    c.add_argument("--no-plot", action="store_true",
                   help="skip the PNG figure")
    c.set_defaults(func=_cmd_spectrum)

    l = sub.add_parser("localize",
                       help="detect oscillation bins and localize sources")
    _add_model_arguments(l)
    l.add_argument("--measurements", required=True)
    l.add_argument("--fs", type=float, default=30.0, help="sample rate [Hz]")
    l.add_argument("--N", type=int, default=600, help="DFT length")
    l.add_argument("--L", type=int, default=None,
                   help="transient cutoff (default: settle the slowest mode)")
    l.add_argument("--tau", type=float, required=True,
                   help="detection threshold")
    pen = l.add_mutually_exclusive_group(required=True)
    pen.add_argument("--alpha", type=float,
                     help="penalty as a fraction of lambda_max, in [0, 1]")
    pen.add_argument("--lambda", dest="lam", type=float,
                     help="absolute penalty value")
    l.add_argument("--window", choices=spectrum.WINDOWS, default="hamming")
    l.add_argument("--format", choices=("json", "csv"), default="json",
                   help="report format for --out")
    l.add_argument("--solver-trace", default=None,
                   help="write per-sweep solver history to this CSV")
    l.add_argument("--out", required=True, help="output report path")
    l.add_argument("--no-plot", action="store_true",
                   help="skip the PNG figure")
    l.set_defaults(func=_cmd_localize)

    w = sub.add_parser("sweep",
                       help="Monte-Carlo alpha sweep over a scenario file")
    w.add_argument("--scenario", required=True, help="scenario JSON path")
    w.add_argument("--out-dir", required=True,
                   help="directory for sweep.csv, sweep_summary.csv, "
                        "estimates.csv")
    w.add_argument("--no-plot", action="store_true",
                   help="skip the PNG figure")
    w.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigurationError, FolocError, OSError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
