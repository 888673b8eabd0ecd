"""Locate sparse forced-oscillation sources in sampled linear systems.

The pipeline: simulate or load measurements of a stable LTI plant
driven by a few sinusoidal inputs, take a windowed DFT of the
post-transient block, keep the bins whose modulus clears a threshold,
evaluate the plant's transfer matrix at those bins, and solve one
l1-regularized complex least-squares problem per bin. Nonzero solved
coefficients name the driven input locations; their moduli and angles
give each sinusoid's amplitude and phase, and the bin gives its
frequency.
"""

from .bench import (EstimateRow, GeneratorParams, ScenarioSpec, SweepResult,
                    conventional_fpr, default_scenario, estimate_statistics,
                    load_scenario, random_stable_system, save_scenario,
                    shared_frequency_scenario, sweep_alpha, tpr_fpr)
from .classo import (ClassoProblem, ClassoSolution, KktCertificate,
                     SolveOptions, kkt_certificate, lambda_max,
                     objective_value, soft_threshold, solve)
from .errors import (ConfigurationError, FolocError, IllConditionedError,
                     NumericalError)
from .localizer import (LocalizationReport, LocalizeConfig, SourceEstimate,
                        StackedSystem, build_stacked, lambda_max_stacked,
                        localize, recover_parameters, solve_stacked,
                        wrap_phase)
from .lti import (ContinuousModel, DiscreteModel, ForcedInputConfig,
                  SinusoidSpec, add_noise, discretize, generate_input,
                  load_input_config, load_model_csv, load_model_json,
                  save_input_config, save_model_json, simulate, transfer_at)
from .spectrum import (SpectrumConfig, SpectrumResult,
                       default_transient_cutoff, detect_bins, hamming_window,
                       load_measurements_csv, save_measurements_csv,
                       suggest_tau, windowed_dft)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
