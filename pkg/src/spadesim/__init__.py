"""Separation estimation for two incoherent point sources.

Simulation and estimation toolkit comparing mode-projection measurements
against direct imaging for the separation of two equal point sources,
with quantum and classical Cramer-Rao bounds as references.
"""

__version__ = "0.1.0"

from .errors import (BracketError, DataError, DegenerateModeError, ModelError,
                     NumericalError, ParameterError, SpadesimError)
from .estimators import (EstimateRecord, SweepStats, aggregate,
                         estimate_direct_mle, estimate_from_projection)
from .fisher import (FisherReport, SmallSeparationLaw, classical_fisher_exact,
                     classical_fisher_smalld, fisher_report,
                     pixelated_classical_fisher, qcrlb, quantum_fisher)
from .hologram import (GridSpec, HologramMask, first_order_readout,
                       mode_bandwidth, read_mask_text, synthesize,
                       write_mask_pgm, write_mask_text)
from .modes import (CustomMode, Mode, OptimalMode, OutcomeProbabilities,
                    ProbabilityCurves, PsfMode, binary_outcome_fisher,
                    mode_inner_product, optimal_mode, outcome_probabilities,
                    overlap, psf_mode, sample_mode)
from .numerics import (QuadratureSpec, RngStream, find_root_monotone,
                       integrate, sample_binomial, sample_gamma,
                       sample_multinomial, sample_poisson)
from .psf import (GaussianPsf, PsfModel, SincPsf, TabulatedPsf,
                  load_tabulated, make_gaussian, make_sinc, make_tabulated)
from .simulate import (CcdFrame, EmccdParams, ProjectionOutcome, SceneConfig,
                       ccd_pixel_probabilities, default_ccd_edges,
                       simulate_ccd, simulate_projection)
from .sweep import (SweepConfig, SweepResult, load_config, parse_config_text,
                    run_sweep, sweep_csv, write_provenance, write_sweep_csv,
                    write_trials_csv)
