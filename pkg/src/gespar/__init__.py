"""Sparse phase retrieval from Fourier-magnitude or general quadratic
measurements: restarted 2-opt support search (GESPAR) with a damped
Gauss-Newton inner solver, an autocorrelation-based support analyzer, a
sparse Fienup baseline, and a Monte-Carlo benchmark harness.
"""

from . import backend
from .bench import (ExperimentSpec, TrialRecord, add_noise, aligned_nmse,
                    aligned_nmse_grid, equivalent_up_to_degeneracies,
                    generate_truth, run_experiment, summarize, write_csv,
                    write_summary)
from .dgn import DgnConfig, DgnTrace, backtrack, dgn_solve, gn_direction
from .ensembles import (DictionaryEnsemble, ExplicitMatrices, Fourier1D,
                        Fourier2D, embed, fourier_magnitudes, fourier_matrices,
                        quadratic_forward)
from .fienup import FienupConfig, sparse_fienup
from .search import SolveResult, draw_weights, gespar, random_support, two_opt
from .signals import (SparseSignal, load_measurements, load_signal,
                      save_measurements, save_signal)
from .support import (Autocorrelation, InfeasibleSupportError,
                      SupportConstraints, UndersampledError, autocorrelation,
                      derive_supports, noisy_mode)

__version__ = "0.1.0"

__all__ = [
    "Autocorrelation",
    "DgnConfig",
    "DgnTrace",
    "DictionaryEnsemble",
    "ExperimentSpec",
    "ExplicitMatrices",
    "FienupConfig",
    "Fourier1D",
    "Fourier2D",
    "InfeasibleSupportError",
    "SolveResult",
    "SparseSignal",
    "SupportConstraints",
    "TrialRecord",
    "UndersampledError",
    "add_noise",
    "aligned_nmse",
    "aligned_nmse_grid",
    "autocorrelation",
    "backend",
    "backtrack",
    "derive_supports",
    "dgn_solve",
    "draw_weights",
    "embed",
    "equivalent_up_to_degeneracies",
    "fourier_magnitudes",
    "fourier_matrices",
    "generate_truth",
    "gespar",
    "gn_direction",
    "load_measurements",
    "load_signal",
    "noisy_mode",
    "quadratic_forward",
    "random_support",
    "run_experiment",
    "save_measurements",
    "save_signal",
    "sparse_fienup",
    "summarize",
    "two_opt",
    "write_csv",
    "write_summary",
]
