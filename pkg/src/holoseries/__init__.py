"""Series expansions of characteristic functions of affine Ito-Levy processes.

The expansion engine builds p(s, x, u) = E[exp(iu.X_s) | X_0 = x] from the
iterated action of the generator on exp(iu.x), in powers of s (Taylor) or
of w = 1 - exp(-eta s) (q-series), and extracts the affine exponent
C(s,u) + x.D(s,u) from the logarithm of the q-series. A Riccati ODE solver
and a Monte Carlo simulator serve as independent oracles.
"""
from . import models
from .generator import GeneratorSpec, build_generator
from .log_affine import AffinityError, ZeroCrossingError, cd_from_h, cd_path, log_affine_eval, rho_sequence
from .mc_oracle import SDEModel, mc_char_fn, simulate_paths
from .modelspec import ModelSpec, ModelSpecError
from .riccati_oracle import BlowUpError, char_fn_riccati, solve_riccati
from .series_engine import (
    SeriesExpansion,
    SeriesValue,
    calibrated_eta,
    g_sequence,
    g_sequence_hp,
    h_sequence,
    q_series_eval,
    select_eta,
    taylor_eval,
    verify_qsys,
)

__all__ = [
    "AffinityError", "BlowUpError", "GeneratorSpec", "ModelSpec", "ModelSpecError", "SDEModel",
    "SeriesExpansion", "SeriesValue", "ZeroCrossingError", "build_generator", "calibrated_eta",
    "cd_from_h", "cd_path", "char_fn_riccati", "g_sequence", "g_sequence_hp", "h_sequence",
    "log_affine_eval", "mc_char_fn", "models", "q_series_eval", "rho_sequence", "select_eta",
    "simulate_paths", "solve_riccati", "taylor_eval", "verify_qsys",
]
__version__ = "0.1.0"
