"""Polar code construction by reciprocal channel approximation (RCA)."""

from .bler import BlerEstimate, bit_error_prob, estimate_bler, find_design_snr
from .capacity import c_hat, c_hat_inverse, capacity_oracle, lambert_w0, u_hat
from .polarization import (
    CodeConstruction,
    construct,
    polarize_distinct,
    polarize_uniform,
    select_information_set,
)
from .rca import NEG_INF, check_node_combine, lambda_log, variable_node_combine
from .sim import SimConfig, SimResult, awgn_llrs, encode, run_monte_carlo, sc_decode

__version__ = "0.1.0"

__all__ = [
    "BlerEstimate",
    "CodeConstruction",
    "NEG_INF",
    "SimConfig",
    "SimResult",
    "awgn_llrs",
    "bit_error_prob",
    "c_hat",
    "c_hat_inverse",
    "capacity_oracle",
    "check_node_combine",
    "construct",
    "encode",
    "estimate_bler",
    "find_design_snr",
    "lambda_log",
    "lambert_w0",
    "polarize_distinct",
    "polarize_uniform",
    "run_monte_carlo",
    "sc_decode",
    "select_information_set",
    "u_hat",
    "variable_node_combine",
]
