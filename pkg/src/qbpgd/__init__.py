"""Syndrome decoding of quantum LDPC CSS codes with belief propagation and guided decimation."""

from .bp import BpConfig, TannerGraph, bp_run, channel_llr
from .codes import (
    CssCode,
    DecodeOutcome,
    PauliVector,
    classify_quaternary_outcome,
    classify_x_outcome,
    hypergraph_product,
    parse_code_file,
    steane_code,
    syndrome_full,
    syndrome_x,
    validate_css,
)
from .decimation import GdConfig, GdResult, bpgd_decode, bpgd_rd_decode, degeneracy_experiment
from .gf2 import BitMatrix, BitVector
from .montecarlo import DecoderSpec, NoiseModel, TrialStats, run_trials, sample_error
from .quaternary import QGdConfig, QuatGraph, qbp_run, qbpgd_decode

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "BitVector",
    "BpConfig",
    "CssCode",
    "DecodeOutcome",
    "DecoderSpec",
    "GdConfig",
    "GdResult",
    "NoiseModel",
    "PauliVector",
    "QGdConfig",
    "QuatGraph",
    "TannerGraph",
    "TrialStats",
    "bp_run",
    "bpgd_decode",
    "bpgd_rd_decode",
    "channel_llr",
    "classify_quaternary_outcome",
    "classify_x_outcome",
    "degeneracy_experiment",
    "hypergraph_product",
    "parse_code_file",
    "qbp_run",
    "qbpgd_decode",
    "run_trials",
    "sample_error",
    "steane_code",
    "syndrome_full",
    "syndrome_x",
    "validate_css",
]
