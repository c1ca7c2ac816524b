"""Causal linear tree codes with anytime reliability over GF(2).

Modules: ``bitlinalg`` (GF(2) matrices), ``code`` (Toeplitz ensembles,
encoding), ``spectrum`` (weight spectra, certification), ``channel``,
``decode`` (streaming erasure decoder), ``bounds`` (thresholds and the
stabilizable region), ``control`` (plant simulation) and ``harness`` (CLI).
"""

__version__ = "0.1.0"

from .bitlinalg import BitMatrix, Inconsistent
from .channel import ERASED, ChannelKind, ChannelModel, bhattacharyya, derive_seed, transmit
from .code import (
    CodeParams,
    NotACodeword,
    StreamEncoder,
    ToeplitzGenerator,
    ToeplitzParityCheck,
    derive_generator,
    encode_step,
    extend_horizon,
    load_code,
    principal_minor,
    recover_messages,
    sample_tz,
    save_code,
)
from .decode import DecoderState, complexity_stats, ml_oracle
from .spectrum import AnytimeCertificate, BudgetExceeded, WeightSpectrum, certify, enumerate_spectrum, union_bound_error

__all__ = [
    "__version__",
    "BitMatrix",
    "Inconsistent",
    "ERASED",
    "ChannelKind",
    "ChannelModel",
    "bhattacharyya",
    "derive_seed",
    "transmit",
    "CodeParams",
    "NotACodeword",
    "StreamEncoder",
    "ToeplitzGenerator",
    "ToeplitzParityCheck",
    "derive_generator",
    "encode_step",
    "extend_horizon",
    "load_code",
    "principal_minor",
    "recover_messages",
    "sample_tz",
    "save_code",
    "DecoderState",
    "complexity_stats",
    "ml_oracle",
    "AnytimeCertificate",
    "BudgetExceeded",
    "WeightSpectrum",
    "certify",
    "enumerate_spectrum",
    "union_bound_error",
]
