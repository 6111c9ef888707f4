"""Information reconciliation for continuous-variable QKD.

Multidimensional (rotation-based) reconciliation over composition algebras,
rate-adaptive LDPC codes, syndrome-based sum-product decoding, and the
reverse reconciliation protocol with leakage accounting.
"""

from .algebra import CdElement, cd_conjugate, cd_inverse, cd_multiply, cd_norm
from .channel import ChannelParams, SeededRng, load_measurement
from .code import (
    CodeSpec,
    ParityCheckMatrix,
    build_mother_code,
    build_rate_adaptive,
    load_alist,
    save_alist,
    syndrome,
)
from .decoder import DecodeResult, DecoderConfig, build_lookup_tables, decode
from .errors import (
    AlistParseError,
    ConfigError,
    DegenerateInputError,
    DimensionMismatchError,
    InvalidSpecError,
    ReconciliationError,
)
from .integrity import crc32_of_bits, crc_match
from .mdr import LlrFrame, MdrBlockMessage, MdrConfig, mdr_decode_frame, mdr_encode_frame
from .protocol import (
    BlackBoxResult,
    CampaignPoint,
    ClassicalTranscript,
    LeakageLedger,
    PointResult,
    ReconciliationReport,
    reconcile_frame,
    reconcile_samples,
    run_campaign,
    run_point,
)

__version__ = "0.1.0"

__all__ = [
    "AlistParseError",
    "BlackBoxResult",
    "CampaignPoint",
    "CdElement",
    "ChannelParams",
    "ClassicalTranscript",
    "CodeSpec",
    "ConfigError",
    "DecodeResult",
    "DecoderConfig",
    "DegenerateInputError",
    "DimensionMismatchError",
    "InvalidSpecError",
    "LeakageLedger",
    "LlrFrame",
    "MdrBlockMessage",
    "MdrConfig",
    "ParityCheckMatrix",
    "PointResult",
    "ReconciliationError",
    "ReconciliationReport",
    "SeededRng",
    "build_lookup_tables",
    "build_mother_code",
    "build_rate_adaptive",
    "cd_conjugate",
    "cd_inverse",
    "cd_multiply",
    "cd_norm",
    "crc32_of_bits",
    "crc_match",
    "decode",
    "load_alist",
    "load_measurement",
    "mdr_decode_frame",
    "mdr_encode_frame",
    "reconcile_frame",
    "reconcile_samples",
    "run_campaign",
    "run_point",
    "save_alist",
    "syndrome",
]
