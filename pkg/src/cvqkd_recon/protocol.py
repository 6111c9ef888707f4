"""Reverse reconciliation protocol, leakage accounting, and campaigns.

Roles are kept separate so tests can prove information flow: Bob (the
reference side holding the raw key) publishes rotation messages and a
syndrome; Alice decodes from her own samples plus that transcript alone and
answers with a checksum of her candidate; Bob accepts or rejects the frame.

Binary leakage is charged conservatively: the full syndrome (``n - k``
bits) plus the 32 checksum bits on every frame, converged or not.  The
rotation messages disclose real numbers that are independent of the key by
construction; they are counted separately and not charged as binary
leakage.
"""

from __future__ import annotations

import json
import math
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .channel import (
    ChannelParams,
    SeededRng,
    generate_biawgn,
    generate_gaussian_pair,
    generate_raw_key,
)
from .code import CodeSpec, ParityCheckMatrix, build_rate_adaptive, syndrome
from .decoder import DecodeResult, DecoderConfig, LookupTables, decode, _tables_for
from .errors import ConfigError, InvalidSpecError
from .integrity import crc32_of_bits, crc_from_bytes, crc_match, crc_to_bytes, pack_bits
from .mdr import MdrBlockMessage, MdrConfig, mdr_decode_frame, mdr_encode_frame

CRC_BITS = 32

KIND_MDR_BLOCK = 1
KIND_SYNDROME = 2
KIND_CRC = 3
DIR_B_TO_A = 0
DIR_A_TO_B = 1

_RECORD_HEADER = struct.Struct("<IBB")


@dataclass(frozen=True)
class LeakageLedger:
    """Bits disclosed over the classical channel for one frame."""

    syndrome_bits: int
    crc_bits: int = CRC_BITS
    disclosed_reals: int = 0

    @property
    def total_bits(self) -> int:
        return self.syndrome_bits + self.crc_bits


@dataclass
class ClassicalTranscript:
    """Everything that crossed the classical channel for one frame."""

    blocks: tuple[MdrBlockMessage, ...]
    syndrome_bits: np.ndarray
    crc: int | None = None

    def to_bytes(self) -> bytes:
        out = bytearray()
        for msg in self.blocks:
            payload = msg.to_bytes()
            out += _RECORD_HEADER.pack(len(payload), KIND_MDR_BLOCK, DIR_B_TO_A)
            out += payload
        synd = np.ascontiguousarray(self.syndrome_bits, dtype=np.uint8)
        payload = struct.pack("<I", synd.shape[0]) + pack_bits(synd)
        out += _RECORD_HEADER.pack(len(payload), KIND_SYNDROME, DIR_B_TO_A)
        out += payload
        if self.crc is not None:
            payload = crc_to_bytes(self.crc)
            out += _RECORD_HEADER.pack(len(payload), KIND_CRC, DIR_A_TO_B)
            out += payload
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ClassicalTranscript":
        blocks: list[MdrBlockMessage] = []
        synd = None
        crc = None
        pos = 0
        while pos < len(data):
            if pos + _RECORD_HEADER.size > len(data):
                raise InvalidSpecError("truncated transcript record header")
            length, kind, direction = _RECORD_HEADER.unpack_from(data, pos)
            pos += _RECORD_HEADER.size
            if pos + length > len(data):
                raise InvalidSpecError("truncated transcript record payload")
            payload = data[pos : pos + length]
            pos += length
            if kind == KIND_MDR_BLOCK:
                if direction != DIR_B_TO_A:
                    raise InvalidSpecError("rotation message must flow B->A")
                if length % 8 or length < 16:
                    raise InvalidSpecError("rotation record must hold dim+1 float64s")
                blocks.append(MdrBlockMessage.from_bytes(payload, length // 8 - 1))
            elif kind == KIND_SYNDROME:
                if direction != DIR_B_TO_A:
                    raise InvalidSpecError("syndrome must flow B->A")
                (n_bits,) = struct.unpack_from("<I", payload)
                packed = np.frombuffer(payload[4:], dtype=np.uint8)
                if packed.size != (n_bits + 7) // 8:
                    raise InvalidSpecError("syndrome payload length mismatch")
                synd = np.unpackbits(packed)[:n_bits]
            elif kind == KIND_CRC:
                if direction != DIR_A_TO_B:
                    raise InvalidSpecError("checksum must flow A->B")
                crc = crc_from_bytes(payload)
            else:
                raise InvalidSpecError(f"unknown transcript record kind {kind}")
        if synd is None:
            raise InvalidSpecError("transcript carries no syndrome record")
        return cls(blocks=tuple(blocks), syndrome_bits=synd, crc=crc)


@dataclass(frozen=True)
class ReconciliationReport:
    frame_ok: bool
    crc_ok: bool
    converged: bool
    iterations_used: int
    candidate_bits: np.ndarray
    leakage: LeakageLedger
    decode_seconds: float
    bit_errors: int | None = None


def bob_prepare_frame(
    y: np.ndarray, raw_bits: np.ndarray, matrix: ParityCheckMatrix, mdr_cfg: MdrConfig
) -> ClassicalTranscript:
    """Bob's outgoing half: rotation messages for his raw key plus its
    syndrome.  Nothing here depends on Alice's samples."""
    blocks = mdr_encode_frame(y, raw_bits, mdr_cfg)
    synd = syndrome(matrix, raw_bits)
    return ClassicalTranscript(blocks=tuple(blocks), syndrome_bits=synd)


def alice_decode_frame(
    x: np.ndarray,
    transcript: ClassicalTranscript,
    matrix: ParityCheckMatrix,
    mdr_cfg: MdrConfig,
    dec_cfg: DecoderConfig,
    tables: LookupTables | None = None,
) -> tuple[DecodeResult, int, float]:
    """Alice's half: sees only her samples and the transcript.  Returns the
    decode result, the checksum of her candidate, and the decode time."""
    frame = mdr_decode_frame(x, list(transcript.blocks), mdr_cfg)
    t0 = time.perf_counter()
    result = decode(matrix, frame, transcript.syndrome_bits, dec_cfg, tables)
    dt = time.perf_counter() - t0
    return result, crc32_of_bits(result.bits), dt


def bob_verify_frame(raw_bits: np.ndarray, crc: int) -> bool:
    return crc_match(crc32_of_bits(raw_bits), crc)


def reconcile_frame(
    x: np.ndarray,
    y: np.ndarray,
    raw_bits: np.ndarray,
    matrix: ParityCheckMatrix,
    mdr_cfg: MdrConfig,
    dec_cfg: DecoderConfig,
    tables: LookupTables | None = None,
) -> tuple[ReconciliationReport, ClassicalTranscript]:
    """Run both halves of the protocol for one frame."""
    transcript = bob_prepare_frame(y, raw_bits, matrix, mdr_cfg)
    result, crc, dt = alice_decode_frame(x, transcript, matrix, mdr_cfg, dec_cfg, tables)
    crc_ok = bob_verify_frame(raw_bits, crc)
    transcript.crc = crc
    leakage = LeakageLedger(
        syndrome_bits=matrix.n_checks,
        disclosed_reals=len(transcript.blocks) * (mdr_cfg.dim + 1),
    )
    report = ReconciliationReport(
        frame_ok=bool(result.converged and crc_ok),
        crc_ok=crc_ok,
        converged=result.converged,
        iterations_used=result.iterations_used,
        candidate_bits=result.bits,
        leakage=leakage,
        decode_seconds=dt,
        bit_errors=int(np.count_nonzero(result.bits != raw_bits)),
    )
    return report, transcript


@dataclass(frozen=True)
class CampaignPoint:
    """One operating point of a Monte-Carlo sweep.

    ``channel`` selects the plain binary-input AWGN benchmark or the
    rotation-based scheme; ``dim`` is ignored (and reported as 0) for the
    former.
    """

    snr: float
    dim: int
    spec: CodeSpec
    channel: str = "mdr"

    def __post_init__(self):
        if not self.snr > 0:
            raise ConfigError("snr must be positive")
        if self.channel not in ("mdr", "biawgn"):
            raise ConfigError(f"channel must be 'mdr' or 'biawgn', got {self.channel!r}")
        if self.channel == "mdr":
            if self.dim not in (1, 2, 4, 8):
                raise ConfigError("dim must be one of 1, 2, 4, 8")
            if self.spec.n_vars % self.dim:
                raise ConfigError(
                    f"block length {self.spec.n_vars} not divisible by dim {self.dim}"
                )


@dataclass
class PointResult:
    snr: float
    dim: int
    rate: Fraction
    n_frames: int
    frames_ok: int
    bit_errors: int
    bits_total: int
    iterations_total: int
    decode_seconds_total: float
    leakage_bits_per_frame: int

    @property
    def fer(self) -> float:
        return (self.n_frames - self.frames_ok) / self.n_frames

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total

    @property
    def mean_iterations(self) -> float:
        return self.iterations_total / self.n_frames

    @property
    def mean_decode_seconds(self) -> float:
        return self.decode_seconds_total / self.n_frames

    def as_row(self) -> dict:
        return {
            "snr_db": 10.0 * math.log10(self.snr),
            "dim": self.dim,
            "rate": float(self.rate),
            "n_frames": self.n_frames,
            "fer": self.fer,
            "ber": self.ber,
            "mean_iters": self.mean_iterations,
            "mean_decode_s": self.mean_decode_seconds,
        }

    def as_record(self) -> dict:
        row = self.as_row()
        row.update(
            {
                "frames_ok": self.frames_ok,
                "bit_errors": self.bit_errors,
                "bits_total": self.bits_total,
                "iterations_total": self.iterations_total,
                "leakage_bits_per_frame": self.leakage_bits_per_frame,
            }
        )
        return row


def _mdr_frame(params: ChannelParams, matrix, mdr_cfg, dec_cfg, tables, rng):
    x, y = generate_gaussian_pair(params, rng)
    raw = generate_raw_key(params.n_samples, rng)
    report, _ = reconcile_frame(x, y, raw, matrix, mdr_cfg, dec_cfg, tables)
    return report


def _biawgn_frame(params: ChannelParams, matrix, dec_cfg, tables, rng):
    raw = generate_raw_key(params.n_samples, rng)
    llrs = generate_biawgn(params, raw, rng)
    synd = syndrome(matrix, raw)
    t0 = time.perf_counter()
    result = decode(matrix, llrs, synd, dec_cfg, tables)
    dt = time.perf_counter() - t0
    crc_ok = bob_verify_frame(raw, crc32_of_bits(result.bits))
    return ReconciliationReport(
        frame_ok=bool(result.converged and crc_ok),
        crc_ok=crc_ok,
        converged=result.converged,
        iterations_used=result.iterations_used,
        candidate_bits=result.bits,
        leakage=LeakageLedger(syndrome_bits=matrix.n_checks),
        decode_seconds=dt,
        bit_errors=int(np.count_nonzero(result.bits != raw)),
    )


def run_point(
    point: CampaignPoint,
    n_frames: int,
    seed: int,
    dec_cfg: DecoderConfig,
    matrix: ParityCheckMatrix | None = None,
    matrix_seed: int = 0,
    workers: int = 1,
    point_index: int = 0,
) -> PointResult:
    """Monte-Carlo estimate at one operating point.

    Frame ``f`` of point ``p`` always draws from Philox stream
    ``(p << 32) | f`` of ``seed``, so results do not depend on ``workers``
    or on scheduling order.
    """
    if n_frames < 1:
        raise ConfigError("n_frames must be positive")
    if matrix is None:
        matrix = build_rate_adaptive(point.spec, matrix_seed)
    rng_family = SeededRng(seed)
    tables = _tables_for(dec_cfg) if dec_cfg.evaluation == "lookup" else None
    params = ChannelParams(snr=point.snr, n_samples=matrix.n_vars)
    mdr_cfg = (
        MdrConfig(dim=point.dim, noise_variance=params.noise_variance)
        if point.channel == "mdr"
        else None
    )

    def one_frame(frame_idx: int) -> ReconciliationReport:
        rng = rng_family.generator((point_index << 32) | frame_idx)
        if point.channel == "mdr":
            return _mdr_frame(params, matrix, mdr_cfg, dec_cfg, tables, rng)
        return _biawgn_frame(params, matrix, dec_cfg, tables, rng)

    if workers <= 1:
        reports = [one_frame(f) for f in range(n_frames)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one_frame, range(n_frames)))

    return PointResult(
        snr=point.snr,
        dim=point.dim if point.channel == "mdr" else 0,
        rate=point.spec.rate,
        n_frames=n_frames,
        frames_ok=sum(1 for r in reports if r.frame_ok),
        bit_errors=sum(r.bit_errors for r in reports),
        bits_total=n_frames * matrix.n_vars,
        iterations_total=sum(r.iterations_used for r in reports),
        decode_seconds_total=float(sum(r.decode_seconds for r in reports)),
        leakage_bits_per_frame=matrix.n_checks + CRC_BITS,
    )


def run_campaign(
    points: list[CampaignPoint],
    n_frames: int,
    seed: int,
    dec_cfg: DecoderConfig | None = None,
    matrix_seed: int = 0,
    workers: int = 1,
) -> list[PointResult]:
    """Sweep a list of operating points; matrices are shared across points
    with the same code spec."""
    if dec_cfg is None:
        dec_cfg = DecoderConfig()
    matrices: dict[CodeSpec, ParityCheckMatrix] = {}
    results = []
    for idx, point in enumerate(points):
        matrix = matrices.get(point.spec)
        if matrix is None:
            matrix = build_rate_adaptive(point.spec, matrix_seed)
            matrices[point.spec] = matrix
        results.append(
            run_point(
                point,
                n_frames,
                seed,
                dec_cfg,
                matrix=matrix,
                matrix_seed=matrix_seed,
                workers=workers,
                point_index=idx,
            )
        )
    return results


CSV_COLUMNS = ("snr_db", "dim", "rate", "n_frames", "fer", "ber", "mean_iters", "mean_decode_s")


def results_to_csv(results: list[PointResult]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for res in results:
        row = res.as_row()
        lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def results_to_json(results: list[PointResult], config_echo: dict) -> str:
    payload = {"config": config_echo, "results": [res.as_record() for res in results]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@dataclass
class BlackBoxResult:
    """Outcome of reconciling a stream of correlated samples."""

    key_bits: np.ndarray
    frames_attempted: int
    frames_accepted: int
    leakage_bits: int
    iterations: list[int]
    frame_ok: list[bool]
    reports: list[ReconciliationReport] = field(repr=False, default_factory=list)


def reconcile_samples(
    x: np.ndarray,
    y: np.ndarray,
    noise_variance: float,
    spec: CodeSpec,
    dim: int = 8,
    seed: int = 0,
    matrix_seed: int = 0,
    dec_cfg: DecoderConfig | None = None,
    matrix: ParityCheckMatrix | None = None,
) -> BlackBoxResult:
    """Reconcile correlated Gaussian sample streams frame by frame.

    ``x`` are Alice's samples, ``y`` Bob's; both are consumed in frames of
    the spec's block length (a trailing partial frame is dropped).  Bob's
    raw key bits are drawn from Philox stream ``frame_index`` of ``seed``.
    The output key takes the first ``k`` corrected bits of each accepted
    frame, in frame order.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ConfigError("sample streams must be 1-d arrays of equal length")
    if not noise_variance > 0:
        raise ConfigError("noise_variance must be positive")
    if dim not in (1, 2, 4, 8):
        raise ConfigError("dim must be one of 1, 2, 4, 8")
    if dec_cfg is None:
        dec_cfg = DecoderConfig()
    n = spec.n_vars
    if n % dim:
        raise ConfigError(f"block length {n} not divisible by dim {dim}")
    if matrix is None:
        matrix = build_rate_adaptive(spec, matrix_seed)
    mdr_cfg = MdrConfig(dim=dim, noise_variance=noise_variance)
    tables = _tables_for(dec_cfg) if dec_cfg.evaluation == "lookup" else None
    rng_family = SeededRng(seed)

    n_frames = x.shape[0] // n
    reports: list[ReconciliationReport] = []
    key_chunks: list[np.ndarray] = []
    leakage = 0
    for f in range(n_frames):
        xf = x[f * n : (f + 1) * n]
        yf = y[f * n : (f + 1) * n]
        raw = generate_raw_key(n, rng_family.generator(f))
        report, _ = reconcile_frame(xf, yf, raw, matrix, mdr_cfg, dec_cfg, tables)
        reports.append(report)
        leakage += report.leakage.total_bits
        if report.frame_ok:
            key_chunks.append(report.candidate_bits[: spec.k])
    key_bits = (
        np.concatenate(key_chunks) if key_chunks else np.empty(0, dtype=np.uint8)
    )
    return BlackBoxResult(
        key_bits=key_bits,
        frames_attempted=n_frames,
        frames_accepted=sum(1 for r in reports if r.frame_ok),
        leakage_bits=leakage,
        iterations=[r.iterations_used for r in reports],
        frame_ok=[r.frame_ok for r in reports],
        reports=reports,
    )
