"""CRC-32 verification of reconciled key frames.

Both parties must agree bit-for-bit, so the variant is pinned: CRC-32 as in
ISO/HDLC and zlib (polynomial 0x04C11DB7 reflected, init 0xFFFFFFFF,
reflected input and output, final XOR 0xFFFFFFFF).  Key bits are packed
MSB-first into octets, zero-padding the tail of the last octet.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np


def pack_bits(bits) -> bytes:
    """Pack a 0/1 sequence into bytes, MSB first, zero-padded at the tail."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bits must be a flat sequence")
    if arr.size and arr.max() > 1:
        raise ValueError("bits must be 0 or 1")
    return np.packbits(arr).tobytes()


def crc32_of_bits(bits) -> int:
    """CRC-32 of a bit sequence under the pinned parameters.

    The empty sequence yields 0.
    """
    return zlib.crc32(pack_bits(bits)) & 0xFFFFFFFF


def crc_match(a: int, b: int) -> bool:
    """Compare two CRC values."""
    return (a & 0xFFFFFFFF) == (b & 0xFFFFFFFF)


def crc_to_bytes(value: int) -> bytes:
    """Wire form of a CRC value: 4 bytes, big-endian."""
    return struct.pack(">I", value & 0xFFFFFFFF)


def crc_from_bytes(data: bytes) -> int:
    if len(data) != 4:
        raise ValueError("CRC wire form is exactly 4 bytes")
    return struct.unpack(">I", data)[0]


def crc32_parameterized(data: bytes, init: int = 0xFFFFFFFF, xorout: int = 0xFFFFFFFF) -> int:
    """Bitwise reflected CRC-32 with configurable init/xor-out.

    With the defaults this equals :func:`crc32_of_bits` on packed input; with
    ``init=0, xorout=0`` it exposes the raw polynomial division, which is
    linear over GF(2).
    """
    crc = init & 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ 0xEDB88320 if crc & 1 else crc >> 1
    return (crc ^ xorout) & 0xFFFFFFFF
