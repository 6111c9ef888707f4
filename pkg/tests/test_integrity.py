import numpy as np
import pytest

from cvqkd_recon.integrity import (
    crc32_of_bits,
    crc32_parameterized,
    crc_from_bytes,
    crc_match,
    crc_to_bytes,
    pack_bits,
)


def _crc32_reference(data: bytes) -> int:
    """Table-free bit-serial CRC-32 (reflected 0x04C11DB7), written
    independently of the library so the two can cross-check each other."""
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ 0xEDB88320 if crc & 1 else crc >> 1
    return crc ^ 0xFFFFFFFF


def _bits_of(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def test_standard_check_vector():
    # the classic "123456789" check value for CRC-32/ISO-HDLC
    assert _crc32_reference(b"123456789") == 0xCBF43926
    assert crc32_of_bits(_bits_of(b"123456789")) == 0xCBF43926


def test_empty_input():
    assert crc32_of_bits([]) == 0
    assert _crc32_reference(b"") == 0


def test_matches_independent_reference_on_random_input():
    rng = np.random.default_rng(21)
    for _ in range(50):
        data = rng.integers(0, 256, size=int(rng.integers(1, 200)), dtype=np.uint8)
        raw = data.tobytes()
        assert crc32_of_bits(_bits_of(raw)) == _crc32_reference(raw)
        assert crc32_parameterized(raw) == _crc32_reference(raw)


def test_pack_bits_is_msb_first_and_zero_padded():
    assert pack_bits([1, 0, 1, 1, 0, 0, 0, 0]) == b"\xb0"
    assert pack_bits([1]) == b"\x80"
    assert pack_bits([0, 0, 0, 0, 0, 0, 0, 1]) == b"\x01"
    assert pack_bits([1] * 8 + [1]) == b"\xff\x80"
    assert pack_bits([]) == b""


def test_pack_bits_rejects_bad_input():
    with pytest.raises(ValueError):
        pack_bits([0, 2, 1])
    with pytest.raises(ValueError):
        pack_bits(np.zeros((2, 4), dtype=np.uint8))


def test_wire_form_is_big_endian():
    assert crc_to_bytes(0xCBF43926) == b"\xcb\xf4\x39\x26"
    assert crc_from_bytes(b"\xcb\xf4\x39\x26") == 0xCBF43926
    for value in (0, 1, 0xFFFFFFFF, 0x12345678):
        assert crc_from_bytes(crc_to_bytes(value)) == value
    with pytest.raises(ValueError):
        crc_from_bytes(b"\x00" * 3)


def test_crc_match_masks_to_32_bits():
    assert crc_match(0xCBF43926, 0xCBF43926)
    assert crc_match(0x1_CBF43926, 0xCBF43926)
    assert not crc_match(0xCBF43926, 0xCBF43927)


def test_raw_polynomial_division_is_gf2_linear():
    # with init = xorout = 0 the map is linear: crc(a ^ b) = crc(a) ^ crc(b)
    rng = np.random.default_rng(22)
    for _ in range(25):
        n = int(rng.integers(1, 64))
        a = rng.integers(0, 256, size=n, dtype=np.uint8)
        b = rng.integers(0, 256, size=n, dtype=np.uint8)
        ca = crc32_parameterized(a.tobytes(), init=0, xorout=0)
        cb = crc32_parameterized(b.tobytes(), init=0, xorout=0)
        cab = crc32_parameterized((a ^ b).tobytes(), init=0, xorout=0)
        assert cab == ca ^ cb


def test_single_bit_flips_always_change_the_value():
    rng = np.random.default_rng(23)
    bits = rng.integers(0, 2, size=64, dtype=np.uint8)
    ref = crc32_of_bits(bits)
    for pos in range(bits.size):
        flipped = bits.copy()
        flipped[pos] ^= 1
        assert crc32_of_bits(flipped) != ref


def test_tail_padding_behavior():
    # packing zero-pads to whole octets: zeros inside the final octet are
    # invisible, a whole extra octet of zeros is not (frame lengths are fixed
    # in the protocol, so the former never aliases two different frames)
    assert crc32_of_bits([1, 0, 1]) == crc32_of_bits([1, 0, 1, 0, 0])
    assert crc32_of_bits([1, 0, 1]) != crc32_of_bits([1, 0, 1] + [0] * 8)
