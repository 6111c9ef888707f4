import json

import numpy as np
import pytest

from cvqkd_recon.channel import ChannelParams, SeededRng, generate_gaussian_pair, generate_raw_key
from cvqkd_recon.code import CodeSpec, build_rate_adaptive, syndrome
from cvqkd_recon.decoder import DecoderConfig
from cvqkd_recon.errors import ConfigError, InvalidSpecError
from cvqkd_recon.integrity import crc32_of_bits
from cvqkd_recon.mdr import MdrConfig
from cvqkd_recon.protocol import (
    CRC_BITS,
    CSV_COLUMNS,
    CampaignPoint,
    ClassicalTranscript,
    PointResult,
    alice_decode_frame,
    bob_prepare_frame,
    bob_verify_frame,
    reconcile_frame,
    reconcile_samples,
    results_to_csv,
    results_to_json,
    run_campaign,
    run_point,
)

SPEC = CodeSpec(k=40, rate_index=0)  # N=200, M=160
DEC = DecoderConfig(max_iterations=100)


def _matrix():
    return build_rate_adaptive(SPEC, seed=0)


def _good_frame(seed=71, snr=10.0, dim=8):
    matrix = _matrix()
    params = ChannelParams(snr=snr, n_samples=matrix.n_vars)
    rng = SeededRng(seed).generator(0)
    x, y = generate_gaussian_pair(params, rng)
    raw = generate_raw_key(matrix.n_vars, rng)
    mdr_cfg = MdrConfig(dim=dim, noise_variance=params.noise_variance)
    return matrix, x, y, raw, mdr_cfg


def test_clean_frame_reconciles():
    matrix, x, y, raw, mdr_cfg = _good_frame()
    report, transcript = reconcile_frame(x, y, raw, matrix, mdr_cfg, DEC)
    assert report.frame_ok and report.crc_ok and report.converged
    assert report.bit_errors == 0
    assert np.array_equal(report.candidate_bits, raw)
    assert transcript.crc == crc32_of_bits(raw)


def test_identical_samples_decode_in_one_iteration():
    matrix, x, y, raw, mdr_cfg = _good_frame()
    report, _ = reconcile_frame(x, x, raw, matrix, mdr_cfg, DEC)
    assert report.frame_ok
    assert report.iterations_used == 1


def test_leakage_is_charged_on_every_frame():
    matrix, x, y, raw, mdr_cfg = _good_frame()
    expected = (matrix.n_vars - SPEC.k) + CRC_BITS

    ok_report, _ = reconcile_frame(x, y, raw, matrix, mdr_cfg, DEC)
    assert ok_report.frame_ok
    assert ok_report.leakage.total_bits == expected

    # a frame that cannot converge is charged exactly the same
    hopeless = MdrConfig(dim=8, noise_variance=50.0)
    bad_report, _ = reconcile_frame(
        x,
        np.asarray(x) + 7.0 * np.random.default_rng(72).standard_normal(len(x)),
        raw,
        matrix,
        hopeless,
        DecoderConfig(max_iterations=3),
    )
    assert not bad_report.frame_ok
    assert bad_report.leakage.total_bits == expected
    # rotation messages are tracked separately, never as binary leakage
    n_blocks = matrix.n_vars // 8
    assert bad_report.leakage.disclosed_reals == n_blocks * 9
    assert ok_report.leakage.syndrome_bits == matrix.n_checks


def test_alice_needs_only_her_samples_and_the_wire_bytes():
    matrix, x, y, raw, mdr_cfg = _good_frame()
    transcript = bob_prepare_frame(y, raw, matrix, mdr_cfg)
    parsed = ClassicalTranscript.from_bytes(transcript.to_bytes())
    result, crc, _ = alice_decode_frame(x, parsed, matrix, mdr_cfg, DEC)
    report, _ = reconcile_frame(x, y, raw, matrix, mdr_cfg, DEC)
    assert np.array_equal(result.bits, report.candidate_bits)
    assert crc == crc32_of_bits(report.candidate_bits)
    assert bob_verify_frame(raw, crc)


def test_transcript_round_trip():
    matrix, x, y, raw, mdr_cfg = _good_frame()
    report, transcript = reconcile_frame(x, y, raw, matrix, mdr_cfg, DEC)
    data = transcript.to_bytes()
    back = ClassicalTranscript.from_bytes(data)
    assert len(back.blocks) == len(transcript.blocks)
    for a, b in zip(back.blocks, transcript.blocks):
        assert np.array_equal(a.rotation.coords, b.rotation.coords)
        assert a.receiver_norm == b.receiver_norm
    assert np.array_equal(back.syndrome_bits, transcript.syndrome_bits)
    assert back.crc == transcript.crc
    assert back.to_bytes() == data


def test_transcript_rejects_malformed_bytes():
    matrix, x, y, raw, mdr_cfg = _good_frame()
    transcript = bob_prepare_frame(y, raw, matrix, mdr_cfg)
    data = transcript.to_bytes()
    with pytest.raises(InvalidSpecError, match="truncated"):
        ClassicalTranscript.from_bytes(data[:-3])
    with pytest.raises(InvalidSpecError, match="kind"):
        ClassicalTranscript.from_bytes(bytes([4, 0, 0, 0, 9, 0]) + b"\x00" * 4)
    # flipping the direction byte of the first record must be rejected
    bad = bytearray(data)
    bad[5] = 1
    with pytest.raises(InvalidSpecError, match="B->A"):
        ClassicalTranscript.from_bytes(bytes(bad))
    with pytest.raises(InvalidSpecError, match="no syndrome"):
        ClassicalTranscript.from_bytes(b"")


def test_corrupted_candidates_never_pass_verification():
    matrix, x, y, raw, mdr_cfg = _good_frame()
    report, _ = reconcile_frame(x, y, raw, matrix, mdr_cfg, DEC)
    assert report.frame_ok
    rng = np.random.default_rng(73)
    for _ in range(300):
        corrupted = report.candidate_bits.copy()
        n_flips = int(rng.integers(1, 9))
        pos = rng.choice(corrupted.size, size=n_flips, replace=False)
        corrupted[pos] ^= 1
        assert not bob_verify_frame(raw, crc32_of_bits(corrupted))


def test_wrong_syndrome_is_caught_by_the_checksum():
    # force the decoder toward a different word: Bob's syndrome gets corrupted
    # in flight, Alice converges to something self-consistent, the CRC fails
    matrix, x, y, raw, mdr_cfg = _good_frame()
    transcript = bob_prepare_frame(y, raw, matrix, mdr_cfg)
    rng = np.random.default_rng(74)
    false_accepts = 0
    attempts = 0
    for _ in range(30):
        tampered = transcript.syndrome_bits.copy()
        pos = rng.choice(tampered.size, size=3, replace=False)
        tampered[pos] ^= 1
        forged = ClassicalTranscript(blocks=transcript.blocks, syndrome_bits=tampered)
        result, crc, _ = alice_decode_frame(x, forged, matrix, mdr_cfg, DEC)
        attempts += 1
        if result.converged and bob_verify_frame(raw, crc):
            false_accepts += 1
    assert attempts == 30
    assert false_accepts == 0


def test_run_point_counts_and_determinism():
    point = CampaignPoint(snr=10.0, dim=8, spec=SPEC)
    a = run_point(point, n_frames=12, seed=5, dec_cfg=DEC)
    b = run_point(point, n_frames=12, seed=5, dec_cfg=DEC)
    assert a.n_frames == 12
    assert a.frames_ok == b.frames_ok
    assert a.bit_errors == b.bit_errors
    assert a.iterations_total == b.iterations_total
    assert a.fer == (12 - a.frames_ok) / 12
    assert a.leakage_bits_per_frame == (SPEC.n_vars - SPEC.k) + CRC_BITS


def test_run_point_is_independent_of_worker_count():
    point = CampaignPoint(snr=1.8, dim=4, spec=SPEC)
    results = [
        run_point(point, n_frames=16, seed=9, dec_cfg=DEC, workers=w) for w in (1, 3, 7)
    ]
    records = [r.as_record() for r in results]
    for rec in records:
        rec.pop("mean_decode_s")  # wall-clock timing is not deterministic
    assert records[0] == records[1] == records[2]


def test_point_index_separates_streams():
    point = CampaignPoint(snr=1.8, dim=8, spec=SPEC)
    a = run_point(point, n_frames=10, seed=9, dec_cfg=DEC, point_index=0)
    b = run_point(point, n_frames=10, seed=9, dec_cfg=DEC, point_index=1)
    # same operating point, disjoint Philox streams: almost surely different
    assert (a.bit_errors, a.iterations_total) != (b.bit_errors, b.iterations_total)


def test_biawgn_point_runs_and_reports_dim_zero():
    point = CampaignPoint(snr=1.2, dim=0, spec=SPEC, channel="biawgn")
    res = run_point(point, n_frames=8, seed=11, dec_cfg=DEC)
    assert res.dim == 0
    assert res.n_frames == 8
    assert 0.0 <= res.fer <= 1.0


def test_campaign_runs_points_in_order():
    points = [
        CampaignPoint(snr=10.0, dim=1, spec=SPEC),
        CampaignPoint(snr=10.0, dim=8, spec=SPEC),
        CampaignPoint(snr=1.2, dim=0, spec=SPEC, channel="biawgn"),
    ]
    results = run_campaign(points, n_frames=5, seed=13, dec_cfg=DEC)
    assert [r.dim for r in results] == [1, 8, 0]
    assert all(r.n_frames == 5 for r in results)


def test_campaign_point_validation():
    with pytest.raises(ConfigError):
        CampaignPoint(snr=0.0, dim=8, spec=SPEC)
    with pytest.raises(ConfigError):
        CampaignPoint(snr=1.0, dim=3, spec=SPEC)
    with pytest.raises(ConfigError):
        CampaignPoint(snr=1.0, dim=8, spec=SPEC, channel="awgn")
    with pytest.raises(ConfigError):
        CampaignPoint(snr=1.0, dim=8, spec=CodeSpec(k=3, rate_index=0))  # 15 % 8 != 0


def test_point_result_statistics():
    res = PointResult(
        snr=2.0,
        dim=8,
        rate=SPEC.rate,
        n_frames=10,
        frames_ok=7,
        bit_errors=12,
        bits_total=2000,
        iterations_total=50,
        decode_seconds_total=1.5,
        leakage_bits_per_frame=192,
    )
    assert res.fer == pytest.approx(0.3)
    assert res.ber == pytest.approx(0.006)
    assert res.mean_iterations == 5.0
    assert res.mean_decode_seconds == pytest.approx(0.15)
    row = res.as_row()
    assert row["snr_db"] == pytest.approx(10.0 * np.log10(2.0))
    assert row["rate"] == 0.2


def test_csv_and_json_serialization():
    point = CampaignPoint(snr=10.0, dim=8, spec=SPEC)
    results = [run_point(point, n_frames=4, seed=17, dec_cfg=DEC)]
    csv_text = results_to_csv(results)
    lines = csv_text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    values = lines[1].split(",")
    assert len(values) == len(CSV_COLUMNS)
    assert float(values[0]) == pytest.approx(10.0)  # snr_db
    assert int(values[1]) == 8
    assert int(values[3]) == 4

    payload = json.loads(results_to_json(results, {"note": "test"}))
    assert payload["config"] == {"note": "test"}
    rec = payload["results"][0]
    for col in CSV_COLUMNS:
        assert col in rec
    assert rec["leakage_bits_per_frame"] == (SPEC.n_vars - SPEC.k) + CRC_BITS


def test_reconcile_samples_end_to_end():
    matrix = _matrix()
    n = matrix.n_vars
    params = ChannelParams(snr=10.0, n_samples=2 * n + 17)  # trailing samples dropped
    x, y = generate_gaussian_pair(params, SeededRng(75).generator(0))
    result = reconcile_samples(x, y, params.noise_variance, SPEC, dim=8, seed=4)
    assert result.frames_attempted == 2
    assert result.frames_accepted == 2
    assert result.key_bits.size == 2 * SPEC.k
    assert result.leakage_bits == 2 * ((n - SPEC.k) + CRC_BITS)
    assert len(result.iterations) == 2 and len(result.frame_ok) == 2

    # the emitted key is the head of each frame's raw bits (reverse
    # reconciliation: Bob's word is the reference)
    for f in range(2):
        raw = generate_raw_key(n, SeededRng(4).generator(f))
        assert np.array_equal(result.key_bits[f * SPEC.k : (f + 1) * SPEC.k], raw[: SPEC.k])

    again = reconcile_samples(x, y, params.noise_variance, SPEC, dim=8, seed=4)
    assert np.array_equal(again.key_bits, result.key_bits)


def test_reconcile_samples_with_too_few_samples():
    matrix = _matrix()
    x = np.zeros(matrix.n_vars - 1)
    result = reconcile_samples(x, x, 0.1, SPEC)
    assert result.frames_attempted == 0
    assert result.key_bits.size == 0
    assert result.leakage_bits == 0


def test_reconcile_samples_validation():
    with pytest.raises(ConfigError):
        reconcile_samples(np.zeros(5), np.zeros(6), 0.1, SPEC)
    with pytest.raises(ConfigError):
        reconcile_samples(np.zeros(5), np.zeros(5), 0.0, SPEC)
    with pytest.raises(ConfigError):
        reconcile_samples(np.zeros(5), np.zeros(5), 0.1, SPEC, dim=5)
    with pytest.raises(ConfigError):
        reconcile_samples(np.zeros((2, 5)), np.zeros((2, 5)), 0.1, SPEC)
