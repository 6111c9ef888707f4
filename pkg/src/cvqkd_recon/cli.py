"""Command-line interface.

Subcommands
-----------
``gen-code``
    Build a parity-check matrix and write it in alist format (plus a JSON
    sidecar echoing the construction parameters).
``simulate``
    Monte-Carlo sweep over SNR points for the rotation scheme or the
    BI-AWGN benchmark; writes ``<out>.csv`` and ``<out>.json``.
``bench-lookup``
    Decode the same frames with direct and table-based evaluation and
    report timing, frame-error and iteration deltas.
``reconcile``
    Run reverse reconciliation over sample files; writes ``<out>.key``
    (one byte per key bit) and ``<out>.report.json``.

Every subcommand accepts ``--config FILE`` with a JSON object whose keys
mirror the long flag names (dashes as underscores); explicit flags win over
config-file values.  All SNR arguments are in dB.

Exit codes: 0 success, 2 invalid configuration or code specification,
1 runtime failure.  Failures print one line ``ERROR <code>: <message>`` to
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import load_measurement
from .code import CodeSpec, build_rate_adaptive, save_alist
from .decoder import DecoderConfig
from .errors import AlistParseError, ConfigError, InvalidSpecError, ReconciliationError
from .protocol import (
    CampaignPoint,
    reconcile_samples,
    results_to_csv,
    results_to_json,
    run_campaign,
    run_point,
)

_CONFIG_ERRORS = (ConfigError, InvalidSpecError, AlistParseError)


def _add_config_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="JSON file with flag defaults")


def _add_code_args(p: argparse.ArgumentParser, default_k: int) -> None:
    p.add_argument("--k", type=int, default=default_k, help="key bits per frame")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--rate", type=float, default=None, help="target rate (snapped to family)")
    group.add_argument("--rate-index", type=int, default=None, help="extension stages i")
    p.add_argument("--d-ext", type=int, default=3, help="neighbors per extension check")
    p.add_argument("--matrix-seed", type=int, default=0, help="seed for extension stages")


def _add_decoder_args(p: argparse.ArgumentParser, with_evaluation: bool = True) -> None:
    p.add_argument("--schedule", choices=("flooding", "layered"), default="flooding")
    if with_evaluation:
        p.add_argument("--evaluation", choices=("direct", "lookup"), default="lookup")
    p.add_argument("--max-iterations", type=int, default=500)
    p.add_argument("--llr-clamp", type=float, default=38.0)
    p.add_argument("--lookup-resolution", type=int, default=1 << 16)


def _spec_from_args(args) -> CodeSpec:
    if args.rate is not None:
        return CodeSpec.from_rate(args.k, args.rate, d_ext=args.d_ext)
    index = args.rate_index if args.rate_index is not None else 0
    return CodeSpec(k=args.k, rate_index=index, d_ext=args.d_ext)


def _decoder_cfg(args, evaluation: str | None = None) -> DecoderConfig:
    return DecoderConfig(
        max_iterations=args.max_iterations,
        schedule=args.schedule,
        evaluation=evaluation if evaluation is not None else args.evaluation,
        llr_clamp=args.llr_clamp,
        lookup_resolution=args.lookup_resolution,
    )


def _echo(args) -> dict:
    out = {}
    for key, val in vars(args).items():
        if key in ("func", "config"):
            continue
        out[key] = str(val) if isinstance(val, Path) else val
    return out


def _db_to_linear(db: float) -> float:
    return float(10.0 ** (db / 10.0))


def cmd_gen_code(args) -> int:
    spec = _spec_from_args(args)
    matrix = build_rate_adaptive(spec, args.matrix_seed, max_depth=args.peg_depth)
    out = Path(args.out)
    out.write_text(save_alist(matrix))
    sidecar = {
        "config": _echo(args),
        "k": spec.k,
        "rate_index": spec.rate_index,
        "d_ext": spec.d_ext,
        "rate": float(spec.rate),
        "n_vars": matrix.n_vars,
        "n_checks": matrix.n_checks,
        "n_edges": matrix.n_edges,
    }
    Path(str(out) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    print(
        f"wrote {out}: {matrix.n_checks} x {matrix.n_vars} checks x vars, "
        f"{matrix.n_edges} edges, rate {float(spec.rate):.6f}"
    )
    return 0


def cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    dec_cfg = _decoder_cfg(args)
    snrs = [_db_to_linear(db) for db in args.snr_db]
    points = []
    if args.channel == "mdr":
        for dim in args.dims:
            for snr in snrs:
                points.append(CampaignPoint(snr=snr, dim=dim, spec=spec))
    else:
        for snr in snrs:
            points.append(CampaignPoint(snr=snr, dim=0, spec=spec, channel="biawgn"))
    results = run_campaign(
        points,
        n_frames=args.frames,
        seed=args.seed,
        dec_cfg=dec_cfg,
        matrix_seed=args.matrix_seed,
        workers=args.workers,
    )
    csv_text = results_to_csv(results)
    Path(args.out + ".csv").write_text(csv_text)
    Path(args.out + ".json").write_text(results_to_json(results, _echo(args)))
    sys.stdout.write(csv_text)
    return 0


def cmd_bench_lookup(args) -> int:
    spec = _spec_from_args(args)
    point = CampaignPoint(snr=_db_to_linear(args.snr_db), dim=args.dim, spec=spec)
    matrix = build_rate_adaptive(spec, args.matrix_seed)
    records = {}
    for evaluation in ("direct", "lookup"):
        res = run_point(
            point,
            n_frames=args.frames,
            seed=args.seed,
            dec_cfg=_decoder_cfg(args, evaluation=evaluation),
            matrix=matrix,
            workers=args.workers,
        )
        records[evaluation] = res.as_record()
    payload = {
        "config": _echo(args),
        "direct": records["direct"],
        "lookup": records["lookup"],
        "speedup": records["direct"]["mean_decode_s"] / records["lookup"]["mean_decode_s"],
        "fer_delta": records["lookup"]["fer"] - records["direct"]["fer"],
        "mean_iters_ratio": records["lookup"]["mean_iters"] / records["direct"]["mean_iters"],
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_reconcile(args) -> int:
    x, y, noise_variance = load_measurement(args.x, args.y, args.descriptor)
    if args.noise_variance is not None:
        noise_variance = args.noise_variance
    if noise_variance is None:
        raise ConfigError("provide --descriptor or --noise-variance")
    spec = _spec_from_args(args)
    result = reconcile_samples(
        x,
        y,
        noise_variance,
        spec,
        dim=args.dim,
        seed=args.seed,
        matrix_seed=args.matrix_seed,
        dec_cfg=_decoder_cfg(args),
    )
    key_path = Path(args.out + ".key")
    result.key_bits.astype(np.uint8).tofile(key_path)
    report = {
        "config": _echo(args),
        "noise_variance": noise_variance,
        "k": spec.k,
        "rate_index": spec.rate_index,
        "rate": float(spec.rate),
        "block_len": spec.n_vars,
        "frames_attempted": result.frames_attempted,
        "frames_accepted": result.frames_accepted,
        "key_bits": int(result.key_bits.size),
        "leakage_bits": result.leakage_bits,
        "iterations": result.iterations,
        "frame_ok": result.frame_ok,
        "key_file": str(key_path),
    }
    Path(args.out + ".report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(
        f"frames {result.frames_accepted}/{result.frames_attempted} accepted, "
        f"{result.key_bits.size} key bits, {result.leakage_bits} bits leaked"
    )
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="cvqkd-recon",
        description="Multidimensional reconciliation with rate-adaptive LDPC codes",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subs: dict[str, argparse.ArgumentParser] = {}

    p = subparsers.add_parser("gen-code", help="build a parity-check matrix (alist)")
    _add_config_flag(p)
    _add_code_args(p, default_k=20000)
    p.add_argument(
        "--peg-depth",
        type=int,
        default=5,
        help="edge-growth search horizon; deepen for very large graphs",
    )
    p.add_argument("--out", required=True, help="output alist path")
    p.set_defaults(func=cmd_gen_code)
    subs["gen-code"] = p

    p = subparsers.add_parser("simulate", help="Monte-Carlo frame/bit error sweep")
    _add_config_flag(p)
    _add_code_args(p, default_k=20000)
    _add_decoder_args(p)
    p.add_argument("--snr-db", type=float, nargs="+", required=True, help="SNR points in dB")
    p.add_argument("--dims", type=int, nargs="+", default=[8], help="rotation dimensions")
    p.add_argument("--channel", choices=("mdr", "biawgn"), default="mdr")
    p.add_argument("--frames", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix (.csv and .json)")
    p.set_defaults(func=cmd_simulate)
    subs["simulate"] = p

    p = subparsers.add_parser("bench-lookup", help="direct vs lookup evaluation benchmark")
    _add_config_flag(p)
    _add_code_args(p, default_k=20000)
    _add_decoder_args(p, with_evaluation=False)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--frames", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional JSON output path")
    p.set_defaults(func=cmd_bench_lookup)
    subs["bench-lookup"] = p

    p = subparsers.add_parser("reconcile", help="reconcile measurement sample files")
    _add_config_flag(p)
    _add_code_args(p, default_k=20000)
    _add_decoder_args(p)
    p.add_argument("--x", required=True, help="Alice's samples (little-endian float64)")
    p.add_argument("--y", required=True, help="Bob's samples (little-endian float64)")
    p.add_argument("--descriptor", default=None, help="JSON descriptor with noise_variance")
    p.add_argument("--noise-variance", type=float, default=None)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--seed", type=int, default=0, help="seed for the reference side's raw key")
    p.add_argument("--out", required=True, help="output prefix (.key and .report.json)")
    p.set_defaults(func=cmd_reconcile)
    subs["reconcile"] = p

    return parser, subs


def _parse_args(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            defaults = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(defaults, dict):
            raise ConfigError("config file must hold a JSON object")
        known = set(vars(args))
        unknown = set(defaults) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        subs[args.command].set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = _parse_args(sys.argv[1:] if argv is None else list(argv))
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 2
    except ReconciliationError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
