/**
 * Thin TypeScript wrapper around the `cvqkd-recon` command line tool.
 *
 * The wrapper holds no algorithmic logic: samples are written to the
 * tool's little-endian float64 file format, `python3 -m cvqkd_recon
 * reconcile` does all the work, and the result is read back from the key
 * file and JSON report it produced. Results are therefore bit-identical
 * to driving the CLI by hand with the same inputs and seed.
 *
 * Calls are blocking and each call owns a private temporary directory,
 * so concurrent use from multiple host threads is safe.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface ReconcileOptions {
    /** Key bits per frame; defaults to the CLI default (20000). */
    k?: number;
    /** Rotation dimension (1, 2, 4 or 8). */
    dim?: number;
    /** Seed for the reference side's raw key. */
    seed?: number;
    /** Seed for the extension stages of the parity-check matrix. */
    matrixSeed?: number;
    maxIterations?: number;
    schedule?: "flooding" | "layered";
    evaluation?: "direct" | "lookup";
    /** Interpreter used to run the core; overrides $CVQKD_RECON_CMD. */
    pythonCommand?: string;
}

export interface BlackBoxResult {
    framesAttempted: number;
    framesAccepted: number;
    /** Corrected key, one byte per bit, concatenated over accepted frames. */
    keyBits: Uint8Array;
    leakageBits: number;
    iterations: number[];
    frameOk: boolean[];
    rate: number;
    blockLength: number;
    noiseVariance: number;
    /** Raw report written by the CLI, kept verbatim for audit. */
    report: Record<string, unknown>;
}

export class CoreError extends Error {
    constructor(
        message: string,
        public readonly code: string,
        public readonly exitCode: number,
    ) {
        super(message);
        this.name = new.target.name;
    }
}

export class ConfigError extends CoreError {}
export class InvalidSpecError extends CoreError {}
export class AlistParseError extends CoreError {}
export class IoError extends CoreError {}

const ERROR_CLASSES: Record<string, new (m: string, c: string, e: number) => CoreError> = {
    "config": ConfigError,
    "invalid-spec": InvalidSpecError,
    "alist-parse": AlistParseError,
    "io": IoError,
};

function pythonCommand(options?: ReconcileOptions): string {
    return options?.pythonCommand ?? process.env.CVQKD_RECON_CMD ?? "python3";
}

function throwMapped(stderr: string, exitCode: number): never {
    const match = stderr.match(/^ERROR ([a-z-]+): (.*)$/m);
    if (match) {
        const cls = ERROR_CLASSES[match[1]] ?? CoreError;
        throw new cls(match[2], match[1], exitCode);
    }
    throw new CoreError(stderr.trim() || `core exited with code ${exitCode}`, "error", exitCode);
}

function runCore(args: string[], options?: ReconcileOptions): string {
    try {
        return execFileSync(pythonCommand(options), ["-m", "cvqkd_recon", ...args], {
            encoding: "utf-8",
            stdio: ["ignore", "pipe", "pipe"],
        });
    } catch (err: unknown) {
        const e = err as { status?: number | null; stderr?: string; message?: string };
        if (typeof e.status === "number") {
            throwMapped(e.stderr ?? "", e.status);
        }
        throw new CoreError(e.message ?? String(err), "spawn", -1);
    }
}

function writeSamples(path: string, samples: ArrayLike<number>): void {
    const buf = Buffer.alloc(samples.length * 8);
    for (let i = 0; i < samples.length; i++) {
        buf.writeDoubleLE(Number(samples[i]), i * 8);
    }
    writeFileSync(path, buf);
}

/** Version string of the underlying core, for audit. */
export function coreVersion(options?: ReconcileOptions): string {
    return runCore(["--version"], options).trim();
}

/**
 * Reconcile Alice's samples `x` against Bob's samples `y`.
 *
 * `rate` is the target code rate and must lie in the supported band
 * [0.01, 0.2]; it is snapped to the nearest member of the k/(5k+i)
 * family for the configured k.
 */
export function reconcile(
    x: ArrayLike<number>,
    y: ArrayLike<number>,
    noiseVariance: number,
    rate: number,
    options?: ReconcileOptions,
): BlackBoxResult {
    if (!(rate >= 0.01 && rate <= 0.2)) {
        throw new InvalidSpecError(
            `rate ${rate} outside the supported band [0.01, 0.2]`,
            "invalid-spec",
            2,
        );
    }
    const workDir = mkdtempSync(join(tmpdir(), "cvqkd-recon-"));
    try {
        const xPath = join(workDir, "x.f64");
        const yPath = join(workDir, "y.f64");
        const outPrefix = join(workDir, "run");
        writeSamples(xPath, x);
        writeSamples(yPath, y);

        const args = [
            "reconcile",
            "--x", xPath,
            "--y", yPath,
            "--noise-variance", String(noiseVariance),
            "--rate", String(rate),
            "--out", outPrefix,
        ];
        if (options?.k !== undefined) args.push("--k", String(options.k));
        if (options?.dim !== undefined) args.push("--dim", String(options.dim));
        if (options?.seed !== undefined) args.push("--seed", String(options.seed));
        if (options?.matrixSeed !== undefined) args.push("--matrix-seed", String(options.matrixSeed));
        if (options?.maxIterations !== undefined) args.push("--max-iterations", String(options.maxIterations));
        if (options?.schedule !== undefined) args.push("--schedule", options.schedule);
        if (options?.evaluation !== undefined) args.push("--evaluation", options.evaluation);
        runCore(args, options);

        const report = JSON.parse(readFileSync(`${outPrefix}.report.json`, "utf-8"));
        const keyBits = new Uint8Array(readFileSync(`${outPrefix}.key`));
        return {
            framesAttempted: report.frames_attempted,
            framesAccepted: report.frames_accepted,
            keyBits,
            leakageBits: report.leakage_bits,
            iterations: report.iterations,
            frameOk: report.frame_ok,
            rate: report.rate,
            blockLength: report.block_len,
            noiseVariance: report.noise_variance,
            report,
        };
    } finally {
        rmSync(workDir, { recursive: true, force: true });
    }
}
