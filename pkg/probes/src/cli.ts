/**
 * Snapshot harness entry point.
 *
 * Writes per-second snapshot JSONL that the collector consumes through the
 * KPRISM_KERNEL_SNAPSHOTS environment variable:
 *
 *   node dist/cli.js --mode mock --seconds 10 --out snapshots.jsonl
 *
 * `--mode live` is the attachment point for the compiled BPF objects under
 * bpf/; loading them needs CAP_BPF and a BTF-enabled kernel, so the mode
 * reports what is missing instead of guessing.
 */

import { appendFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { MockBackend } from "./mock-backend.js";
import { serializeSnapshot } from "./snapshot.js";

interface Args {
  mode: "mock" | "live";
  seconds: number;
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const args: Args = { mode: "mock", seconds: 10, out: "snapshots.jsonl" };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--mode":
        if (value !== "mock" && value !== "live") {
          throw new Error(`--mode must be mock or live, got ${value}`);
        }
        args.mode = value;
        i += 1;
        break;
      case "--seconds": {
        const n = Number(value);
        if (!Number.isInteger(n) || n < 1) {
          throw new Error(`--seconds must be a positive integer, got ${value}`);
        }
        args.seconds = n;
        i += 1;
        break;
      }
      case "--out":
        if (!value) throw new Error("--out needs a path");
        args.out = value;
        i += 1;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  return args;
}

export function runMock(seconds: number, out: string): void {
  const backend = new MockBackend();
  writeFileSync(out, "");
  for (let s = 0; s < seconds; s += 1) {
    backend.tick();
    appendFileSync(out, serializeSnapshot(backend.read()) + "\n");
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    process.stderr.write(
      "usage: cli.js [--mode mock|live] [--seconds N] [--out FILE]\n",
    );
    return 1;
  }
  if (args.mode === "live") {
    process.stderr.write(
      "live mode needs the compiled BPF objects (see bpf/) loaded with " +
        "CAP_BPF on a BTF-enabled kernel; this harness does not bundle a " +
        "loader, use the mock mode to exercise the snapshot pipeline\n",
    );
    return 2;
  }
  runMock(args.seconds, args.out);
  process.stderr.write(`wrote ${args.seconds} snapshots to ${args.out}\n`);
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
