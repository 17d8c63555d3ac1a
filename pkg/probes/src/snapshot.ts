/**
 * Snapshot JSONL wire format.
 *
 * One line per collection second.  The collector (`kprism record` with
 * KPRISM_KERNEL_SNAPSHOTS set) consumes exactly this shape:
 *
 *   {"records": [{"tgid", "tid", "comm", "metric", "res", "val"}, ...],
 *    "discovery": [{"kind": "endpoint"|"pipe_bri", ...}, ...],
 *    "lossy": false, "drops": 0}
 *
 * Record values are cumulative accumulators (they only grow); the collector
 * differences consecutive snapshots itself.
 */

import {
  DiscoveryKind,
  DiscoveryRec,
  FAMILY_NAMES,
  MetricKey,
  metricName,
  renderAddr,
  renderRes,
} from "./layout.js";

export interface SnapshotRecord {
  tgid: number;
  tid: number;
  comm: string;
  metric: string;
  res: string | null;
  val: number;
}

export interface DiscoveryObs {
  kind: "endpoint" | "pipe_bri";
  tgid: number;
  tid: number;
  res: string;
  family?: string;
  src?: string;
  dst?: string;
  path?: string;
  proto?: number;
}

export interface Snapshot {
  records: SnapshotRecord[];
  discovery: DiscoveryObs[];
  lossy: boolean;
  drops: number;
}

/** Convert a decoded map entry into a snapshot record. */
export function recordFromEntry(
  key: MetricKey,
  value: bigint,
  comm: string,
): SnapshotRecord {
  if (value > BigInt(Number.MAX_SAFE_INTEGER)) {
    // Cumulative ns counters stay far below 2^53 for any realistic session
    // length; saturated accumulators are clamped rather than mis-rounded.
    value = BigInt(Number.MAX_SAFE_INTEGER);
  }
  return {
    tgid: key.tgid,
    tid: key.tid,
    comm,
    metric: metricName(key),
    res: renderRes(key),
    val: Number(value),
  };
}

/** Convert a decoded ringbuf record into a discovery observation. */
export function obsFromDiscovery(rec: DiscoveryRec): DiscoveryObs {
  const res = `${rec.dev}_${rec.ino}`;
  if (rec.kind === DiscoveryKind.PipeBri) {
    return { kind: "pipe_bri", tgid: rec.tgid, tid: rec.tid, res };
  }
  const family = FAMILY_NAMES[rec.family] ?? `family_${rec.family}`;
  const obs: DiscoveryObs = {
    kind: "endpoint",
    tgid: rec.tgid,
    tid: rec.tid,
    res,
    family,
    proto: rec.proto,
  };
  if (family === "unix") {
    obs.path = rec.path;
  } else {
    obs.src = `${renderAddr(rec.src, rec.family)}:${rec.sport}`;
    obs.dst = `${renderAddr(rec.dst, rec.family)}:${rec.dport}`;
  }
  return obs;
}

/** Serialize one snapshot as a JSONL line (no trailing newline). */
export function serializeSnapshot(snap: Snapshot): string {
  return JSON.stringify({
    records: snap.records,
    discovery: snap.discovery,
    lossy: snap.lossy,
    drops: snap.drops,
  });
}

export function parseSnapshot(line: string): Snapshot {
  const obj = JSON.parse(line);
  return {
    records: obj.records ?? [],
    discovery: obj.discovery ?? [],
    lossy: Boolean(obj.lossy),
    drops: Number(obj.drops ?? 0),
  };
}
