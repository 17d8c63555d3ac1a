/**
 * Binary layout of the kernel/userspace interface.
 *
 * Must stay byte-compatible with `bpf/common.bpf.h`:
 *   - metric_key: 40-byte hash-map key, one per (thread, metric, resource)
 *   - value: u64 little-endian cumulative accumulator
 *   - discovery_rec: 128-byte ringbuf record (endpoints, pipe sightings)
 *
 * All integers are little-endian (BPF maps are read on the same host).
 */

export const METRIC_KEY_SIZE = 40;
export const DISCOVERY_REC_SIZE = 128;

/** Metric names in wire order; the u16 metric id indexes this table. */
export const METRIC_NAMES = [
  "runtime",
  "rq_time",
  "block_time",
  "iowait_time",
  "sleep_time",
  "pipe_wait_time",
  "pipe_wait_count",
  "socket_wait_time",
  "socket_wait_count",
  "sector_count",
  "epoll_wait_time",
  "epoll_wait_count",
  "epoll_file_wait",
  "futex_wait_time",
  "futex_wait_count",
  "futex_wake_count",
] as const;

export type MetricName = (typeof METRIC_NAMES)[number];

export enum ResKind {
  None = 0,
  Inode = 1, // res_a = dev, res_b = ino
  Epoll = 2, // res_a = eventpoll object address
  Futex = 3, // res_a = tgid, res_b = uaddr
  Device = 4, // res_a = major, res_b = minor
  EpollFile = 5, // res_a = epoll address, res_b = dev, res_c = ino
}

/** Arrow between the epoll address and the awaited file in pair renderings. */
export const EPOLL_PAIR_SEP = "→";

export interface MetricKey {
  tgid: number;
  tid: number;
  metric: number;
  resKind: ResKind;
  resA: bigint;
  resB: bigint;
  resC: bigint;
}

export function encodeMetricKey(key: MetricKey): Buffer {
  const buf = Buffer.alloc(METRIC_KEY_SIZE);
  buf.writeUInt32LE(key.tgid, 0);
  buf.writeUInt32LE(key.tid, 4);
  buf.writeUInt16LE(key.metric, 8);
  buf.writeUInt16LE(key.resKind, 10);
  // bytes 12..16: padding, zero
  buf.writeBigUInt64LE(key.resA, 16);
  buf.writeBigUInt64LE(key.resB, 24);
  buf.writeBigUInt64LE(key.resC, 32);
  return buf;
}

export function decodeMetricKey(buf: Buffer): MetricKey {
  if (buf.length !== METRIC_KEY_SIZE) {
    throw new Error(`metric_key must be ${METRIC_KEY_SIZE} bytes, got ${buf.length}`);
  }
  const metric = buf.readUInt16LE(8);
  if (metric >= METRIC_NAMES.length) {
    throw new Error(`unknown metric id ${metric}`);
  }
  const resKind = buf.readUInt16LE(10);
  if (resKind > ResKind.EpollFile) {
    throw new Error(`unknown res_kind ${resKind}`);
  }
  return {
    tgid: buf.readUInt32LE(0),
    tid: buf.readUInt32LE(4),
    metric,
    resKind,
    resA: buf.readBigUInt64LE(16),
    resB: buf.readBigUInt64LE(24),
    resC: buf.readBigUInt64LE(32),
  };
}

export function metricName(key: MetricKey): MetricName {
  return METRIC_NAMES[key.metric];
}

/**
 * Canonical text rendering of the key's resource, matching the collector's
 * store format:
 *   inode-backed: "{dev}_{ino}"     epoll: hex object address
 *   futex: "{tgid}:0x{uaddr hex}"   device: "{major}:{minor}"
 *   epoll->file pair: "{epoll hex}→{dev}_{ino}"
 * Scheduler metrics carry no resource (null).
 */
export function renderRes(key: MetricKey): string | null {
  switch (key.resKind) {
    case ResKind.None:
      return null;
    case ResKind.Inode:
      return `${key.resA}_${key.resB}`;
    case ResKind.Epoll:
      return key.resA.toString(16);
    case ResKind.Futex:
      return `${key.resA}:0x${key.resB.toString(16)}`;
    case ResKind.Device:
      return `${key.resA}:${key.resB}`;
    case ResKind.EpollFile:
      return `${key.resA.toString(16)}${EPOLL_PAIR_SEP}${key.resB}_${key.resC}`;
  }
}

// ---- discovery records ------------------------------------------------------

export enum DiscoveryKind {
  Endpoint = 1,
  PipeBri = 2,
}

export const FAMILY_NAMES: Record<number, string> = {
  1: "unix",
  2: "inet",
  10: "inet6",
};

export interface DiscoveryRec {
  kind: DiscoveryKind;
  family: number;
  proto: number;
  tgid: number;
  tid: number;
  dev: number;
  ino: bigint;
  src: Buffer; // 16 bytes, v4 addresses in the first 4
  dst: Buffer;
  sport: number;
  dport: number;
  path: string;
}

export function encodeDiscoveryRec(rec: DiscoveryRec): Buffer {
  if (rec.src.length !== 16 || rec.dst.length !== 16) {
    throw new Error("src/dst must be 16-byte address buffers");
  }
  const buf = Buffer.alloc(DISCOVERY_REC_SIZE);
  buf.writeUInt8(rec.kind, 0);
  buf.writeUInt8(rec.family, 1);
  buf.writeUInt8(rec.proto, 2);
  buf.writeUInt32LE(rec.tgid, 4);
  buf.writeUInt32LE(rec.tid, 8);
  buf.writeUInt32LE(rec.dev, 12);
  buf.writeBigUInt64LE(rec.ino, 16);
  rec.src.copy(buf, 24);
  rec.dst.copy(buf, 40);
  buf.writeUInt16LE(rec.sport, 56);
  buf.writeUInt16LE(rec.dport, 58);
  const path = Buffer.from(rec.path, "utf-8");
  if (path.length > 63) {
    throw new Error("unix path longer than 63 bytes");
  }
  path.copy(buf, 60);
  return buf;
}

export function decodeDiscoveryRec(buf: Buffer): DiscoveryRec {
  if (buf.length !== DISCOVERY_REC_SIZE) {
    throw new Error(
      `discovery_rec must be ${DISCOVERY_REC_SIZE} bytes, got ${buf.length}`,
    );
  }
  const pathRaw = buf.subarray(60, 124);
  const nul = pathRaw.indexOf(0);
  return {
    kind: buf.readUInt8(0),
    family: buf.readUInt8(1),
    proto: buf.readUInt8(2),
    tgid: buf.readUInt32LE(4),
    tid: buf.readUInt32LE(8),
    dev: buf.readUInt32LE(12),
    ino: buf.readBigUInt64LE(16),
    src: Buffer.from(buf.subarray(24, 40)),
    dst: Buffer.from(buf.subarray(40, 56)),
    sport: buf.readUInt16LE(56),
    dport: buf.readUInt16LE(58),
    path: pathRaw.subarray(0, nul < 0 ? pathRaw.length : nul).toString("utf-8"),
  };
}

/** Render a 16-byte address buffer as text for the given family. */
export function renderAddr(addr: Buffer, family: number): string {
  if (family === 2) {
    return Array.from(addr.subarray(0, 4)).join(".");
  }
  if (family === 10) {
    const parts: string[] = [];
    for (let i = 0; i < 16; i += 2) {
      parts.push(addr.readUInt16BE(i).toString(16));
    }
    return parts.join(":");
  }
  return "";
}
