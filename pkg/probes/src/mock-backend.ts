/**
 * Deterministic stand-in for the kernel probe maps.
 *
 * Maintains the same state the BPF programs would: cumulative u64
 * accumulators keyed by the 40-byte metric_key, and a queue of fixed-width
 * discovery records.  Each tick() advances one simulated second of a small
 * scripted workload; read() drains the state exactly like the real loader
 * (decode keys, sum values, render resources, drain the ringbuf).
 *
 * The script models two processes talking over a pipe while the first also
 * contends on a futex and issues block IO, so every metric family and every
 * resource rendering is exercised.
 */

import {
  DiscoveryKind,
  DiscoveryRec,
  METRIC_NAMES,
  MetricKey,
  ResKind,
  decodeDiscoveryRec,
  decodeMetricKey,
  encodeDiscoveryRec,
  encodeMetricKey,
} from "./layout.js";
import { DiscoveryObs, Snapshot, obsFromDiscovery, recordFromEntry } from "./snapshot.js";

interface ThreadScript {
  tgid: number;
  tid: number;
  comm: string;
  /** share of each second per metric; time shares sum to <= 1 */
  add: Array<{ metric: number; share: number; resKind: ResKind; resA: bigint; resB: bigint; resC: bigint }>;
}

const PIPE_DEV = 0n;
const PIPE_INO = 98765n;
const FUTEX_UADDR = 0x7f00deadb000n;

function part(
  metric: (typeof METRIC_NAMES)[number],
  share: number,
  resKind: ResKind = ResKind.None,
  resA = 0n,
  resB = 0n,
  resC = 0n,
) {
  const id = METRIC_NAMES.indexOf(metric);
  if (id < 0) throw new Error(`unknown metric ${metric}`);
  return { metric: id, share, resKind, resA, resB, resC };
}

const SCRIPT: ThreadScript[] = [
  {
    tgid: 1000,
    tid: 1001,
    comm: "producer",
    add: [
      part("runtime", 0.55),
      part("rq_time", 0.05),
      part("sleep_time", 0.25),
      part("block_time", 0.15),
      part("iowait_time", 0.15),
      part("pipe_wait_time", 0.1, ResKind.Inode, PIPE_DEV, PIPE_INO),
      part("pipe_wait_count", 40, ResKind.Inode, PIPE_DEV, PIPE_INO),
      part("futex_wait_time", 0.2, ResKind.Futex, 1000n, FUTEX_UADDR),
      part("futex_wait_count", 12, ResKind.Futex, 1000n, FUTEX_UADDR),
      part("sector_count", 2048, ResKind.Device, 259n, 0n),
    ],
  },
  {
    tgid: 1000,
    tid: 1002,
    comm: "worker",
    add: [
      part("runtime", 0.8),
      part("rq_time", 0.1),
      part("sleep_time", 0.1),
      part("futex_wake_count", 12, ResKind.Futex, 1000n, FUTEX_UADDR),
    ],
  },
  {
    tgid: 2000,
    tid: 2001,
    comm: "consumer",
    add: [
      part("runtime", 0.3),
      part("sleep_time", 0.3),
      part("pipe_wait_time", 0.4, ResKind.Inode, PIPE_DEV, PIPE_INO),
      part("pipe_wait_count", 40, ResKind.Inode, PIPE_DEV, PIPE_INO),
      part("epoll_wait_time", 0.35, ResKind.Epoll, 0xffff9a7a3f5e1740n, 0n),
      part("epoll_wait_count", 40, ResKind.Epoll, 0xffff9a7a3f5e1740n, 0n),
      part("epoll_file_wait", 0.35, ResKind.EpollFile, 0xffff9a7a3f5e1740n, PIPE_DEV, PIPE_INO),
    ],
  },
];

export class MockBackend {
  private accumulators = new Map<string, bigint>(); // hex(metric_key) -> value
  private comms = new Map<string, string>(); // "tgid/tid" -> comm
  private ringbuf: Buffer[] = [];
  private seconds = 0;

  /** Advance one simulated second: bump accumulators like the probes would. */
  tick(): void {
    for (const thread of SCRIPT) {
      this.comms.set(`${thread.tgid}/${thread.tid}`, thread.comm);
      for (const p of thread.add) {
        const key: MetricKey = {
          tgid: thread.tgid,
          tid: thread.tid,
          metric: p.metric,
          resKind: p.resKind,
          resA: p.resA,
          resB: p.resB,
          resC: p.resC,
        };
        const isTime =
          METRIC_NAMES[p.metric].endsWith("_time") ||
          METRIC_NAMES[p.metric] === "runtime" ||
          METRIC_NAMES[p.metric] === "epoll_file_wait";
        const delta = isTime ? BigInt(Math.round(p.share * 1e9)) : BigInt(p.share);
        this.bump(encodeMetricKey(key), delta);
      }
    }
    if (this.seconds === 0) {
      this.emitDiscovery();
    }
    this.seconds += 1;
  }

  private bump(keyBuf: Buffer, delta: bigint): void {
    const hex = keyBuf.toString("hex");
    this.accumulators.set(hex, (this.accumulators.get(hex) ?? 0n) + delta);
  }

  private emitDiscovery(): void {
    const zeros = Buffer.alloc(16);
    const pipeSighting = (tgid: number, tid: number): DiscoveryRec => ({
      kind: DiscoveryKind.PipeBri,
      family: 0,
      proto: 0,
      tgid,
      tid,
      dev: Number(PIPE_DEV),
      ino: PIPE_INO,
      src: zeros,
      dst: zeros,
      sport: 0,
      dport: 0,
      path: "",
    });
    this.ringbuf.push(encodeDiscoveryRec(pipeSighting(1000, 1001)));
    this.ringbuf.push(encodeDiscoveryRec(pipeSighting(2000, 2001)));

    const v4 = (a: number, b: number, c: number, d: number) =>
      Buffer.concat([Buffer.from([a, b, c, d])], 16);
    this.ringbuf.push(
      encodeDiscoveryRec({
        kind: DiscoveryKind.Endpoint,
        family: 2,
        proto: 6,
        tgid: 2000,
        tid: 2001,
        dev: 0,
        ino: 55555n,
        src: v4(127, 0, 0, 1),
        dst: v4(127, 0, 0, 1),
        sport: 45000,
        dport: 8080,
        path: "",
      }),
    );
  }

  /** Drain state into one snapshot, mirroring the real loader's read path. */
  read(): Snapshot {
    const records = [];
    for (const [hex, value] of this.accumulators) {
      const key = decodeMetricKey(Buffer.from(hex, "hex"));
      const comm = this.comms.get(`${key.tgid}/${key.tid}`) ?? "";
      records.push(recordFromEntry(key, value, comm));
    }
    records.sort((a, b) =>
      a.tgid - b.tgid ||
      a.tid - b.tid ||
      a.metric.localeCompare(b.metric) ||
      (a.res ?? "").localeCompare(b.res ?? ""),
    );
    const discovery: DiscoveryObs[] = this.ringbuf.map((buf) =>
      obsFromDiscovery(decodeDiscoveryRec(buf)),
    );
    this.ringbuf = [];
    return { records, discovery, lossy: false, drops: 0 };
  }
}
