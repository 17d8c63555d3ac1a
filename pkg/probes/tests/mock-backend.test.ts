import { describe, expect, it } from "vitest";

import { MockBackend } from "../src/mock-backend.js";
import { METRIC_NAMES } from "../src/layout.js";

function recordKey(r: { tgid: number; tid: number; metric: string; res: string | null }) {
  return `${r.tgid}/${r.tid}/${r.metric}/${r.res ?? ""}`;
}

describe("mock backend", () => {
  it("produces cumulative accumulators that only grow", () => {
    const backend = new MockBackend();
    let prev = new Map<string, number>();
    for (let s = 0; s < 5; s += 1) {
      backend.tick();
      const snap = backend.read();
      const cur = new Map(snap.records.map((r) => [recordKey(r), r.val]));
      for (const [k, v] of prev) {
        expect(cur.has(k)).toBe(true);
        expect(cur.get(k)!).toBeGreaterThan(v);
      }
      prev = cur;
      expect(snap.lossy).toBe(false);
      expect(snap.drops).toBe(0);
    }
  });

  it("covers every metric family across the scripted threads", () => {
    const backend = new MockBackend();
    backend.tick();
    const seen = new Set(backend.read().records.map((r) => r.metric));
    const uncovered = METRIC_NAMES.filter(
      (m) => !seen.has(m) && m !== "socket_wait_time" && m !== "socket_wait_count",
    );
    expect(uncovered).toEqual([]);
  });

  it("keeps per-thread time shares within one second per tick", () => {
    const backend = new MockBackend();
    backend.tick();
    const snap = backend.read();
    const schedByThread = new Map<string, number>();
    for (const r of snap.records) {
      if (["runtime", "rq_time", "sleep_time", "block_time"].includes(r.metric)) {
        const k = `${r.tgid}/${r.tid}`;
        schedByThread.set(k, (schedByThread.get(k) ?? 0) + r.val);
      }
    }
    for (const total of schedByThread.values()) {
      expect(total).toBeLessThanOrEqual(1e9);
    }
  });

  it("emits pipe sightings for both ends and one endpoint, once", () => {
    const backend = new MockBackend();
    backend.tick();
    const first = backend.read();
    const pipes = first.discovery.filter((d) => d.kind === "pipe_bri");
    expect(pipes.map((p) => p.tgid).sort()).toEqual([1000, 2000]);
    expect(new Set(pipes.map((p) => p.res)).size).toBe(1);
    const endpoints = first.discovery.filter((d) => d.kind === "endpoint");
    expect(endpoints).toHaveLength(1);
    expect(endpoints[0].src).toMatch(/^127\.0\.0\.1:\d+$/);

    backend.tick();
    expect(backend.read().discovery).toEqual([]); // ringbuf drained
  });

  it("sorts records deterministically", () => {
    const a = new MockBackend();
    const b = new MockBackend();
    a.tick();
    b.tick();
    expect(a.read()).toEqual(b.read());
  });
});
