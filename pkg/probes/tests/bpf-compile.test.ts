import { execFileSync, execSync } from "node:child_process";
import { mkdtempSync, readdirSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it } from "vitest";

const bpfDir = join(dirname(fileURLToPath(import.meta.url)), "..", "bpf");

function clangAvailable(): boolean {
  try {
    execSync("clang --version", { stdio: "ignore" });
    return true;
  } catch {
    return false;
  }
}

const haveClang = clangAvailable();
const sources = readdirSync(bpfDir).filter((f) => f.endsWith(".bpf.c"));
const outDir = mkdtempSync(join(tmpdir(), "bpfcc-"));

afterAll(() => rmSync(outDir, { recursive: true, force: true }));

describe("bpf program sources", () => {
  it("ship one program per probe family", () => {
    expect(sources.sort()).toEqual([
      "block.bpf.c",
      "epoll.bpf.c",
      "futex.bpf.c",
      "pollfam.bpf.c",
      "sched.bpf.c",
      "vfs_io.bpf.c",
    ]);
  });

  it.skipIf(!haveClang).each(sources)("%s compiles for the bpf target", (src) => {
    const out = join(outDir, src.replace(/\.c$/, ".o"));
    execFileSync("clang", [
      "-target",
      "bpf",
      "-O2",
      "-Wall",
      "-Werror",
      "-c",
      join(bpfDir, src),
      "-o",
      out,
    ]);
    const sections = execFileSync("readelf", ["-S", out], {
      encoding: "utf-8",
    }).toString();
    expect(sections).toContain("maps");
    expect(sections).toContain("license");
  });
});
