import { readFileSync, writeFileSync } from "node:fs";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import { readXpgf } from "../src/xpgf.js";
import { makeCorpus, runCli } from "./helpers.js";

const SPECS = [
  { utteranceId: "u_tone", speakerId: "s0", kind: "tone" as const },
  { utteranceId: "u_harm", speakerId: "s1", kind: "harmonic" as const },
  { utteranceId: "u_noise", speakerId: "s2", kind: "noisy" as const },
];

let corpus: string;
let xvecDir: string;
let ppgDir: string;

beforeAll(() => {
  corpus = makeCorpus(SPECS);
  xvecDir = join(corpus, "features");
  ppgDir = xvecDir;
  let result = runCli("cli-xvec.js", [
    "--manifest", join(corpus, "manifest.csv"), "--out", xvecDir,
  ]);
  expect(result.status).toBe(0);
  result = runCli("cli-ppg.js", [
    "--manifest", join(corpus, "manifest.csv"), "--out", ppgDir,
  ]);
  expect(result.status).toBe(0);
});

describe("extract-xvec", () => {
  it("emits a 1x192 XPGF per utterance with a constant dimension", () => {
    for (const spec of SPECS) {
      const m = readXpgf(join(xvecDir, `${spec.utteranceId}.xvec.xpgf`));
      expect(m.rows).toBe(1);
      expect(m.cols).toBe(192);
    }
  });

  it("is deterministic: identical audio gives identical bytes", () => {
    const twin = makeCorpus([
      { utteranceId: "a", speakerId: "s0", kind: "tone" },
      { utteranceId: "b", speakerId: "s1", kind: "tone" },
    ]);
    const out = join(twin, "features");
    expect(runCli("cli-xvec.js", [
      "--manifest", join(twin, "manifest.csv"), "--out", out,
    ]).status).toBe(0);
    const a = readFileSync(join(out, "a.xvec.xpgf"));
    const b = readFileSync(join(out, "b.xvec.xpgf"));
    expect(a.subarray(16).equals(b.subarray(16))).toBe(true);
  });

  it("writes a metadata sidecar naming the model and engine", () => {
    const meta = JSON.parse(readFileSync(join(xvecDir, "xvec_meta.json"), "utf-8"));
    expect(meta.model).toContain("ecapa");
    expect(meta.engine).toBe("builtin");
    expect(meta.xvecDim).toBe(192);
    expect(meta.processed).toBe(3);
    expect(meta.failed).toEqual([]);
  });

  it("skips corrupt audio with a logged error and nonzero exit", () => {
    const broken = makeCorpus([
      { utteranceId: "good", speakerId: "s0", kind: "tone" },
      { utteranceId: "bad", speakerId: "s1", kind: "tone" },
    ]);
    writeFileSync(join(broken, "wav", "bad.wav"), "not audio at all");
    const out = join(broken, "features");
    const result = runCli("cli-xvec.js", [
      "--manifest", join(broken, "manifest.csv"), "--out", out,
    ]);
    expect(result.status).toBe(1);
    expect(result.stderr).toContain("bad");
    expect(readXpgf(join(out, "good.xvec.xpgf")).cols).toBe(192);
    const meta = JSON.parse(readFileSync(join(out, "xvec_meta.json"), "utf-8"));
    expect(meta.failed).toEqual(["bad"]);
  });
});

describe("extract-ppg", () => {
  it("emits probability rows that sum to one", () => {
    for (const spec of SPECS) {
      const m = readXpgf(join(ppgDir, `${spec.utteranceId}.ppg.xpgf`));
      expect(m.cols).toBe(40);
      expect(m.rows).toBeGreaterThan(10);
      for (let t = 0; t < m.rows; t++) {
        let sum = 0;
        for (let u = 0; u < m.cols; u++) {
          const v = m.values[t * m.cols + u];
          expect(v).toBeGreaterThanOrEqual(0);
          expect(v).toBeLessThanOrEqual(1);
          sum += v;
        }
        expect(Math.abs(sum - 1)).toBeLessThan(1e-3);
      }
    }
  });

  it("frame count follows the documented 10 ms hop", () => {
    const m = readXpgf(join(ppgDir, "u_tone.ppg.xpgf"));
    const n = Math.round(0.7 * 16000);
    expect(m.rows).toBe(Math.floor((n - 400) / 160) + 1);
  });

  it("subword layer widens the unit axis and records it", () => {
    const alt = makeCorpus([{ utteranceId: "u", speakerId: "s0", kind: "harmonic" }]);
    const out = join(alt, "features");
    expect(runCli("cli-ppg.js", [
      "--manifest", join(alt, "manifest.csv"), "--out", out,
      "--unit-layer", "subword",
    ]).status).toBe(0);
    expect(readXpgf(join(out, "u.ppg.xpgf")).cols).toBe(128);
    const meta = JSON.parse(readFileSync(join(out, "ppg_meta.json"), "utf-8"));
    expect(meta.unitLayer).toBe("subword");
    expect(meta.unitCount).toBe(128);
  });
});

describe("recognize-phonemes", () => {
  it("writes one manifest-ordered line per utterance; silence is empty", () => {
    const mixed = makeCorpus([
      { utteranceId: "v1", speakerId: "s0", kind: "harmonic" },
      { utteranceId: "quiet", speakerId: "s1", kind: "silence" },
      { utteranceId: "v2", speakerId: "s2", kind: "tone" },
    ]);
    const out = join(mixed, "hyp");
    expect(runCli("cli-phonemes.js", [
      "--manifest", join(mixed, "manifest.csv"), "--out", out,
    ]).status).toBe(0);
    const lines = readFileSync(join(out, "hypotheses.tsv"), "utf-8")
      .split("\n")
      .filter((l) => l.length > 0);
    expect(lines.map((l) => l.split("\t")[0])).toEqual(["v1", "quiet", "v2"]);
    expect(lines[1]).toBe("quiet\t");
    expect(lines[0].split("\t")[1].length).toBeGreaterThan(0);
  });

  it("greedy decoding is reproducible", () => {
    const c = makeCorpus([{ utteranceId: "r", speakerId: "s0", kind: "noisy" }]);
    const outA = join(c, "h1");
    const outB = join(c, "h2");
    for (const out of [outA, outB]) {
      expect(runCli("cli-phonemes.js", [
        "--manifest", join(c, "manifest.csv"), "--out", out,
      ]).status).toBe(0);
    }
    expect(readFileSync(join(outA, "hypotheses.tsv"), "utf-8")).toBe(
      readFileSync(join(outB, "hypotheses.tsv"), "utf-8"),
    );
  });
});

describe("lockfile", () => {
  it("refuses to pretend it can run checkpoint weights", () => {
    const c = makeCorpus([{ utteranceId: "u", speakerId: "s0", kind: "tone" }]);
    const lockPath = join(c, "lock.json");
    writeFileSync(
      lockPath,
      JSON.stringify({
        speakerEmbedding: {
          name: "some/model",
          url: "https://example.org/m",
          localPath: join(c, "manifest.csv"), // exists -> checkpoint engine
          fallback: "builtin",
        },
        phoneticPosterior: {
          name: "other/model",
          url: "",
          localPath: "",
          fallback: "builtin",
        },
      }),
    );
    const result = runCli("cli-xvec.js", [
      "--manifest", join(c, "manifest.csv"),
      "--out", join(c, "f"),
      "--lock", lockPath,
    ]);
    expect(result.status).toBe(1);
    expect(result.stderr).toContain("neural runtime");
  });
});
