/**
 * Cross-component contract: extractor outputs must drive the scoring
 * toolkit end to end through its public CLI (extract -> fuse -> fit ->
 * score) and produce finite scores.
 */

import { execFileSync } from "node:child_process";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { makeCorpus, runCli } from "./helpers.js";

function xppgAvailable(): boolean {
  try {
    execFileSync("xppg", ["--help"], { stdio: "pipe" });
    return true;
  } catch {
    return false;
  }
}

describe("full pipeline against the scoring toolkit", () => {
  it.skipIf(!xppgAvailable())("extract -> fuse -> fit -> score yields finite scores", () => {
    const corpus = makeCorpus([
      { utteranceId: "p1", speakerId: "s0", kind: "tone" },
      { utteranceId: "p2", speakerId: "s1", kind: "harmonic" },
      { utteranceId: "p3", speakerId: "s2", kind: "noisy" },
    ]);
    const features = join(corpus, "features");
    expect(runCli("cli-xvec.js", [
      "--manifest", join(corpus, "manifest.csv"), "--out", features,
    ]).status).toBe(0);
    expect(runCli("cli-ppg.js", [
      "--manifest", join(corpus, "manifest.csv"), "--out", features,
    ]).status).toBe(0);

    const fused = join(corpus, "fused");
    execFileSync("xppg", [
      "fuse", "--manifest", join(corpus, "manifest.csv"),
      "--features", features, "--out", fused,
    ], { stdio: "pipe" });
    const model = join(corpus, "model.xpgpca");
    execFileSync("xppg", ["fit", "--fused", fused, "--out", model], { stdio: "pipe" });
    const scores = join(corpus, "scores.csv");
    execFileSync("xppg", [
      "score", "--model", model, "--fused", fused, "--out", scores,
    ], { stdio: "pipe" });

    const lines = readFileSync(scores, "utf-8").split("\n").filter((l) => l);
    expect(lines[0]).toBe("utterance_id,xppg-pca");
    expect(lines.length).toBe(4);
    for (const line of lines.slice(1)) {
      const value = Number(line.split(",")[1]);
      expect(Number.isFinite(value)).toBe(true);
    }

    const meta = readFileSync(join(fused, "fused.meta"), "utf-8");
    expect(meta).toContain("xvec_dim = 192");
    expect(meta).toContain("ppg_streams = 40");
  });
});
