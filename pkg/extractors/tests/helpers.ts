import { execFileSync } from "node:child_process";
import { mkdirSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { writeWavPcm16 } from "../src/wav.js";

export const DIST = join(dirname(fileURLToPath(import.meta.url)), "..", "dist");

export interface SampleSpec {
  utteranceId: string;
  speakerId: string;
  kind: "tone" | "harmonic" | "noisy" | "silence";
}

export function makeSample(kind: SampleSpec["kind"], seconds = 0.7): Float64Array {
  const sr = 16000;
  const n = Math.round(seconds * sr);
  const out = new Float64Array(n);
  let state = 123456789;
  const rand = () => {
    // xorshift, deterministic test noise
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    return ((state >>> 0) / 4294967296) * 2 - 1;
  };
  for (let i = 0; i < n; i++) {
    const t = i / sr;
    if (kind === "tone") {
      out[i] = 0.6 * Math.sin(2 * Math.PI * 160 * t);
    } else if (kind === "harmonic") {
      out[i] =
        0.35 * Math.sin(2 * Math.PI * 120 * t) +
        0.2 * Math.sin(2 * Math.PI * 240 * t + 0.5) +
        0.12 * Math.sin(2 * Math.PI * 360 * t + 1.1);
    } else if (kind === "noisy") {
      out[i] = 0.3 * Math.sin(2 * Math.PI * 180 * t) + 0.2 * rand();
    } else {
      out[i] = 0;
    }
  }
  return out;
}

/** Write sample WAVs plus a manifest; returns the corpus directory. */
export function makeCorpus(specs: SampleSpec[]): string {
  const dir = mkdtempSync(join(tmpdir(), "extract-corpus-"));
  mkdirSync(join(dir, "wav"));
  const lines = [
    "utterance_id,speaker_id,timepoint_id,wav_path,transcript,phoneme_ref,rating",
  ];
  for (const spec of specs) {
    const wavRel = join("wav", `${spec.utteranceId}.wav`);
    writeWavPcm16(join(dir, wavRel), {
      samples: makeSample(spec.kind),
      sampleRateHz: 16000,
    });
    lines.push(
      `${spec.utteranceId},${spec.speakerId},t0,${wavRel},,,3.0`,
    );
  }
  writeFileSync(join(dir, "manifest.csv"), lines.join("\n") + "\n");
  return dir;
}

export function runCli(
  script: string,
  args: string[],
): { status: number; stderr: string } {
  try {
    execFileSync("node", [join(DIST, script), ...args], { stdio: "pipe" });
    return { status: 0, stderr: "" };
  } catch (error: any) {
    return {
      status: error.status ?? 1,
      stderr: error.stderr ? error.stderr.toString() : "",
    };
  }
}
