/** Shared batch runner: manifest in, per-utterance artifacts + metadata out. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { loadManifest, UtteranceRow } from "./manifest.js";
import {
  FRAME,
  LockEntry,
  ModelLock,
  resolveEngine,
  UNIT_COUNTS,
  UnitLayer,
  XVEC_DIM,
} from "./models.js";
import { readWav } from "./wav.js";

export interface RunStats {
  processed: number;
  failed: string[];
}

export interface BatchOptions {
  manifestPath: string;
  outDir: string;
  lock: ModelLock;
  unitLayer: UnitLayer;
}

type PerUtterance = (row: UtteranceRow, outDir: string) => void;

/**
 * Run one extractor over every manifest row.  Unreadable audio is logged
 * and skipped; any skip turns into a nonzero exit for the caller.
 */
export function runBatch(
  options: BatchOptions,
  kind: "xvec" | "ppg" | "phonemes",
  entry: LockEntry,
  perUtterance: PerUtterance,
): RunStats {
  mkdirSync(options.outDir, { recursive: true });
  const rows = loadManifest(options.manifestPath);
  const stats: RunStats = { processed: 0, failed: [] };
  for (const row of rows) {
    try {
      perUtterance(row, options.outDir);
      stats.processed += 1;
    } catch (error) {
      stats.failed.push(row.utteranceId);
      const message = error instanceof Error ? error.message : String(error);
      console.error(`skip ${row.utteranceId}: ${message}`);
    }
  }
  const meta = {
    kind,
    model: entry.name,
    modelUrl: entry.url,
    engine: resolveEngine(entry),
    unitLayer: kind === "xvec" ? null : options.unitLayer,
    xvecDim: kind === "xvec" ? XVEC_DIM : null,
    unitCount: kind === "xvec" ? null : UNIT_COUNTS[options.unitLayer],
    frameLengthSamples: FRAME.frameLength,
    hopLengthSamples: FRAME.hopLength,
    processed: stats.processed,
    failed: stats.failed,
  };
  writeFileSync(
    join(options.outDir, `${kind}_meta.json`),
    JSON.stringify(meta, null, 2) + "\n",
  );
  return stats;
}

export function loadAudioOrThrow(row: UtteranceRow) {
  const audio = readWav(row.wavPath);
  if (audio.samples.length === 0) {
    throw new Error("empty audio");
  }
  return audio;
}
