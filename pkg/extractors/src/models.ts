/**
 * Model resolution and the built-in deterministic engines.
 *
 * The lockfile (models.lock.json) names the pretrained checkpoints the
 * extractors are meant to run — a speaker-embedding model and an ASR
 * encoder for phonetic posteriors — with their published identifiers.
 * When a checkpoint's weights are not available on disk, each entry falls
 * back to a fully deterministic DSP engine with the same output contract
 * (same dimensions, same file formats), so downstream pipelines can be
 * built and tested hermetically.  The engine actually used is recorded in
 * the run's metadata sidecar.
 */

import { existsSync, readFileSync } from "node:fs";

import { FrameSpec, logMelFrames } from "./dsp.js";
import { RawAudio } from "./wav.js";

export interface LockEntry {
  /** published model identifier (e.g. a hub repo name) */
  name: string;
  /** where the checkpoint would be fetched from */
  url: string;
  /** local path probed for downloaded weights */
  localPath: string;
  /** engine used when localPath is absent */
  fallback: "builtin";
}

export interface ModelLock {
  speakerEmbedding: LockEntry;
  phoneticPosterior: LockEntry;
}

export function loadModelLock(path: string): ModelLock {
  const lock = JSON.parse(readFileSync(path, "utf-8")) as ModelLock;
  for (const key of ["speakerEmbedding", "phoneticPosterior"] as const) {
    const entry = lock[key];
    if (!entry || !entry.name || !entry.fallback) {
      throw new Error(`${path}: missing or incomplete ${key} entry`);
    }
  }
  return lock;
}

export function resolveEngine(entry: LockEntry): "checkpoint" | "builtin" {
  return entry.localPath && existsSync(entry.localPath) ? "checkpoint" : "builtin";
}

/** splitmix32: tiny, seedable, identical on every platform. */
export function seededRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z = z ^ (z >>> 15);
    return (z >>> 0) / 4294967296;
  };
}

/** Fixed random projection matrix (rows x cols), standard-normal-ish. */
function projectionMatrix(rows: number, cols: number, seed: number): Float64Array[] {
  const rng = seededRng(seed);
  const out: Float64Array[] = [];
  for (let r = 0; r < rows; r++) {
    const row = new Float64Array(cols);
    for (let c = 0; c < cols; c++) {
      // Box-Muller from two uniforms
      const u1 = Math.max(rng(), 1e-12);
      const u2 = rng();
      row[c] = Math.sqrt(-2 * Math.log(u1)) * Math.cos(2 * Math.PI * u2);
    }
    out.push(row);
  }
  return out;
}

export const XVEC_DIM = 192;
export const MEL_BANDS = 24;
export const FRAME: FrameSpec = { frameLength: 400, hopLength: 160 }; // 25 ms / 10 ms at 16 kHz
export const UNIT_COUNTS = { phoneme: 40, subword: 128 } as const;
export type UnitLayer = keyof typeof UNIT_COUNTS;

/**
 * Built-in speaker embedder: statistics pooling (mean and standard
 * deviation of log mel bands over time) through a fixed projection to the
 * published embedding width, L2-normalized.
 */
export function builtinSpeakerEmbedding(audio: RawAudio): Float32Array {
  const { logMel } = logMelFrames(audio.samples, audio.sampleRateHz, MEL_BANDS, FRAME);
  const nFrames = logMel.length;
  const mean = new Float64Array(MEL_BANDS);
  const sq = new Float64Array(MEL_BANDS);
  for (const frame of logMel) {
    for (let b = 0; b < MEL_BANDS; b++) {
      mean[b] += frame[b];
      sq[b] += frame[b] * frame[b];
    }
  }
  const stats = new Float64Array(2 * MEL_BANDS);
  for (let b = 0; b < MEL_BANDS; b++) {
    mean[b] /= nFrames;
    stats[b] = mean[b];
    stats[MEL_BANDS + b] = Math.sqrt(Math.max(sq[b] / nFrames - mean[b] * mean[b], 0));
  }
  const projection = projectionMatrix(XVEC_DIM, 2 * MEL_BANDS, 0x5eed0001);
  const embedding = new Float32Array(XVEC_DIM);
  let norm = 0;
  for (let r = 0; r < XVEC_DIM; r++) {
    let acc = 0;
    const row = projection[r];
    for (let c = 0; c < stats.length; c++) {
      acc += row[c] * stats[c];
    }
    embedding[r] = acc;
    norm += acc * acc;
  }
  norm = Math.sqrt(norm) || 1;
  for (let r = 0; r < XVEC_DIM; r++) {
    embedding[r] /= norm;
  }
  return embedding;
}

/**
 * Built-in phonetic posteriors: each frame's log mel vector goes through a
 * fixed projection to the unit space, then a softmax, giving one
 * probability row per frame.  Rows lie in [0, 1] and sum to 1.
 */
export function builtinPhoneticPosteriors(audio: RawAudio, layer: UnitLayer): {
  rows: number;
  cols: number;
  values: Float32Array;
  /** per-frame RMS, for silence gating in the recognizer */
  rms: Float64Array;
} {
  const units = UNIT_COUNTS[layer];
  const { logMel, rms } = logMelFrames(audio.samples, audio.sampleRateHz, MEL_BANDS, FRAME);
  const projection = projectionMatrix(units, MEL_BANDS, layer === "phoneme" ? 0x5eed0002 : 0x5eed0003);
  const values = new Float32Array(logMel.length * units);
  const logits = new Float64Array(units);
  for (let t = 0; t < logMel.length; t++) {
    const frame = logMel[t];
    let maxLogit = -Infinity;
    for (let u = 0; u < units; u++) {
      let acc = 0;
      const row = projection[u];
      for (let b = 0; b < MEL_BANDS; b++) {
        acc += row[b] * frame[b];
      }
      acc *= 0.25; // temper the logits so posteriors are not one-hot
      logits[u] = acc;
      if (acc > maxLogit) {
        maxLogit = acc;
      }
    }
    let z = 0;
    for (let u = 0; u < units; u++) {
      logits[u] = Math.exp(logits[u] - maxLogit);
      z += logits[u];
    }
    for (let u = 0; u < units; u++) {
      values[t * units + u] = logits[u] / z;
    }
  }
  return { rows: logMel.length, cols: units, values, rms };
}

/** Phoneme labels for the 40-unit layer (greedy decoding output symbols). */
export const PHONEME_INVENTORY: readonly string[] = [
  "p", "b", "t", "d", "k", "g", "f", "v", "s", "z",
  "x", "h", "m", "n", "ng", "l", "r", "w", "j", "sj",
  "a", "aa", "e", "ee", "i", "ie", "o", "oo", "u", "uu",
  "y", "eu", "oe", "ei", "ui", "au", "@", "er", "al", "ol",
];

/**
 * Greedy frame-wise decoding over the phoneme-layer posteriors: argmax per
 * frame, collapse repeats, drop silent frames (RMS gate).  Deterministic.
 */
export function builtinRecognizePhonemes(audio: RawAudio): string[] {
  const { rows, cols, values, rms } = builtinPhoneticPosteriors(audio, "phoneme");
  const symbols: string[] = [];
  let previous = -1;
  for (let t = 0; t < rows; t++) {
    if (rms[t] < 1e-3) {
      previous = -1;
      continue;
    }
    let best = 0;
    let bestValue = -1;
    for (let u = 0; u < cols; u++) {
      const v = values[t * cols + u];
      if (v > bestValue) {
        bestValue = v;
        best = u;
      }
    }
    if (best !== previous) {
      symbols.push(PHONEME_INVENTORY[best]);
      previous = best;
    }
  }
  return symbols;
}
