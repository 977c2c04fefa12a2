/** Minimal RIFF/WAVE reader and writer for PCM16 and float32 mono pipelines. */

import { readFileSync, writeFileSync } from "node:fs";

export interface RawAudio {
  samples: Float64Array;
  sampleRateHz: number;
}

/**
 * Read a PCM WAV file (16-bit int or 32-bit float). Multichannel input is
 * mean-downmixed; 16-bit samples are scaled by 1/32768.
 */
export function readWav(path: string): RawAudio {
  const raw = readFileSync(path);
  if (raw.length < 12 || raw.toString("ascii", 0, 4) !== "RIFF" || raw.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error(`${path}: not a RIFF/WAVE file`);
  }
  let offset = 12;
  let format = 0;
  let channels = 0;
  let sampleRate = 0;
  let bitsPerSample = 0;
  let data: Buffer | undefined;
  while (offset + 8 <= raw.length) {
    const chunkId = raw.toString("ascii", offset, offset + 4);
    const chunkSize = raw.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (body + chunkSize > raw.length) {
      throw new Error(`${path}: truncated ${chunkId} chunk`);
    }
    if (chunkId === "fmt ") {
      format = raw.readUInt16LE(body);
      channels = raw.readUInt16LE(body + 2);
      sampleRate = raw.readUInt32LE(body + 4);
      bitsPerSample = raw.readUInt16LE(body + 14);
    } else if (chunkId === "data") {
      data = raw.subarray(body, body + chunkSize);
    }
    offset = body + chunkSize + (chunkSize % 2);
  }
  if (!data || channels < 1) {
    throw new Error(`${path}: missing fmt or data chunk`);
  }
  let perChannel: (frame: number, channel: number) => number;
  let bytesPerSample: number;
  if (format === 1 && bitsPerSample === 16) {
    bytesPerSample = 2;
    perChannel = (frame, ch) => data!.readInt16LE((frame * channels + ch) * 2) / 32768;
  } else if (format === 3 && bitsPerSample === 32) {
    bytesPerSample = 4;
    perChannel = (frame, ch) => data!.readFloatLE((frame * channels + ch) * 4);
  } else {
    throw new Error(`${path}: unsupported encoding (format ${format}, ${bitsPerSample} bit)`);
  }
  const frames = Math.floor(data.length / (bytesPerSample * channels));
  if (frames === 0) {
    throw new Error(`${path}: no samples`);
  }
  const samples = new Float64Array(frames);
  for (let i = 0; i < frames; i++) {
    let acc = 0;
    for (let ch = 0; ch < channels; ch++) {
      acc += perChannel(i, ch);
    }
    samples[i] = acc / channels;
  }
  return { samples, sampleRateHz: sampleRate };
}

/** Write mono 16-bit PCM (used by the tests to fabricate inputs). */
export function writeWavPcm16(path: string, audio: RawAudio): void {
  const n = audio.samples.length;
  const buf = Buffer.alloc(44 + 2 * n);
  buf.write("RIFF", 0, "ascii");
  buf.writeUInt32LE(36 + 2 * n, 4);
  buf.write("WAVE", 8, "ascii");
  buf.write("fmt ", 12, "ascii");
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(1, 20);
  buf.writeUInt16LE(1, 22);
  buf.writeUInt32LE(audio.sampleRateHz, 24);
  buf.writeUInt32LE(audio.sampleRateHz * 2, 28);
  buf.writeUInt16LE(2, 32);
  buf.writeUInt16LE(16, 34);
  buf.write("data", 36, "ascii");
  buf.writeUInt32LE(2 * n, 40);
  for (let i = 0; i < n; i++) {
    const v = Math.max(-1, Math.min(1, audio.samples[i]));
    buf.writeInt16LE(Math.max(-32768, Math.min(32767, Math.round(v * 32768))), 44 + 2 * i);
  }
  writeFileSync(path, buf);
}
