/**
 * XPGF feature container, the on-disk contract with the scoring toolkit:
 * little-endian, magic "XPGF", u32 version = 1, u32 rows, u32 cols, then
 * rows*cols IEEE-754 float32 row-major. No padding, no trailing bytes.
 */

import { readFileSync, writeFileSync } from "node:fs";

const MAGIC = "XPGF";
const VERSION = 1;

export interface Matrix {
  rows: number;
  cols: number;
  /** row-major float32 payload */
  values: Float32Array;
}

export function writeXpgf(path: string, matrix: Matrix): void {
  const { rows, cols, values } = matrix;
  if (rows < 1 || cols < 1 || values.length !== rows * cols) {
    throw new Error(`invalid matrix shape ${rows}x${cols} with ${values.length} values`);
  }
  for (const v of values) {
    if (!Number.isFinite(v)) {
      throw new Error("matrix contains non-finite values");
    }
  }
  const buf = Buffer.alloc(16 + 4 * values.length);
  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt32LE(VERSION, 4);
  buf.writeUInt32LE(rows, 8);
  buf.writeUInt32LE(cols, 12);
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i], 16 + 4 * i);
  }
  writeFileSync(path, buf);
}

export function readXpgf(path: string): Matrix {
  const raw = readFileSync(path);
  if (raw.length < 16 || raw.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${path}: not an XPGF file`);
  }
  const version = raw.readUInt32LE(4);
  if (version !== VERSION) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const rows = raw.readUInt32LE(8);
  const cols = raw.readUInt32LE(12);
  if (raw.length !== 16 + 4 * rows * cols) {
    throw new Error(`${path}: payload size disagrees with ${rows}x${cols} header`);
  }
  const values = new Float32Array(rows * cols);
  for (let i = 0; i < values.length; i++) {
    values[i] = raw.readFloatLE(16 + 4 * i);
    if (!Number.isFinite(values[i])) {
      throw new Error(`${path}: non-finite value at index ${i}`);
    }
  }
  return { rows, cols, values };
}
