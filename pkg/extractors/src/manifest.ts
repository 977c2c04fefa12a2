/** Corpus manifest CSV, shared with the scoring toolkit. */

import { readFileSync } from "node:fs";
import { dirname, isAbsolute, join } from "node:path";

export interface UtteranceRow {
  utteranceId: string;
  speakerId: string;
  timepointId: string;
  wavPath: string;
  transcript: string;
  phonemeRef: string[];
  rating: number | null;
}

const HEADER = [
  "utterance_id",
  "speaker_id",
  "timepoint_id",
  "wav_path",
  "transcript",
  "phoneme_ref",
  "rating",
];

function splitCsvLine(line: string, where: string): string[] {
  const fields: string[] = [];
  let field = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"' && field === "") {
      quoted = true;
    } else if (ch === ",") {
      fields.push(field);
      field = "";
    } else {
      field += ch;
    }
  }
  if (quoted) {
    throw new Error(`${where}: unterminated quote`);
  }
  fields.push(field);
  return fields;
}

/** Parse the manifest; relative wav paths resolve against its directory. */
export function loadManifest(path: string): UtteranceRow[] {
  const base = dirname(path);
  const lines = readFileSync(path, "utf-8").split(/\r?\n/);
  if (lines.length === 0 || splitCsvLine(lines[0], `${path}:1`).join(",") !== HEADER.join(",")) {
    throw new Error(`${path}: bad or missing manifest header`);
  }
  const rows: UtteranceRow[] = [];
  const seen = new Set<string>();
  for (let i = 1; i < lines.length; i++) {
    if (!lines[i].trim()) {
      continue;
    }
    const fields = splitCsvLine(lines[i], `${path}:${i + 1}`);
    if (fields.length !== HEADER.length) {
      throw new Error(`${path}: row ${i + 1}: expected ${HEADER.length} columns, got ${fields.length}`);
    }
    const [utt, spk, tp, wav, transcript, phon, rating] = fields;
    if (!utt || seen.has(utt)) {
      throw new Error(`${path}: row ${i + 1}: missing or duplicate utterance_id ${JSON.stringify(utt)}`);
    }
    seen.add(utt);
    rows.push({
      utteranceId: utt,
      speakerId: spk,
      timepointId: tp,
      wavPath: isAbsolute(wav) ? wav : join(base, wav),
      transcript,
      phonemeRef: phon.split(/\s+/).filter((s) => s.length > 0),
      rating: rating.trim() === "" ? null : Number(rating),
    });
  }
  return rows;
}
