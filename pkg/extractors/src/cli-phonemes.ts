/** recognize-phonemes: greedy-decoded phoneme sequences, one line per row. */

import { appendFileSync, writeFileSync, mkdirSync } from "node:fs";
import { join } from "node:path";

import { parseCli, runMain } from "./cliCommon.js";
import { loadAudioOrThrow, runBatch } from "./extract.js";
import { builtinRecognizePhonemes, resolveEngine } from "./models.js";

runMain(() => {
  const options = parseCli(
    process.argv.slice(2),
    "usage: recognize-phonemes --manifest <csv> --out <dir> [--lock <json>]",
  );
  const entry = options.lock.phoneticPosterior;
  if (resolveEngine(entry) === "checkpoint") {
    throw new Error(
      `running ${entry.name} weights requires a neural runtime; none is bundled - ` +
        "remove localPath from the lockfile to use the builtin engine",
    );
  }
  mkdirSync(options.outDir, { recursive: true });
  const outPath = join(options.outDir, "hypotheses.tsv");
  writeFileSync(outPath, "");
  const stats = runBatch(options, "phonemes", entry, (row) => {
    const symbols = builtinRecognizePhonemes(loadAudioOrThrow(row));
    appendFileSync(outPath, `${row.utteranceId}\t${symbols.join(" ")}\n`);
  });
  return stats.failed.length > 0 ? 1 : 0;
});
