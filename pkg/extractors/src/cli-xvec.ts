/** extract-xvec: one 1xD speaker-embedding XPGF file per manifest row. */

import { join } from "node:path";

import { parseCli, runMain } from "./cliCommon.js";
import { loadAudioOrThrow, runBatch } from "./extract.js";
import { builtinSpeakerEmbedding, resolveEngine, XVEC_DIM } from "./models.js";
import { writeXpgf } from "./xpgf.js";

runMain(() => {
  const options = parseCli(
    process.argv.slice(2),
    "usage: extract-xvec --manifest <csv> --out <dir> [--lock <json>]",
  );
  const entry = options.lock.speakerEmbedding;
  if (resolveEngine(entry) === "checkpoint") {
    throw new Error(
      `running ${entry.name} weights requires a neural runtime; none is bundled - ` +
        "remove localPath from the lockfile to use the builtin engine",
    );
  }
  const stats = runBatch(options, "xvec", entry, (row, outDir) => {
    const embedding = builtinSpeakerEmbedding(loadAudioOrThrow(row));
    writeXpgf(join(outDir, `${row.utteranceId}.xvec.xpgf`), {
      rows: 1,
      cols: XVEC_DIM,
      values: embedding,
    });
  });
  return stats.failed.length > 0 ? 1 : 0;
});
