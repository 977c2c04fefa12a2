/** extract-ppg: one TxK posteriorgram XPGF file per manifest row. */

import { join } from "node:path";

import { parseCli, runMain } from "./cliCommon.js";
import { loadAudioOrThrow, runBatch } from "./extract.js";
import { builtinPhoneticPosteriors, resolveEngine } from "./models.js";
import { writeXpgf } from "./xpgf.js";

runMain(() => {
  const options = parseCli(
    process.argv.slice(2),
    "usage: extract-ppg --manifest <csv> --out <dir> [--lock <json>] [--unit-layer phoneme|subword]",
  );
  const entry = options.lock.phoneticPosterior;
  if (resolveEngine(entry) === "checkpoint") {
    throw new Error(
      `running ${entry.name} weights requires a neural runtime; none is bundled - ` +
        "remove localPath from the lockfile to use the builtin engine",
    );
  }
  const stats = runBatch(options, "ppg", entry, (row, outDir) => {
    const posterior = builtinPhoneticPosteriors(loadAudioOrThrow(row), options.unitLayer);
    writeXpgf(join(outDir, `${row.utteranceId}.ppg.xpgf`), {
      rows: posterior.rows,
      cols: posterior.cols,
      values: posterior.values,
    });
  });
  return stats.failed.length > 0 ? 1 : 0;
});
