/** Flag handling shared by the three extractor entry points. */

import { parseArgs } from "node:util";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { loadModelLock, ModelLock, UnitLayer, UNIT_COUNTS } from "./models.js";

export interface CliOptions {
  manifestPath: string;
  outDir: string;
  lock: ModelLock;
  unitLayer: UnitLayer;
}

const DEFAULT_LOCK = join(dirname(fileURLToPath(import.meta.url)), "..", "models.lock.json");

export function parseCli(argv: string[], usage: string): CliOptions {
  const { values } = parseArgs({
    args: argv,
    options: {
      manifest: { type: "string" },
      out: { type: "string" },
      lock: { type: "string", default: DEFAULT_LOCK },
      "unit-layer": { type: "string", default: "phoneme" },
    },
  });
  if (!values.manifest || !values.out) {
    throw new Error(usage);
  }
  const layer = values["unit-layer"] as string;
  if (!(layer in UNIT_COUNTS)) {
    throw new Error(`--unit-layer must be one of ${Object.keys(UNIT_COUNTS).join(", ")}`);
  }
  return {
    manifestPath: values.manifest,
    outDir: values.out,
    lock: loadModelLock(values.lock as string),
    unitLayer: layer as UnitLayer,
  };
}

export function runMain(run: () => number): void {
  try {
    process.exitCode = run();
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    console.error(`error: ${message}`);
    process.exitCode = 1;
  }
}
