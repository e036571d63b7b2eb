#!/usr/bin/env node
/**
 * embed --occurrences F --model NAME --batch-size B --out F2
 *
 * Reads occurrence records, embeds each with the named masked-language
 * model, and writes the occurrence-embeddings file consumed by the
 * aggregation stage. Exit codes: 0 success, 1 usage error, 2 data error.
 */

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { MaskedLanguageModel } from "./model.js";
import { runEmbedder } from "./embedder.js";

const USAGE =
  "usage: embed --occurrences FILE --out FILE [--model NAME] [--batch-size N]";

export function main(argv: string[]): number {
  let parsed: ReturnType<typeof parseArgs>;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        occurrences: { type: "string" },
        model: { type: "string", default: "mini-mlm" },
        "batch-size": { type: "string", default: "8" },
        out: { type: "string" },
        help: { type: "boolean", short: "h", default: false },
      },
      allowPositionals: true,
    });
  } catch (error) {
    console.error(`usage error: ${error instanceof Error ? error.message : error}`);
    console.error(USAGE);
    return 1;
  }

  const { values, positionals } = parsed;
  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  // Tolerate an explicit leading "embed" so the same argv works whether the
  // program is installed as a bin or invoked through a runner.
  const extra = positionals[0] === "embed" ? positionals.slice(1) : positionals;
  if (extra.length > 0) {
    console.error(`usage error: unexpected argument "${extra[0]}"`);
    console.error(USAGE);
    return 1;
  }
  if (!values.occurrences || !values.out) {
    console.error("usage error: --occurrences and --out are required");
    console.error(USAGE);
    return 1;
  }
  const batchSize = Number(values["batch-size"]);
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    console.error(`usage error: --batch-size must be a positive integer, got "${values["batch-size"]}"`);
    return 1;
  }

  let model: MaskedLanguageModel;
  try {
    model = MaskedLanguageModel.load(values.model as string);
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 2;
  }

  try {
    const summary = runEmbedder(values.occurrences as string, model, values.out as string, {
      batchSize,
      onSkip: (record, why) =>
        console.error(`skipping ${record.sentenceId} entity ${record.entityId}: ${why}`),
    });
    console.error(
      `embedded ${summary.written} records (${summary.skipped} skipped), ` +
        `dim=${model.hiddenSize}, model=${model.config.name} -> ${values.out}`,
    );
    return 0;
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 2;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
