/** Command-line entry: train a classifier, serve it, or run the focal-loss
 * parity check against the shared fixture file.
 *
 *   node dist/index.js train --data train.txt [--val validation.txt]
 *         --out model-dir [--epochs N --seed N --learning-rate X]
 *   node dist/index.js serve --model model-dir [--port 8414]
 *   node dist/index.js focal-parity --file fixtures/focal_parity.jsonl
 */

import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { TrainConfig } from "./config.js";
import { parseAnnotated } from "./corpus.js";
import { focalLoss } from "./focalLoss.js";
import { ClauseClassifier } from "./model.js";
import { createClassifierServer, listen } from "./serve.js";
import { train } from "./train.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`expected --flag value pairs, got ${argv.join(" ")}`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new Error(`missing required --${name}`);
  return value;
}

function cmdTrain(flags: Map<string, string>): number {
  const trainClauses = parseAnnotated(readFileSync(need(flags, "data"), "utf-8"));
  const valPath = flags.get("val");
  const valClauses = valPath ? parseAnnotated(readFileSync(valPath, "utf-8")) : [];
  const outDir = need(flags, "out");

  const overrides: Partial<TrainConfig> = {};
  if (flags.has("epochs")) overrides.epochs = Number(flags.get("epochs"));
  if (flags.has("seed")) overrides.seed = Number(flags.get("seed"));
  if (flags.has("learning-rate")) overrides.learningRate = Number(flags.get("learning-rate"));
  if (flags.has("batch-size")) overrides.batchSize = Number(flags.get("batch-size"));

  const result = train(trainClauses, valClauses, overrides);
  result.model.save(outDir);
  const logPath = join(outDir, "metrics.jsonl");
  writeFileSync(logPath, result.log.map((entry) => JSON.stringify(entry)).join("\n") + "\n");
  const last = result.log[result.log.length - 1];
  console.log(
    `trained ${result.log.length} epochs on ${trainClauses.length} clauses; ` +
      `final train weightedF1=${last.train.weightedF1.toFixed(4)} loss=${last.trainLoss.toFixed(6)}`,
  );
  console.log(`checkpoint: ${join(outDir, "model.json")}  log: ${logPath}`);
  return 0;
}

async function cmdServe(flags: Map<string, string>): Promise<number> {
  const model = ClauseClassifier.loadFromDirectory(need(flags, "model"));
  const server = createClassifierServer(model);
  const port = await listen(server, Number(flags.get("port") ?? 8414));
  console.log(`classification endpoint listening on http://127.0.0.1:${port}/classify`);
  return new Promise(() => undefined); // run until killed
}

function cmdFocalParity(flags: Map<string, string>): number {
  const path = need(flags, "file");
  const tolerance = Number(flags.get("tolerance") ?? 1e-6);
  const offenders: string[] = [];
  let count = 0;
  for (const line of readFileSync(path, "utf-8").split("\n")) {
    if (!line.trim()) continue;
    const row = JSON.parse(line);
    const got = focalLoss(row.prob, row.label, { alpha: row.alpha, gamma: row.gamma });
    count += 1;
    if (Math.abs(got - row.expected) >= tolerance) {
      offenders.push(
        `prob=${row.prob} label=${row.label} alpha=${row.alpha} gamma=${row.gamma}: ` +
          `got ${got}, expected ${row.expected}`,
      );
    }
  }
  if (offenders.length > 0) {
    console.error(`focal parity FAILED on ${offenders.length} of ${count} pairs:`);
    for (const line of offenders.slice(0, 20)) console.error(`  ${line}`);
    return 1;
  }
  console.log(`focal parity OK on ${count} pairs (tolerance ${tolerance})`);
  return 0;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    const flags = parseFlags(rest);
    switch (command) {
      case "train":
        return cmdTrain(flags);
      case "serve":
        return cmdServe(flags);
      case "focal-parity":
        return cmdFocalParity(flags);
      default:
        console.error("usage: index.js <train|serve|focal-parity> [--flag value ...]");
        return 2;
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

main().then((code) => {
  if (code !== 0) process.exitCode = code;
});
