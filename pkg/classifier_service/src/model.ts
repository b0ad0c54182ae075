/** Linear multi-label head over hashed features.
 *
 * One weight column per taxonomy label, zero-initialized and bias-free, with
 * independent sigmoid outputs. Checkpoints serialize to a single JSON file.
 */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname, join } from "node:path";

import { NUM_LABELS, TrainConfig } from "./config.js";
import { HashedFeaturizer } from "./features.js";
import { sigmoid } from "./focalLoss.js";

export class ClauseClassifier {
  readonly featurizer: HashedFeaturizer;
  readonly weights: Float64Array; // row-major [dim][NUM_LABELS]

  constructor(
    readonly config: TrainConfig,
    weights?: Float64Array,
  ) {
    this.featurizer = new HashedFeaturizer(config.hashDim, config.maxSequenceLength);
    this.weights = weights ?? new Float64Array(config.hashDim * NUM_LABELS);
    if (this.weights.length !== config.hashDim * NUM_LABELS) {
      throw new Error(`weight size ${this.weights.length} does not match config`);
    }
  }

  logits(features: Map<number, number>): number[] {
    const out = new Array<number>(NUM_LABELS).fill(0);
    for (const [index, count] of features) {
      const base = index * NUM_LABELS;
      for (let l = 0; l < NUM_LABELS; l++) {
        out[l] += count * this.weights[base + l];
      }
    }
    return out;
  }

  probabilities(text: string): number[] {
    return this.logits(this.featurizer.featurize(text)).map(sigmoid);
  }

  /** Thresholded prediction row used by the epoch metrics. */
  predictRow(text: string, threshold = 0.5): number[] {
    return this.probabilities(text).map((p) => (p >= threshold ? 1 : 0));
  }

  save(directory: string): string {
    mkdirSync(directory, { recursive: true });
    const path = join(directory, "model.json");
    writeFileSync(
      path,
      JSON.stringify(
        { format: "clause-classifier/1", config: this.config, weights: [...this.weights] },
        null,
        0,
      ),
    );
    return path;
  }

  static load(path: string): ClauseClassifier {
    const raw = JSON.parse(readFileSync(path, "utf-8"));
    if (raw.format !== "clause-classifier/1") {
      throw new Error(`unrecognized checkpoint format in ${path}`);
    }
    return new ClauseClassifier(raw.config, Float64Array.from(raw.weights));
  }

  static loadFromDirectory(directory: string): ClauseClassifier {
    return ClauseClassifier.load(join(directory, "model.json"));
  }
}

export function checkpointDir(path: string): string {
  return path.endsWith("model.json") ? dirname(path) : path;
}
