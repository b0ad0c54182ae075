/** Fine-tuning loop: AdamW with linear warmup/decay and focal loss.
 *
 * The optimizer follows the usual transformer fine-tuning recipe: decoupled
 * weight decay, a learning-rate schedule that warms up over the first
 * warmupRatio of steps then decays linearly to zero, and seeded epoch
 * shuffling. Per-epoch train/validation metrics use the same formulas as
 * the evaluation toolkit's metrics module.
 */

import { NUM_LABELS, TrainConfig, resolveConfig } from "./config.js";
import { LabeledClause, labelsToRow } from "./corpus.js";
import { focalLoss, focalLossGradLogit, sigmoid } from "./focalLoss.js";
import { MetricBundle, metricBundle } from "./metrics.js";
import { ClauseClassifier } from "./model.js";
import { mulberry32, shuffled } from "./rng.js";

export interface EpochLog {
  epoch: number;
  trainLoss: number;
  learningRateAtEnd: number;
  train: MetricBundle;
  validation: MetricBundle | null;
}

export interface TrainResult {
  model: ClauseClassifier;
  log: EpochLog[];
}

function validateSplit(name: string, clauses: LabeledClause[]): void {
  if (clauses.length === 0) throw new Error(`${name} split is empty`);
  for (const clause of clauses) {
    for (const label of clause.labels) {
      if (!Number.isInteger(label) || label < 1 || label > NUM_LABELS) {
        throw new Error(`${name} split: label ${label} outside 1..${NUM_LABELS}`);
      }
    }
  }
}

function assertDisjoint(train: LabeledClause[], val: LabeledClause[]): void {
  const seen = new Set(train);
  for (const clause of val) {
    if (seen.has(clause)) throw new Error("train and validation splits share a clause");
  }
}

function evaluate(model: ClauseClassifier, clauses: LabeledClause[]): MetricBundle {
  const yTrue = clauses.map((c) => labelsToRow(c.labels));
  const yPred = clauses.map((c) => model.predictRow(c.text));
  return metricBundle(yTrue, yPred);
}

export function train(
  trainClauses: LabeledClause[],
  valClauses: LabeledClause[],
  overrides: Partial<TrainConfig> = {},
): TrainResult {
  const cfg = resolveConfig(overrides);
  validateSplit("train", trainClauses);
  validateSplit("validation", valClauses);
  assertDisjoint(trainClauses, valClauses);

  const model = new ClauseClassifier(cfg);
  const weights = model.weights;
  const size = weights.length;
  const m = new Float64Array(size);
  const v = new Float64Array(size);
  const grad = new Float64Array(size);

  const params = { alpha: cfg.focalAlpha, gamma: cfg.focalGamma };
  const beta1 = 0.9;
  const beta2 = 0.999;
  const eps = 1e-8;

  const stepsPerEpoch = Math.ceil(trainClauses.length / cfg.batchSize);
  const totalSteps = stepsPerEpoch * cfg.epochs;
  const warmupSteps = Math.floor(totalSteps * cfg.warmupRatio);

  const lrAt = (step: number): number => {
    if (warmupSteps > 0 && step < warmupSteps) {
      return (cfg.learningRate * (step + 1)) / warmupSteps;
    }
    if (totalSteps === warmupSteps) return cfg.learningRate;
    const progress = (step - warmupSteps) / (totalSteps - warmupSteps);
    return cfg.learningRate * Math.max(0, 1 - progress);
  };

  const rand = mulberry32(cfg.seed);
  const featurized = new Map<LabeledClause, Map<number, number>>();
  for (const clause of trainClauses) {
    featurized.set(clause, model.featurizer.featurize(clause.text));
  }

  const log: EpochLog[] = [];
  let step = 0;
  let lr = cfg.learningRate;

  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const order = shuffled(trainClauses, rand);
    let epochLoss = 0;
    let epochCells = 0;

    for (let start = 0; start < order.length; start += cfg.batchSize) {
      const batch = order.slice(start, start + cfg.batchSize);
      grad.fill(0);

      for (const clause of batch) {
        const features = featurized.get(clause)!;
        const logits = model.logits(features);
        const row = labelsToRow(clause.labels);
        for (let l = 0; l < NUM_LABELS; l++) {
          const label = row[l] as 0 | 1;
          epochLoss += focalLoss(sigmoid(logits[l]), label, params);
          epochCells += 1;
          const gz = focalLossGradLogit(logits[l], label, params) / batch.length;
          for (const [index, count] of features) {
            grad[index * NUM_LABELS + l] += gz * count;
          }
        }
      }

      lr = lrAt(step);
      const bc1 = 1 - Math.pow(beta1, step + 1);
      const bc2 = 1 - Math.pow(beta2, step + 1);
      for (let i = 0; i < size; i++) {
        m[i] = beta1 * m[i] + (1 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1 - beta2) * grad[i] * grad[i];
        const update = (m[i] / bc1) / (Math.sqrt(v[i] / bc2) + eps);
        weights[i] -= lr * update + lr * cfg.weightDecay * weights[i];
      }
      step += 1;
    }

    log.push({
      epoch,
      trainLoss: epochLoss / epochCells,
      learningRateAtEnd: lr,
      train: evaluate(model, trainClauses),
      validation: valClauses.length ? evaluate(model, valClauses) : null,
    });
  }

  return { model, log };
}
