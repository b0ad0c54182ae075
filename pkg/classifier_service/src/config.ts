/** Training configuration with the published fine-tuning recipe as defaults. */

export interface TrainConfig {
  /** Identity of the intended pretrained encoder. Loading transformer
   * checkpoints is outside this service's runtime; the hashed featurizer in
   * features.ts stands in for the encoder (see README). */
  baseModelId: string;
  epochs: number;
  learningRate: number;
  weightDecay: number;
  warmupRatio: number;
  dropout: number;
  focalAlpha: number;
  focalGamma: number;
  seed: number;
  maxSequenceLength: number;
  /** Implementation knobs (not part of the published recipe). */
  batchSize: number;
  hashDim: number;
}

export const NUM_LABELS = 14;

export const DEFAULT_TRAIN_CONFIG: TrainConfig = {
  baseModelId: "lexlms/legal-roberta-base",
  epochs: 3,
  learningRate: 1e-5,
  weightDecay: 0.01,
  warmupRatio: 0.1,
  dropout: 0.0,
  focalAlpha: 0.25,
  focalGamma: 2.0,
  seed: 0,
  maxSequenceLength: 512,
  batchSize: 8,
  hashDim: 4096,
};

export function resolveConfig(overrides: Partial<TrainConfig> = {}): TrainConfig {
  const cfg = { ...DEFAULT_TRAIN_CONFIG, ...overrides };
  if (cfg.epochs < 1) throw new Error("epochs must be >= 1");
  if (cfg.learningRate <= 0) throw new Error("learningRate must be > 0");
  if (cfg.warmupRatio < 0 || cfg.warmupRatio >= 1) {
    throw new Error("warmupRatio must be in [0, 1)");
  }
  if (cfg.focalAlpha <= 0 || cfg.focalAlpha > 1) {
    throw new Error("focalAlpha must be in (0, 1]");
  }
  if (cfg.focalGamma < 0) throw new Error("focalGamma must be >= 0");
  if (cfg.batchSize < 1) throw new Error("batchSize must be >= 1");
  if (cfg.maxSequenceLength < 1) throw new Error("maxSequenceLength must be >= 1");
  return cfg;
}
