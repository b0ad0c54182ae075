/** Focal loss for multi-label sigmoid outputs.
 *
 * Matches the evaluation toolkit's reference implementation cell-for-cell:
 * with p_t the probability assigned to the true outcome,
 * FL = -alpha * (1 - p_t)^gamma * ln(p_t), probabilities clamped to
 * [1e-7, 1 - 1e-7] so the log never diverges.
 */

export interface FocalParams {
  alpha: number;
  gamma: number;
}

export const PROB_EPS = 1e-7;

export function sigmoid(z: number): number {
  return z >= 0 ? 1 / (1 + Math.exp(-z)) : Math.exp(z) / (1 + Math.exp(z));
}

function clamp(p: number): number {
  return Math.min(Math.max(p, PROB_EPS), 1 - PROB_EPS);
}

export function focalLoss(prob: number, label: 0 | 1, params: FocalParams): number {
  const p = clamp(prob);
  const pT = label === 1 ? p : 1 - p;
  return -params.alpha * Math.pow(1 - pT, params.gamma) * Math.log(pT);
}

/** Mean focal loss over all (instance, label) cells of a batch. */
export function focalLossMean(
  probs: number[][],
  labels: number[][],
  params: FocalParams,
): number {
  let total = 0;
  let cells = 0;
  for (let i = 0; i < probs.length; i++) {
    if (probs[i].length !== labels[i].length) {
      throw new Error(`row ${i}: ${probs[i].length} probs vs ${labels[i].length} labels`);
    }
    for (let j = 0; j < probs[i].length; j++) {
      total += focalLoss(probs[i][j], labels[i][j] as 0 | 1, params);
      cells += 1;
    }
  }
  if (cells === 0) throw new Error("empty batch");
  return total / cells;
}

/** d(focal loss)/d(logit) for one sigmoid output cell. */
export function focalLossGradLogit(
  logit: number,
  label: 0 | 1,
  params: FocalParams,
): number {
  const p = clamp(sigmoid(logit));
  const pT = label === 1 ? p : 1 - p;
  const oneMinus = 1 - pT;
  // dFL/dp_t = -alpha * [ (1-p_t)^g / p_t - g (1-p_t)^(g-1) ln p_t ]
  const dLossDpT =
    -params.alpha *
    (Math.pow(oneMinus, params.gamma) / pT -
      (params.gamma > 0
        ? params.gamma * Math.pow(oneMinus, params.gamma - 1) * Math.log(pT)
        : 0));
  // dp_t/dz = +p(1-p) for label 1, -p(1-p) for label 0.
  const dpTdz = (label === 1 ? 1 : -1) * p * (1 - p);
  return dLossDpT * dpTdz;
}
