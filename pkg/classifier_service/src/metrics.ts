/** Multi-label metrics for epoch logging: per-label F1, macro/weighted F1,
 * Hamming loss, and flattened MCC. Conventions mirror the evaluation
 * toolkit: any precision/recall/F1 with an empty denominator scores 0, and
 * a zero factor in the MCC denominator yields 0.
 */

export interface LabelScore {
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

function checkShapes(yTrue: number[][], yPred: number[][]): void {
  if (yTrue.length !== yPred.length || yTrue.length === 0) {
    throw new Error(`shape mismatch: ${yTrue.length} vs ${yPred.length} rows`);
  }
  for (let i = 0; i < yTrue.length; i++) {
    if (yTrue[i].length !== yPred[i].length) {
      throw new Error(`row ${i}: ${yTrue[i].length} vs ${yPred[i].length} labels`);
    }
  }
}

export function perLabelF1(yTrue: number[][], yPred: number[][]): LabelScore[] {
  checkShapes(yTrue, yPred);
  const labels = yTrue[0].length;
  const scores: LabelScore[] = [];
  for (let l = 0; l < labels; l++) {
    let tp = 0;
    let fp = 0;
    let fn = 0;
    let support = 0;
    for (let i = 0; i < yTrue.length; i++) {
      const t = yTrue[i][l];
      const p = yPred[i][l];
      support += t;
      if (t === 1 && p === 1) tp++;
      else if (p === 1) fp++;
      else if (t === 1) fn++;
    }
    const precision = tp + fp ? tp / (tp + fp) : 0;
    const recall = tp + fn ? tp / (tp + fn) : 0;
    const f1 = precision + recall ? (2 * precision * recall) / (precision + recall) : 0;
    scores.push({ precision, recall, f1, support });
  }
  return scores;
}

export function macroF1(perLabel: LabelScore[]): number {
  return perLabel.reduce((acc, s) => acc + s.f1, 0) / perLabel.length;
}

export function weightedF1(perLabel: LabelScore[]): number {
  const total = perLabel.reduce((acc, s) => acc + s.support, 0);
  if (total === 0) throw new Error("no label has any true instance");
  return perLabel.reduce((acc, s) => acc + s.f1 * s.support, 0) / total;
}

export function hammingLoss(yTrue: number[][], yPred: number[][]): number {
  checkShapes(yTrue, yPred);
  let wrong = 0;
  let cells = 0;
  for (let i = 0; i < yTrue.length; i++) {
    for (let j = 0; j < yTrue[i].length; j++) {
      if (yTrue[i][j] !== yPred[i][j]) wrong++;
      cells++;
    }
  }
  return wrong / cells;
}

export function mccFlattened(yTrue: number[][], yPred: number[][]): number {
  checkShapes(yTrue, yPred);
  let tp = 0;
  let tn = 0;
  let fp = 0;
  let fn = 0;
  for (let i = 0; i < yTrue.length; i++) {
    for (let j = 0; j < yTrue[i].length; j++) {
      const t = yTrue[i][j];
      const p = yPred[i][j];
      if (t === 1 && p === 1) tp++;
      else if (t === 0 && p === 0) tn++;
      else if (p === 1) fp++;
      else fn++;
    }
  }
  const denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom === 0) return 0;
  return (tp * tn - fp * fn) / Math.sqrt(denom);
}

export interface MetricBundle {
  macroF1: number;
  weightedF1: number;
  hammingLoss: number;
  mcc: number;
}

export function metricBundle(yTrue: number[][], yPred: number[][]): MetricBundle {
  const per = perLabelF1(yTrue, yPred);
  return {
    macroF1: macroF1(per),
    weightedF1: weightedF1(per),
    hammingLoss: hammingLoss(yTrue, yPred),
    mcc: mccFlattened(yTrue, yPred),
  };
}
