/** ROC curve construction and trapezoidal AUC for binary scores. */

import { MetricError } from "./errors";

export interface RocPoint {
  threshold: number;
  fpr: number;
  tpr: number;
}

/**
 * ROC points swept over the unique score thresholds, highest first.
 * The curve starts at (0, 0) (threshold above every score) and ends at
 * (1, 1). Requires both classes to be present.
 */
export function rocCurve(labels: readonly number[], scores: readonly number[]): RocPoint[] {
  if (labels.length !== scores.length) {
    throw new MetricError(`labels (${labels.length}) and scores (${scores.length}) differ in length`);
  }
  const nPos = labels.filter((y) => y === 1).length;
  const nNeg = labels.length - nPos;
  if (nPos === 0 || nNeg === 0) {
    throw new MetricError("AUC is undefined for a single-class split");
  }
  const order = labels
    .map((_, i) => i)
    .sort((a, b) => scores[b] - scores[a]);

  const points: RocPoint[] = [{ threshold: Infinity, fpr: 0, tpr: 0 }];
  let tp = 0;
  let fp = 0;
  for (let k = 0; k < order.length; k++) {
    const i = order[k];
    if (labels[i] === 1) tp++;
    else fp++;
    // emit one point per unique threshold (after consuming ties)
    if (k + 1 < order.length && scores[order[k + 1]] === scores[i]) continue;
    points.push({ threshold: scores[i], fpr: fp / nNeg, tpr: tp / nPos });
  }
  return points;
}

/** Area under the ROC curve by trapezoidal integration. */
export function trapezoidalAuc(points: readonly RocPoint[]): number {
  let area = 0;
  for (let i = 1; i < points.length; i++) {
    area += ((points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr)) / 2;
  }
  return area;
}

/** Convenience: AUC straight from labels and scores. */
export function auc(labels: readonly number[], scores: readonly number[]): number {
  return trapezoidalAuc(rocCurve(labels, scores));
}

/** Fraction of correct predictions at the 0.5 threshold. */
export function accuracy(labels: readonly number[], scores: readonly number[]): number {
  let correct = 0;
  for (let i = 0; i < labels.length; i++) {
    correct += (scores[i] >= 0.5 ? 1 : 0) === labels[i] ? 1 : 0;
  }
  return correct / labels.length;
}

/** Mean binary cross-entropy with clamped probabilities. */
export function binaryCrossEntropy(labels: readonly number[], scores: readonly number[]): number {
  const eps = 1e-7;
  let total = 0;
  for (let i = 0; i < labels.length; i++) {
    const p = Math.min(1 - eps, Math.max(eps, scores[i]));
    total += labels[i] === 1 ? -Math.log(p) : -Math.log(1 - p);
  }
  return total / labels.length;
}
