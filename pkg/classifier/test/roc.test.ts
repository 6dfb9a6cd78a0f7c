import { describe, expect, it } from "vitest";

import { MetricError } from "../src/errors";
import { mulberry32 } from "../src/rng";
import { accuracy, auc, binaryCrossEntropy, rocCurve, trapezoidalAuc } from "../src/roc";

/** Rank-based (Mann-Whitney) AUC with half credit for ties. */
function rankAuc(labels: number[], scores: number[]): number {
  let wins = 0;
  let pairs = 0;
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] !== 1) continue;
    for (let j = 0; j < labels.length; j++) {
      if (labels[j] !== 0) continue;
      pairs++;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] === scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

describe("rocCurve / trapezoidalAuc", () => {
  it("scores a perfect scorer on a balanced set as 1.0", () => {
    expect(auc([1, 1, 0, 0], [0.9, 0.8, 0.3, 0.1])).toBe(1.0);
    expect(auc([0, 1, 0, 1], [0.2, 0.7, 0.1, 0.9])).toBe(1.0);
  });

  it("matches hand-enumerated ROC for partially wrong scorers", () => {
    // labels [1,0,1,0] on descending scores: pos/neg pairs win 3 of 4
    expect(auc([1, 0, 1, 0], [0.9, 0.8, 0.3, 0.1])).toBeCloseTo(0.75, 15);
    // interleaving that cancels to chance level
    expect(auc([1, 0, 0, 1], [0.9, 0.8, 0.3, 0.1])).toBeCloseTo(0.5, 15);
    expect(auc([0, 0, 1, 1], [0.9, 0.8, 0.3, 0.1])).toBe(0.0);
  });

  it("starts at (0,0) and ends at (1,1)", () => {
    const points = rocCurve([1, 0, 1], [0.2, 0.5, 0.9]);
    expect(points[0]).toMatchObject({ fpr: 0, tpr: 0 });
    expect(points[points.length - 1]).toMatchObject({ fpr: 1, tpr: 1 });
  });

  it("agrees with the rank-based oracle, including ties", () => {
    const rand = mulberry32(99);
    for (let trial = 0; trial < 50; trial++) {
      const n = 30;
      const labels = Array.from({ length: n }, (_, i) => (i < n / 2 ? 1 : 0));
      // quantized scores force ties
      const scores = labels.map(
        (y) => Math.round((0.3 * y + 0.7 * rand()) * 8) / 8,
      );
      if (new Set(labels).size < 2) continue;
      expect(auc(labels, scores)).toBeCloseTo(rankAuc(labels, scores), 12);
    }
  });

  it("is invariant under strictly monotone score transforms", () => {
    const rand = mulberry32(5);
    const labels = Array.from({ length: 40 }, () => (rand() < 0.5 ? 1 : 0));
    labels[0] = 1;
    labels[1] = 0;
    const scores = labels.map(() => rand());
    const base = auc(labels, scores);
    for (const transform of [
      (x: number) => 2 * x + 1,
      (x: number) => Math.exp(x),
      (x: number) => x ** 3 + x,
      (x: number) => 1 / (1 + Math.exp(-x)),
    ]) {
      expect(auc(labels, scores.map(transform))).toBeCloseTo(base, 12);
    }
  });

  it("rejects single-class splits", () => {
    expect(() => rocCurve([1, 1, 1], [0.1, 0.5, 0.9])).toThrow(MetricError);
    expect(() => rocCurve([0, 0], [0.1, 0.5])).toThrow(MetricError);
  });

  it("rejects mismatched lengths", () => {
    expect(() => rocCurve([1, 0], [0.5])).toThrow(MetricError);
  });
});

describe("accuracy / binaryCrossEntropy", () => {
  it("computes threshold-0.5 accuracy", () => {
    expect(accuracy([1, 0, 1, 0], [0.9, 0.1, 0.2, 0.8])).toBe(0.5);
    expect(accuracy([1, 0], [0.6, 0.4])).toBe(1.0);
  });

  it("computes mean binary cross-entropy", () => {
    const loss = binaryCrossEntropy([1, 0], [0.8, 0.2]);
    expect(loss).toBeCloseTo(-Math.log(0.8), 10);
    expect(binaryCrossEntropy([1], [1.0])).toBeLessThan(1e-5);
  });
});
