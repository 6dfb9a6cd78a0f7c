/**
 * Acceptance suite for the classifier harness; prints one PASS/FAIL
 * line per criterion.
 */

import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import Papa from "papaparse";
import { afterAll, describe, expect, it } from "vitest";

import { COMPARISON_COLUMNS, compare } from "../src/compare";
import { mulberry32 } from "../src/rng";
import { auc, rocCurve, trapezoidalAuc } from "../src/roc";
import { train } from "../src/train";
import { makeSeparableCorpus } from "./corpus";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "bmsclf-accept-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function report(name: string, body: () => void | Promise<void>) {
  return async () => {
    try {
      await body();
    } catch (err) {
      console.log(`[ACCEPTANCE] ${name}: FAIL`);
      throw err;
    }
    console.log(`[ACCEPTANCE] ${name}: PASS`);
  };
}

describe("acceptance", () => {
  it(
    "evaluation correctness",
    report("evaluation correctness (hand ROC exactly; random scorer 0.5 +/- 0.05)", () => {
      // hand-enumerated ROC cases, exact
      expect(auc([1, 1, 0, 0], [0.9, 0.8, 0.3, 0.1])).toBe(1.0);
      expect(auc([1, 0, 0, 1], [0.9, 0.8, 0.3, 0.1])).toBe(0.5);
      expect(auc([1, 0, 1, 0], [0.9, 0.8, 0.3, 0.1])).toBe(0.75);
      const points = rocCurve([1, 1, 0, 0], [0.9, 0.8, 0.3, 0.1]);
      expect(points.map((p) => [p.fpr, p.tpr])).toEqual([
        [0, 0],
        [0, 0.5],
        [0, 1],
        [0.5, 1],
        [1, 1],
      ]);
      expect(trapezoidalAuc(points)).toBe(1.0);

      // random scorer over 10k samples sits at chance level
      const rand = mulberry32(2024);
      const labels = Array.from({ length: 10000 }, () => (rand() < 0.5 ? 1 : 0));
      const scores = labels.map(() => rand());
      const chance = auc(labels, scores);
      expect(Math.abs(chance - 0.5)).toBeLessThanOrEqual(0.05);
    }),
  );

  it(
    "end-to-end learnability and comparison table",
    report(
      "SmallCNN separable-corpus AUC >= 0.95 in <= 10 epochs, < 5 min; table shape",
      async () => {
        const corpus = makeSeparableCorpus(path.join(tmp, "corpus"), {
          nTrain: 60,
          nVal: 20,
          size: 32,
          seed: 77,
        });
        const common = {
          manifestPath: corpus.manifestPath,
          trainListPath: corpus.trainListPath,
          valListPath: corpus.valListPath,
          imageSize: 32,
          epochs: 10,
          batchSize: 16,
          lrStart: 1e-3, // from-scratch training rate; fine-tune default is 4e-5
        };

        const started = Date.now();
        const run = await train({ ...common, backbone: "SmallCNN", seed: 3 });
        const elapsedS = (Date.now() - started) / 1000;
        console.log(
          `  SmallCNN: val AUC ${run.auc.toFixed(3)} in ${elapsedS.toFixed(1)} s`,
        );
        expect(run.history.length).toBeLessThanOrEqual(10);
        expect(run.auc).toBeGreaterThanOrEqual(0.95);
        expect(elapsedS).toBeLessThan(300);

        // comparison table: one row per backbone, fixed columns
        const outDir = path.join(tmp, "cmp");
        const result = await compare(
          [
            { ...common, epochs: 3, backbone: "SmallCNN", seed: 1 },
            { ...common, epochs: 3, backbone: "SmallCNN", seed: 2 },
          ],
          outDir,
        );
        const csv = Papa.parse<Record<string, string>>(
          fs.readFileSync(result.csvPath, "utf-8").trim(),
          { header: true },
        );
        expect(csv.meta.fields).toEqual([...COMPARISON_COLUMNS]);
        expect(csv.data).toHaveLength(2);
        for (const row of csv.data) {
          for (const column of ["accuracy", "loss", "auc", "overfit_gap"]) {
            expect(row[column]).not.toBe("");
            expect(Number.isFinite(Number(row[column]))).toBe(true);
          }
        }
        expect(Number(csv.data[0].auc)).toBeGreaterThanOrEqual(0.5);
      },
    ),
  );
});
