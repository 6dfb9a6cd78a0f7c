import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { afterAll, describe, expect, it } from "vitest";

import { ConfigError } from "../src/errors";
import { loadReport, normalizeConfig, saveReport, train } from "../src/train";
import { makeSeparableCorpus } from "./corpus";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "bmsclf-train-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

const corpus = makeSeparableCorpus(path.join(tmp, "corpus"), {
  nTrain: 24,
  nVal: 12,
  size: 16,
});

const FAST = {
  manifestPath: corpus.manifestPath,
  trainListPath: corpus.trainListPath,
  valListPath: corpus.valListPath,
  backbone: "SmallCNN" as const,
  imageSize: 16,
  epochs: 3,
  batchSize: 8,
  lrStart: 1e-3,
  rotationDeg: 0,
  zoomFrac: 0,
  seed: 1,
};

describe("normalizeConfig", () => {
  it("applies protocol defaults", () => {
    const config = normalizeConfig({
      manifestPath: "m",
      trainListPath: "t",
      valListPath: "v",
    });
    expect(config.imageSize).toBe(224);
    expect(config.lrStart).toBe(4e-5);
    expect(config.lrFloor).toBe(1e-7);
    expect(config.epochs).toBe(10);
    expect(config.rotationDeg).toBe(20);
  });

  it("rejects invalid settings", () => {
    const base = { manifestPath: "m", trainListPath: "t", valListPath: "v" };
    expect(() => normalizeConfig({ ...base, epochs: 0 })).toThrow(ConfigError);
    expect(() => normalizeConfig({ ...base, lrStart: 1e-8 })).toThrow(ConfigError);
    expect(() => normalizeConfig({ ...base, imageSize: 0 })).toThrow(ConfigError);
  });
});

describe("train", () => {
  it("produces a full history and saves artifacts", async () => {
    const outDir = path.join(tmp, "run");
    const report = await train({ ...FAST, outDir });
    expect(report.history).toHaveLength(FAST.epochs);
    report.history.forEach((h) => {
      expect(h.trainAccuracy).toBeGreaterThanOrEqual(0);
      expect(h.trainAccuracy).toBeLessThanOrEqual(1);
      expect(h.valAccuracy).toBeGreaterThanOrEqual(0);
      expect(h.valAccuracy).toBeLessThanOrEqual(1);
    });
    expect(report.auc).toBeGreaterThanOrEqual(0);
    expect(report.auc).toBeLessThanOrEqual(1);
    expect(fs.existsSync(path.join(outDir, "SmallCNN", "model.json"))).toBe(true);
    expect(fs.existsSync(path.join(outDir, "SmallCNN_report.json"))).toBe(true);
  });

  it("does not increase training loss on the separable corpus", async () => {
    const report = await train({ ...FAST, epochs: 5 });
    const losses = report.history.map((h) => h.trainLoss);
    expect(losses[losses.length - 1]).toBeLessThanOrEqual(losses[0]);
  });

  it("fails before training when the corpus is missing", async () => {
    await expect(
      train({ ...FAST, manifestPath: path.join(tmp, "nope.csv") }),
    ).rejects.toThrow(ConfigError);
  });

  it("fails before training on an empty train list", async () => {
    const empty = path.join(tmp, "empty.txt");
    fs.writeFileSync(empty, "");
    await expect(train({ ...FAST, trainListPath: empty })).rejects.toThrow(
      /names no files/,
    );
  });

  it("fails before training when backbone weights are unavailable", async () => {
    await expect(
      train({ ...FAST, backbone: "DenseNet201", backboneDir: path.join(tmp, "none") }),
    ).rejects.toThrow(/DenseNet201/);
  });

  it("halves the learning rate on validation-loss plateaus", async () => {
    const report = await train({
      ...FAST,
      epochs: 6,
      lrStart: 1e-3,
      lrPatience: 1,
      seed: 2,
    });
    const lrs = report.history.map((h) => h.learningRate);
    expect(lrs[0]).toBe(1e-3);
    expect(Math.min(...lrs)).toBeGreaterThanOrEqual(1e-7);
    lrs.forEach((lr, i) => {
      if (i > 0) expect(lr).toBeLessThanOrEqual(lrs[i - 1]);
    });
  });

  it("round-trips reports losslessly", async () => {
    const report = await train({ ...FAST, epochs: 2 });
    const file = path.join(tmp, "report.json");
    saveReport(report, file);
    expect(loadReport(file)).toEqual(JSON.parse(JSON.stringify(report)));
  });
});
