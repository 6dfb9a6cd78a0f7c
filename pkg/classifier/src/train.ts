/** Training loop: adaptive learning rate, per-epoch history, reports. */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { Dataset, augmentBatch, loadDataset } from "./data";
import { ConfigError } from "./errors";
import { BackboneName, resolveModel, saveModel } from "./models";
import { mulberry32, shuffled } from "./rng";
import { accuracy, auc, binaryCrossEntropy, rocCurve, RocPoint } from "./roc";

export interface TrainConfig {
  backbone: BackboneName;
  manifestPath: string;
  trainListPath: string;
  valListPath: string;
  imageSize: number;
  epochs: number;
  batchSize: number;
  lrStart: number;
  lrFloor: number;
  lrFactor: number;
  lrPatience: number;
  rotationDeg: number;
  zoomFrac: number;
  seed: number;
  backboneDir: string;
  fineTuneAll: boolean;
  outDir: string | null;
}

export const TRAIN_DEFAULTS = {
  backbone: "SmallCNN" as BackboneName,
  imageSize: 224,
  epochs: 10, // protocol sweeps 10 to 15
  batchSize: 16,
  lrStart: 4e-5,
  lrFloor: 1e-7,
  lrFactor: 0.5,
  lrPatience: 2,
  rotationDeg: 20,
  zoomFrac: 0.1,
  seed: 0,
  backboneDir: "backbones",
  fineTuneAll: false,
  outDir: null as string | null,
};

export type TrainConfigInput = Partial<TrainConfig> &
  Pick<TrainConfig, "manifestPath" | "trainListPath" | "valListPath">;

export function normalizeConfig(input: TrainConfigInput): TrainConfig {
  const config: TrainConfig = { ...TRAIN_DEFAULTS, ...input };
  if (config.epochs < 1) throw new ConfigError("epochs must be >= 1");
  if (!(config.lrStart > config.lrFloor && config.lrFloor > 0)) {
    throw new ConfigError("need lrStart > lrFloor > 0");
  }
  if (config.imageSize < 1) throw new ConfigError("imageSize must be positive");
  if (config.batchSize < 1) throw new ConfigError("batchSize must be >= 1");
  return config;
}

export interface EpochStats {
  epoch: number;
  trainLoss: number;
  trainAccuracy: number;
  valLoss: number;
  valAccuracy: number;
  learningRate: number;
}

export interface TrainRunReport {
  backbone: BackboneName;
  config: Omit<TrainConfig, "outDir">;
  history: EpochStats[];
  finalAccuracy: number;
  finalLoss: number;
  auc: number;
  roc: RocPoint[];
  wallTimeS: number;
  modelDir: string | null;
}

function scoresOf(model: tf.LayersModel, xs: tf.Tensor4D, batchSize: number): number[] {
  return tf.tidy(() => {
    const out = model.predict(xs, { batchSize }) as tf.Tensor;
    return Array.from(out.dataSync());
  });
}

/** Accuracy/loss/AUC/ROC of a model over a dataset. */
export function evaluateModel(
  model: tf.LayersModel,
  dataset: Dataset,
  batchSize = 32,
): { accuracy: number; loss: number; auc: number; roc: RocPoint[]; scores: number[] } {
  const scores = scoresOf(model, dataset.xs, batchSize);
  const points = rocCurve(dataset.labels, scores);
  return {
    accuracy: accuracy(dataset.labels, scores),
    loss: binaryCrossEntropy(dataset.labels, scores),
    auc: auc(dataset.labels, scores),
    roc: points,
    scores,
  };
}

/**
 * Fine-tune one backbone on the corpus and return the full report.
 *
 * The learning rate starts at lrStart and halves (reduce-on-plateau,
 * patience lrPatience) down to lrFloor whenever validation loss stops
 * improving. Data order and augmentation draws are seeded.
 */
export async function train(input: TrainConfigInput): Promise<TrainRunReport> {
  const config = normalizeConfig(input);
  const started = Date.now();

  const trainSet = loadDataset(config.manifestPath, config.trainListPath, config.imageSize);
  const valSet = loadDataset(config.manifestPath, config.valListPath, config.imageSize);
  try {
    const model = await resolveModel(
      config.backbone, config.imageSize, config.seed,
      config.backboneDir, config.fineTuneAll,
    );
    const optimizer = tf.train.adam(config.lrStart);
    model.compile({ optimizer, loss: "binaryCrossentropy", metrics: ["accuracy"] });

    const rand = mulberry32(config.seed >>> 0);
    const history: EpochStats[] = [];
    let lr = config.lrStart;
    let bestValLoss = Infinity;
    let sinceImprovement = 0;

    const indices = trainSet.labels.map((_, i) => i);
    const yTrain = tf.tensor1d(trainSet.labels, "float32");

    for (let epoch = 0; epoch < config.epochs; epoch++) {
      const order = shuffled(indices, rand);
      const stats = await tf.tidy(() => {
        const xsOrdered = tf.gather(trainSet.xs, order) as tf.Tensor4D;
        const augmented =
          config.rotationDeg > 0 || config.zoomFrac > 0
            ? augmentBatch(xsOrdered, rand, config.rotationDeg, config.zoomFrac)
            : xsOrdered;
        const ysOrdered = tf.gather(yTrain, order);
        return { xs: augmented.clone(), ys: ysOrdered.clone() };
      });

      (optimizer as tf.AdamOptimizer & { learningRate: number }).learningRate = lr;
      const fit = await model.fit(stats.xs, stats.ys, {
        epochs: 1,
        batchSize: config.batchSize,
        shuffle: false,
        verbose: 0,
      });
      stats.xs.dispose();
      stats.ys.dispose();

      const val = evaluateModel(model, valSet, config.batchSize);
      history.push({
        epoch,
        trainLoss: Number(fit.history.loss[0]),
        trainAccuracy: Number((fit.history.acc ?? fit.history.accuracy)[0]),
        valLoss: val.loss,
        valAccuracy: val.accuracy,
        learningRate: lr,
      });

      // reduce-on-plateau on validation loss
      if (val.loss < bestValLoss - 1e-12) {
        bestValLoss = val.loss;
        sinceImprovement = 0;
      } else {
        sinceImprovement++;
        if (sinceImprovement >= config.lrPatience) {
          lr = Math.max(config.lrFloor, lr * config.lrFactor);
          sinceImprovement = 0;
        }
      }
    }
    yTrain.dispose();

    const final = evaluateModel(model, valSet, config.batchSize);
    let modelDir: string | null = null;
    if (config.outDir) {
      modelDir = path.join(config.outDir, config.backbone);
      await saveModel(model, modelDir);
    }
    const { outDir, ...configEcho } = config;
    const report: TrainRunReport = {
      backbone: config.backbone,
      config: configEcho,
      history,
      finalAccuracy: final.accuracy,
      finalLoss: final.loss,
      auc: final.auc,
      roc: final.roc,
      wallTimeS: (Date.now() - started) / 1000,
      modelDir,
    };
    if (config.outDir) {
      fs.mkdirSync(config.outDir, { recursive: true });
      saveReport(report, path.join(config.outDir, `${config.backbone}_report.json`));
    }
    return report;
  } finally {
    trainSet.xs.dispose();
    valSet.xs.dispose();
  }
}

export function saveReport(report: TrainRunReport, file: string): void {
  fs.writeFileSync(file, JSON.stringify(report, null, 2));
}

export function loadReport(file: string): TrainRunReport {
  return JSON.parse(fs.readFileSync(file, "utf-8")) as TrainRunReport;
}
