export { ConfigError, MetricError } from "./errors";
export { mulberry32, shuffled, uniform } from "./rng";
export { rocCurve, trapezoidalAuc, auc, accuracy, binaryCrossEntropy } from "./roc";
export type { RocPoint } from "./roc";
export {
  MANIFEST_COLUMNS,
  augmentBatch,
  loadDataset,
  readGrayPng,
  readManifest,
  readSplitList,
  writeGrayPng,
} from "./data";
export type { Dataset, ManifestRow } from "./data";
export {
  BACKBONES,
  PRETRAINED_BACKBONES,
  buildSmallCnn,
  fileIoHandler,
  loadModel,
  resolveModel,
  saveModel,
} from "./models";
export type { BackboneName } from "./models";
export {
  TRAIN_DEFAULTS,
  evaluateModel,
  loadReport,
  normalizeConfig,
  saveReport,
  train,
} from "./train";
export type { EpochStats, TrainConfig, TrainConfigInput, TrainRunReport } from "./train";
export { COMPARISON_COLUMNS, compare } from "./compare";
export type { ComparisonResult, ComparisonRow } from "./compare";
export { lineChartSvg } from "./svg";
