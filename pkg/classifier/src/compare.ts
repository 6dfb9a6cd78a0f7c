/** Architecture comparison: sequential runs, one table row per backbone. */

import * as fs from "fs";
import * as path from "path";
import Papa from "papaparse";

import { lineChartSvg } from "./svg";
import { train, TrainConfigInput, TrainRunReport } from "./train";

export const COMPARISON_COLUMNS = [
  "backbone",
  "accuracy",
  "loss",
  "auc",
  "overfit_gap",
  "status",
  "error",
] as const;

export interface ComparisonRow {
  backbone: string;
  accuracy: number | "";
  loss: number | "";
  auc: number | "";
  overfit_gap: number | "";
  status: "ok" | "error";
  error: string;
}

export interface ComparisonResult {
  rows: ComparisonRow[];
  reports: (TrainRunReport | null)[];
  csvPath: string;
}

function curveFiles(report: TrainRunReport, outDir: string): void {
  const epochs = report.history.map((h) => h.epoch);
  const acc = lineChartSvg(`${report.backbone} accuracy`, `epoch (0..${epochs.length - 1})`, [
    { label: "train", values: report.history.map((h) => h.trainAccuracy), color: "#1965b0" },
    { label: "validation", values: report.history.map((h) => h.valAccuracy), color: "#dc050c" },
  ]);
  const loss = lineChartSvg(`${report.backbone} loss`, `epoch (0..${epochs.length - 1})`, [
    { label: "train", values: report.history.map((h) => h.trainLoss), color: "#1965b0" },
    { label: "validation", values: report.history.map((h) => h.valLoss), color: "#dc050c" },
  ]);
  fs.writeFileSync(path.join(outDir, `${report.backbone}_accuracy.svg`), acc);
  fs.writeFileSync(path.join(outDir, `${report.backbone}_loss.svg`), loss);
}

/**
 * Train every configuration in sequence and emit the comparison table.
 * A failed run becomes a row with status "error"; the table is written
 * either way.
 */
export async function compare(
  configs: TrainConfigInput[],
  outDir: string,
): Promise<ComparisonResult> {
  if (configs.length === 0) {
    throw new Error("compare needs at least one configuration");
  }
  fs.mkdirSync(outDir, { recursive: true });
  const rows: ComparisonRow[] = [];
  const reports: (TrainRunReport | null)[] = [];
  for (const config of configs) {
    const backbone = config.backbone ?? "SmallCNN";
    try {
      const report = await train({ ...config, outDir: config.outDir ?? outDir });
      const last = report.history[report.history.length - 1];
      rows.push({
        backbone: report.backbone,
        accuracy: report.finalAccuracy,
        loss: report.finalLoss,
        auc: report.auc,
        overfit_gap: last.trainAccuracy - last.valAccuracy,
        status: "ok",
        error: "",
      });
      reports.push(report);
      curveFiles(report, outDir);
    } catch (err) {
      rows.push({
        backbone,
        accuracy: "",
        loss: "",
        auc: "",
        overfit_gap: "",
        status: "error",
        error: err instanceof Error ? err.message : String(err),
      });
      reports.push(null);
    }
  }
  const csvPath = path.join(outDir, "comparison.csv");
  fs.writeFileSync(
    csvPath,
    Papa.unparse(
      { fields: [...COMPARISON_COLUMNS], data: rows.map((r) => COMPARISON_COLUMNS.map((c) => r[c])) },
      { newline: "\n" },
    ) + "\n",
  );
  return { rows, reports, csvPath };
}
