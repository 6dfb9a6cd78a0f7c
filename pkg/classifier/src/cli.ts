/** CLI: train one backbone, evaluate a saved model, or compare several. */

import * as fs from "fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadDataset } from "./data";
import { BackboneName, BACKBONES, loadModel } from "./models";
import { compare } from "./compare";
import { train, evaluateModel, TrainConfigInput } from "./train";

function commonDataOptions(y: yargs.Argv) {
  return y
    .option("manifest", { type: "string", demandOption: true, describe: "corpus labels.csv" })
    .option("train-list", { type: "string", demandOption: true })
    .option("val-list", { type: "string", demandOption: true })
    .option("image-size", { type: "number", default: 224 })
    .option("epochs", { type: "number", default: 10 })
    .option("batch-size", { type: "number", default: 16 })
    .option("seed", { type: "number", default: 0 })
    .option("backbone-dir", { type: "string", default: "backbones" })
    .option("out", { type: "string", default: "runs" });
}

function configFromArgs(argv: Record<string, unknown>, backbone: string): TrainConfigInput {
  return {
    backbone: backbone as BackboneName,
    manifestPath: String(argv.manifest),
    trainListPath: String(argv["train-list"]),
    valListPath: String(argv["val-list"]),
    imageSize: Number(argv["image-size"]),
    epochs: Number(argv.epochs),
    batchSize: Number(argv["batch-size"]),
    seed: Number(argv.seed),
    backboneDir: String(argv["backbone-dir"]),
    outDir: String(argv.out),
  };
}

export async function main(args: string[]): Promise<number> {
  const parser = yargs(args)
    .scriptName("bms-classifier")
    .command("train", "fine-tune one backbone", (y) =>
      commonDataOptions(y).option("backbone", {
        type: "string",
        default: "SmallCNN",
        choices: [...BACKBONES],
      }),
    )
    .command("evaluate", "evaluate a saved model on a split", (y) =>
      y
        .option("model", { type: "string", demandOption: true, describe: "saved model dir" })
        .option("manifest", { type: "string", demandOption: true })
        .option("list", { type: "string", demandOption: true })
        .option("image-size", { type: "number", default: 224 }),
    )
    .command("compare", "train several backbones and tabulate", (y) =>
      commonDataOptions(y).option("backbones", {
        type: "string",
        default: "SmallCNN",
        describe: "comma-separated backbone names",
      }),
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    });

  const argv = await parser.parse();
  if (argv.help || argv.version) return 0;
  const command = String(argv._[0]);
  try {
    if (command === "train") {
      const report = await train(configFromArgs(argv, String(argv.backbone)));
      console.log(
        `${report.backbone}: accuracy=${report.finalAccuracy.toFixed(4)} ` +
        `loss=${report.finalLoss.toFixed(4)} auc=${report.auc.toFixed(4)} ` +
        `(${report.wallTimeS.toFixed(1)} s)`,
      );
      return 0;
    }
    if (command === "evaluate") {
      const model = await loadModel(String(argv.model));
      const dataset = loadDataset(
        String(argv.manifest), String(argv.list), Number(argv["image-size"]),
      );
      const metrics = evaluateModel(model, dataset);
      dataset.xs.dispose();
      console.log(JSON.stringify({
        accuracy: metrics.accuracy,
        loss: metrics.loss,
        auc: metrics.auc,
        roc_points: metrics.roc.length,
      }));
      return 0;
    }
    if (command === "compare") {
      const names = String(argv.backbones).split(",").map((s) => s.trim());
      const configs = names.map((name) => configFromArgs(argv, name));
      const result = await compare(configs, String(argv.out));
      console.log(fs.readFileSync(result.csvPath, "utf-8"));
      return 0;
    }
    console.error(`unknown command: ${command}`);
    return 2;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
