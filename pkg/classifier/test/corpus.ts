/** Synthetic corpora for tests, written in the toolkit's corpus schema. */

import * as fs from "fs";
import * as path from "path";
import Papa from "papaparse";

import { MANIFEST_COLUMNS, writeGrayPng } from "../src/data";
import { mulberry32 } from "../src/rng";

export interface CorpusPaths {
  manifestPath: string;
  trainListPath: string;
  valListPath: string;
}

/**
 * Trivially separable two-class corpus: tumor images are bright, healthy
 * images are dark, both with pixel noise.
 */
export function makeSeparableCorpus(
  dir: string,
  opts: { nTrain?: number; nVal?: number; size?: number; seed?: number } = {},
): CorpusPaths {
  const { nTrain = 60, nVal = 20, size = 32, seed = 1234 } = opts;
  fs.mkdirSync(dir, { recursive: true });
  const rand = mulberry32(seed);
  const rows: (string | number)[][] = [];
  const names: string[] = [];

  for (let i = 0; i < nTrain + nVal; i++) {
    const tumor = i % 2;
    const base = tumor ? 185 : 60;
    const bytes = new Uint8Array(size * size);
    for (let p = 0; p < bytes.length; p++) {
      const noisy = base + (rand() - 0.5) * 80;
      bytes[p] = Math.max(0, Math.min(255, Math.round(noisy)));
    }
    const name = `img${String(i).padStart(4, "0")}_das.png`;
    writeGrayPng(path.join(dir, name), size, size, bytes);
    names.push(name);
    rows.push([
      name,
      "das",
      tumor,
      tumor ? 20 : "",
      tumor ? 0.01 : "",
      tumor ? -0.02 : "",
      `ph${i}`,
    ]);
  }

  const manifestPath = path.join(dir, "labels.csv");
  fs.writeFileSync(
    manifestPath,
    Papa.unparse({ fields: [...MANIFEST_COLUMNS], data: rows }, { newline: "\n" }) + "\n",
  );
  const trainListPath = path.join(dir, "train.txt");
  const valListPath = path.join(dir, "val.txt");
  fs.writeFileSync(trainListPath, names.slice(0, nTrain).join("\n") + "\n");
  fs.writeFileSync(valListPath, names.slice(nTrain).join("\n") + "\n");
  return { manifestPath, trainListPath, valListPath };
}
