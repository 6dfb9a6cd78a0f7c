/** Corpus loading: the labels manifest, split lists, and grayscale PNGs. */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import Papa from "papaparse";
import { PNG } from "pngjs";

import { ConfigError } from "./errors";
import { Rand, uniform } from "./rng";

export const MANIFEST_COLUMNS = [
  "filename",
  "algorithm",
  "tumor_present",
  "diameter_mm",
  "x_m",
  "y_m",
  "phantom_id",
] as const;

export interface ManifestRow {
  filename: string;
  algorithm: string;
  tumor_present: number;
  diameter_mm: number | null;
  x_m: number | null;
  y_m: number | null;
  phantom_id: string;
}

export interface Dataset {
  xs: tf.Tensor4D; // [n, size, size, 1], values in [0, 1]
  labels: number[];
  files: string[];
}

/** Parse the corpus labels CSV written by the reconstruction toolkit. */
export function readManifest(csvPath: string): ManifestRow[] {
  if (!fs.existsSync(csvPath)) {
    throw new ConfigError(`corpus manifest not found: ${csvPath}`);
  }
  const parsed = Papa.parse<Record<string, string>>(fs.readFileSync(csvPath, "utf-8").trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new ConfigError(`manifest parse error: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const column of MANIFEST_COLUMNS) {
    if (!fields.includes(column)) {
      throw new ConfigError(`manifest ${csvPath} lacks column '${column}'`);
    }
  }
  return parsed.data.map((row) => ({
    filename: row.filename,
    algorithm: row.algorithm,
    tumor_present: Number(row.tumor_present),
    diameter_mm: row.diameter_mm === "" ? null : Number(row.diameter_mm),
    x_m: row.x_m === "" ? null : Number(row.x_m),
    y_m: row.y_m === "" ? null : Number(row.y_m),
    phantom_id: row.phantom_id,
  }));
}

/** Read a split list (one PNG filename per line). */
export function readSplitList(listPath: string): string[] {
  if (!fs.existsSync(listPath)) {
    throw new ConfigError(`split list not found: ${listPath}`);
  }
  return fs
    .readFileSync(listPath, "utf-8")
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}

/** Decode an 8-bit PNG to a grayscale [0, 1] float array (red channel). */
export function readGrayPng(pngPath: string): { width: number; height: number; pixels: Float32Array } {
  const png = PNG.sync.read(fs.readFileSync(pngPath));
  const pixels = new Float32Array(png.width * png.height);
  for (let i = 0; i < pixels.length; i++) {
    pixels[i] = png.data[4 * i] / 255;
  }
  return { width: png.width, height: png.height, pixels };
}

/** Write grayscale bytes as a PNG (used by tests and tooling). */
export function writeGrayPng(pngPath: string, width: number, height: number, bytes: Uint8Array): void {
  const png = new PNG({ width, height });
  for (let i = 0; i < width * height; i++) {
    png.data[4 * i] = bytes[i];
    png.data[4 * i + 1] = bytes[i];
    png.data[4 * i + 2] = bytes[i];
    png.data[4 * i + 3] = 255;
  }
  fs.writeFileSync(pngPath, PNG.sync.write(png));
}

/**
 * Load the images named by a split list, resized to the model input
 * size, with labels taken from the manifest.
 */
export function loadDataset(
  manifestPath: string,
  listPath: string,
  imageSize: number,
): Dataset {
  const rows = readManifest(manifestPath);
  const byName = new Map(rows.map((row) => [row.filename, row]));
  const files = readSplitList(listPath);
  if (files.length === 0) {
    throw new ConfigError(`split list ${listPath} names no files`);
  }
  const dir = path.dirname(manifestPath);
  const labels: number[] = [];
  const images: tf.Tensor3D[] = [];
  try {
    for (const name of files) {
      const row = byName.get(name);
      if (!row) {
        throw new ConfigError(`split entry '${name}' missing from manifest`);
      }
      const pngPath = path.join(dir, name);
      if (!fs.existsSync(pngPath)) {
        throw new ConfigError(`corpus image not found: ${pngPath}`);
      }
      const { width, height, pixels } = readGrayPng(pngPath);
      images.push(tf.tensor3d(pixels, [height, width, 1]));
      labels.push(row.tumor_present >= 1 ? 1 : 0);
    }
    const xs = tf.tidy(() => {
      const resized = images.map((img) =>
        tf.image.resizeBilinear(img, [imageSize, imageSize]),
      );
      return tf.stack(resized) as tf.Tensor4D;
    });
    return { xs, labels, files };
  } finally {
    images.forEach((img) => img.dispose());
  }
}

/**
 * Random rotations and zooms, seeded. Rotation uses a handful of angle
 * groups per epoch (one rotate op per group); zoom is a per-image
 * centered crop-and-resize.
 */
export function augmentBatch(
  xs: tf.Tensor4D,
  rand: Rand,
  rotationDeg: number,
  zoomFrac: number,
): tf.Tensor4D {
  return tf.tidy(() => {
    const n = xs.shape[0];
    const size = xs.shape[1];
    let out = xs;

    if (rotationDeg > 0) {
      const groups = 8;
      const assignment = Array.from({ length: n }, () => Math.floor(rand() * groups));
      const angles = Array.from({ length: groups }, () =>
        (uniform(rand, -rotationDeg, rotationDeg) * Math.PI) / 180,
      );
      const pieces: tf.Tensor4D[] = [];
      const order: number[] = [];
      for (let g = 0; g < groups; g++) {
        const idx = assignment.flatMap((a, i) => (a === g ? [i] : []));
        if (idx.length === 0) continue;
        const subset = tf.gather(out, idx) as tf.Tensor4D;
        pieces.push(tf.image.rotateWithOffset(subset, angles[g]));
        order.push(...idx);
      }
      const stacked = tf.concat(pieces) as tf.Tensor4D;
      // undo the grouping permutation
      const inverse = new Array<number>(n);
      order.forEach((original, position) => {
        inverse[original] = position;
      });
      out = tf.gather(stacked, inverse) as tf.Tensor4D;
    }

    if (zoomFrac > 0) {
      const boxes: number[][] = [];
      for (let i = 0; i < n; i++) {
        const zoom = uniform(rand, -zoomFrac, zoomFrac);
        const margin = zoom >= 0 ? zoom / 2 : 0;
        const lo = margin;
        const hi = 1 - margin;
        if (zoom >= 0) {
          boxes.push([lo, lo, hi, hi]); // zoom in: central crop
        } else {
          const pad = -zoom / 2;
          boxes.push([-pad, -pad, 1 + pad, 1 + pad]); // zoom out
        }
      }
      out = tf.image.cropAndResize(
        out,
        tf.tensor2d(boxes),
        Array.from({ length: n }, (_, i) => i),
        [size, size],
      ) as tf.Tensor4D;
    }
    return out.clone();
  });
}
