import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { afterAll, describe, expect, it } from "vitest";

import { ConfigError } from "../src/errors";
import { buildSmallCnn, loadModel, resolveModel, saveModel } from "../src/models";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "bmsclf-models-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

describe("SmallCNN", () => {
  it("builds a sigmoid binary head over any input size", () => {
    const model = buildSmallCnn(32, 0);
    const out = model.predict(tf.zeros([3, 32, 32, 1])) as tf.Tensor;
    expect(out.shape).toEqual([3, 1]);
    const values = Array.from(out.dataSync());
    values.forEach((v) => {
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThanOrEqual(1);
    });
  });

  it("initializes deterministically under a seed", () => {
    const a = buildSmallCnn(16, 11).getWeights().map((w) => Array.from(w.dataSync()));
    const b = buildSmallCnn(16, 11).getWeights().map((w) => Array.from(w.dataSync()));
    const c = buildSmallCnn(16, 12).getWeights().map((w) => Array.from(w.dataSync()));
    expect(a).toEqual(b);
    expect(a).not.toEqual(c);
  });
});

describe("resolveModel", () => {
  it("fails fast when pretrained weights are absent", async () => {
    await expect(
      resolveModel("NASNetLarge", 32, 0, path.join(tmp, "none")),
    ).rejects.toThrow(ConfigError);
    await expect(
      resolveModel("NASNetLarge", 32, 0, path.join(tmp, "none")),
    ).rejects.toThrow(/NASNetLarge/);
  });

  it("rejects unknown backbone names", async () => {
    await expect(
      resolveModel("LeNet" as never, 32, 0, tmp),
    ).rejects.toThrow(/unknown backbone/);
  });

  it("wraps a locally provided backbone with a frozen sigmoid head", async () => {
    // stand-in "pretrained" feature extractor saved to disk
    const stem = tf.sequential({
      layers: [
        tf.layers.conv2d({
          inputShape: [32, 32, 3],
          filters: 4,
          kernelSize: 3,
          activation: "relu",
        }),
      ],
    });
    const dir = path.join(tmp, "backbones", "MobileNetV2");
    await saveModel(stem, dir);

    const model = await resolveModel("MobileNetV2", 32, 0, path.join(tmp, "backbones"));
    const out = model.predict(tf.zeros([2, 32, 32, 1])) as tf.Tensor;
    expect(out.shape).toEqual([2, 1]);
    // frozen stem + trainable head
    const trainable = model.trainableWeights.length;
    expect(trainable).toBe(2); // dense kernel + bias
  });
});

describe("model save/load round trip", () => {
  it("reproduces predictions exactly", async () => {
    const model = buildSmallCnn(16, 5);
    const dir = path.join(tmp, "saved");
    await saveModel(model, dir);
    const loaded = await loadModel(dir);
    const x = tf.randomUniform([4, 16, 16, 1], 0, 1, "float32", 42);
    const a = Array.from((model.predict(x) as tf.Tensor).dataSync());
    const b = Array.from((loaded.predict(x) as tf.Tensor).dataSync());
    expect(a).toEqual(b);
  });

  it("errors on a missing artifact", async () => {
    await expect(loadModel(path.join(tmp, "ghost"))).rejects.toThrow(ConfigError);
  });
});
