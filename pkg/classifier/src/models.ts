/** Backbone registry: pretrained architectures plus a from-scratch CNN. */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { ConfigError } from "./errors";

export const PRETRAINED_BACKBONES = [
  "DenseNet201",
  "ResNet50",
  "InceptionV3",
  "InceptionResNetV2",
  "MobileNetV2",
  "NASNetMobile",
  "NASNetLarge",
] as const;

export const BACKBONES = [...PRETRAINED_BACKBONES, "SmallCNN"] as const;

export type BackboneName = (typeof BACKBONES)[number];

/** File-system IO handler (save + load) for model artifacts. */
export function fileIoHandler(dir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts): Promise<tf.io.SaveResult> {
      fs.mkdirSync(dir, { recursive: true });
      const weightsName = "weights.bin";
      const manifest = [
        { paths: [weightsName], weights: artifacts.weightSpecs ?? [] },
      ];
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          format: artifacts.format,
          generatedBy: artifacts.generatedBy,
          convertedBy: artifacts.convertedBy ?? null,
          weightsManifest: manifest,
        }),
      );
      if (artifacts.weightData) {
        const data = artifacts.weightData as ArrayBuffer;
        fs.writeFileSync(path.join(dir, weightsName), Buffer.from(data));
      }
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: "JSON",
        },
      };
    },
    async load(): Promise<tf.io.ModelArtifacts> {
      const modelPath = path.join(dir, "model.json");
      const parsed = JSON.parse(fs.readFileSync(modelPath, "utf-8"));
      const weightSpecs: tf.io.WeightsManifestEntry[] = [];
      const buffers: Buffer[] = [];
      for (const group of parsed.weightsManifest ?? []) {
        weightSpecs.push(...group.weights);
        for (const rel of group.paths) {
          buffers.push(fs.readFileSync(path.join(dir, rel)));
        }
      }
      const joined = Buffer.concat(buffers);
      return {
        modelTopology: parsed.modelTopology,
        format: parsed.format,
        generatedBy: parsed.generatedBy,
        weightSpecs,
        weightData: joined.buffer.slice(
          joined.byteOffset,
          joined.byteOffset + joined.byteLength,
        ),
      };
    },
  };
}

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  await model.save(fileIoHandler(dir));
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  if (!fs.existsSync(path.join(dir, "model.json"))) {
    throw new ConfigError(`model artifact not found: ${path.join(dir, "model.json")}`);
  }
  return tf.loadLayersModel(fileIoHandler(dir));
}

/** Compact CNN trained from scratch; needs no downloaded weights. */
export function buildSmallCnn(imageSize: number, seed: number): tf.LayersModel {
  const init = (offset: number) => tf.initializers.glorotUniform({ seed: seed + offset });
  const model = tf.sequential({
    layers: [
      tf.layers.conv2d({
        inputShape: [imageSize, imageSize, 1],
        filters: 8,
        kernelSize: 3,
        activation: "relu",
        kernelInitializer: init(1),
      }),
      tf.layers.maxPooling2d({ poolSize: 2 }),
      tf.layers.conv2d({
        filters: 16,
        kernelSize: 3,
        activation: "relu",
        kernelInitializer: init(2),
      }),
      tf.layers.maxPooling2d({ poolSize: 2 }),
      tf.layers.conv2d({
        filters: 32,
        kernelSize: 3,
        activation: "relu",
        kernelInitializer: init(3),
      }),
      tf.layers.globalAveragePooling2d({}),
      tf.layers.dense({
        units: 1,
        activation: "sigmoid",
        kernelInitializer: init(4),
      }),
    ],
  });
  return model;
}

/**
 * Resolve a backbone into a trainable binary classifier.
 *
 * Pretrained backbones are loaded from `<backboneDir>/<name>` (a saved
 * LayersModel with ImageNet weights, provided out of band), frozen
 * unless fineTuneAll, and topped with global average pooling plus a
 * single sigmoid unit. Missing weights fail here, before any training.
 */
export async function resolveModel(
  backbone: BackboneName,
  imageSize: number,
  seed: number,
  backboneDir: string,
  fineTuneAll = false,
): Promise<tf.LayersModel> {
  if (backbone === "SmallCNN") {
    return buildSmallCnn(imageSize, seed);
  }
  if (!(PRETRAINED_BACKBONES as readonly string[]).includes(backbone)) {
    throw new ConfigError(`unknown backbone '${backbone}'`);
  }
  const dir = path.join(backboneDir, backbone);
  if (!fs.existsSync(path.join(dir, "model.json"))) {
    throw new ConfigError(
      `pretrained weights for ${backbone} not found (expected ${dir}/model.json); ` +
      `provide the saved model or use SmallCNN`,
    );
  }
  const base = await tf.loadLayersModel(fileIoHandler(dir));
  base.trainable = fineTuneAll;
  const input = tf.input({ shape: [imageSize, imageSize, 1] });
  // pretrained stems expect 3 channels; replicate the grayscale plane
  const rgb = tf.layers
    .concatenate()
    .apply([input, input, input]) as tf.SymbolicTensor;
  let features = base.apply(rgb) as tf.SymbolicTensor;
  if (features.shape.length === 4) {
    features = tf.layers
      .globalAveragePooling2d({})
      .apply(features) as tf.SymbolicTensor;
  }
  const output = tf.layers
    .dense({
      units: 1,
      activation: "sigmoid",
      kernelInitializer: tf.initializers.glorotUniform({ seed }),
    })
    .apply(features) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: output });
}
