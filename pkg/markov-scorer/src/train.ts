/**
 * Barrier-masked training loop.
 *
 * Each step takes one sentence, samples a fresh barrier offset uniformly
 * from 0..M, replaces the input at every segment start by the
 * segment-start token, and minimizes next-token cross-entropy under the
 * barrier attention mask. Sentences of the form "src\ttgt" condition the
 * target on a fully visible source prefix.
 */

import * as tf from "@tensorflow/tfjs";

import { BarrierMask, buildBarrierMask, segmentStarts } from "./mask.js";
import { Model, ModelConfig, defaultConfig, forward, initModel, srcPosition } from "./model.js";
import { Rng, mulberry32, randInt } from "./rng.js";
import { EOS, Vocab, encode, vocabFromCorpus } from "./vocab.js";

export interface Example {
  src: number[];
  tgt: number[];
}

export interface TrainOptions {
  order: number;
  epochs: number;
  seed: number;
  learningRate?: number;
  config?: ModelConfig;
  log?: (line: string) => void;
}

export interface TrainResult {
  model: Model;
  epochLosses: number[];
  monotoneTrend: boolean;
}

/** Parse corpus lines into examples; targets always end with <eos>. */
export function readCorpus(lines: string[], vocab: Vocab): Example[] {
  const examples: Example[] = [];
  for (const raw of lines) {
    if (!raw.trim()) continue;
    const [first, second] = raw.split("\t");
    const srcText = second === undefined ? "" : first;
    const tgtText = second === undefined ? first : second;
    const tgt = tgtText.trim().split(/\s+/);
    if (tgt[tgt.length - 1] !== EOS) tgt.push(EOS);
    examples.push({
      src: srcText ? encode(vocab, srcText.trim().split(/\s+/)) : [],
      tgt: encode(vocab, tgt),
    });
  }
  if (!examples.length) throw new Error("empty corpus");
  return examples;
}

export function corpusVocab(lines: string[]): Vocab {
  const sentences = lines
    .filter((l) => l.trim())
    .flatMap((l) => l.split("\t"))
    .map((part) => part.trim().split(/\s+/));
  return vocabFromCorpus(sentences);
}

/** Additive mask for [src..., target...]: barrier rules inside the
 * target, full visibility of the source, causal source. */
function combinedMask(srcLen: number, tgtMask: BarrierMask): tf.Tensor {
  const total = srcLen + tgtMask.length;
  const flat = new Float32Array(total * total).fill(-Infinity);
  for (let i = 0; i < total; i++) {
    for (let j = 0; j < total; j++) {
      const ok =
        i < srcLen
          ? j <= i
          : j < srcLen || tgtMask.allow[i - srcLen][j - srcLen];
      if (ok) flat[i * total + j] = 0;
    }
  }
  return tf.tensor(flat, [total, total]);
}

function buildInputs(model: Model, example: Example, offset: number) {
  const n = example.tgt.length;
  if (n > model.config.maxPos) {
    throw new Error(`sentence length ${n} exceeds maxPos ${model.config.maxPos}`);
  }
  const mask = buildBarrierMask(n, model.config.order, offset);
  const starts = new Set(segmentStarts(mask));
  const inputs = example.src.slice();
  const positions = example.src.map((_, j) => srcPosition(model, j));
  for (let i = 0; i < n; i++) {
    inputs.push(starts.has(i) ? model.vocab.epsId : example.tgt[i - 1]);
    positions.push(i);
  }
  return { inputs, positions, mask };
}

/** Mean cross-entropy of the target under one barrier offset. */
function sentenceLoss(model: Model, example: Example, offset: number): tf.Tensor {
  const { inputs, positions, mask } = buildInputs(model, example, offset);
  const srcLen = example.src.length;
  const n = example.tgt.length;
  const vocabSize = model.vocab.tokens.length;
  const logits = forward(model, [inputs], [positions], combinedMask(srcLen, mask));
  const tgtLogits = tf.reshape(
    tf.slice(logits, [0, srcLen, 0], [1, n, vocabSize]), [n, vocabSize]);
  const logProbs = tf.logSoftmax(tgtLogits);
  const labels = tf.oneHot(tf.tensor1d(example.tgt, "int32"), vocabSize);
  return tf.neg(tf.mean(tf.sum(tf.mul(logProbs, labels), -1)));
}

export function evalLoss(model: Model, example: Example, offset: number): number {
  return tf.tidy(() => sentenceLoss(model, example, offset)).dataSync()[0];
}

/** Mean loss over all barrier offsets, the trained objective exactly. */
export function meanLossAllOffsets(model: Model, example: Example): number {
  let total = 0;
  for (let o = 0; o <= model.config.order; o++) {
    total += evalLoss(model, example, o);
  }
  return total / (model.config.order + 1);
}

export function trainStep(model: Model, optimizer: tf.Optimizer,
                          example: Example, offset: number): number {
  const varList = [...model.params.values()];
  const { value, grads } = tf.variableGrads(
    () => sentenceLoss(model, example, offset) as tf.Scalar, varList);
  optimizer.applyGradients(grads);
  const loss = value.dataSync()[0];
  value.dispose();
  for (const g of Object.values(grads)) g.dispose();
  return loss;
}

export function train(lines: string[], options: TrainOptions): TrainResult {
  if (options.order < 0) throw new Error("order must be >= 0");
  const vocab = corpusVocab(lines);
  const config = options.config ??
    defaultConfig(vocab.tokens, options.order, options.seed);
  const model = initModel(config);
  const examples = readCorpus(lines, model.vocab);
  const optimizer = tf.train.adam(options.learningRate ?? 0.01);
  const rng: Rng = mulberry32(options.seed ^ 0x9e3779b9);
  const log = options.log ?? (() => {});

  const epochLosses: number[] = [];
  for (let epoch = 0; epoch < options.epochs; epoch++) {
    let total = 0;
    for (const example of examples) {
      const offset = randInt(rng, config.order + 1);
      total += trainStep(model, optimizer, example, offset);
    }
    const mean = total / examples.length;
    epochLosses.push(mean);
    log(`epoch ${epoch + 1}/${options.epochs} loss ${mean.toFixed(4)}`);
  }
  const monotoneTrend =
    epochLosses.length < 2 ||
    epochLosses[epochLosses.length - 1] <= epochLosses[0];
  log(`loss trend ${monotoneTrend ? "improving" : "NOT improving"}`);
  optimizer.dispose();
  return { model, epochLosses, monotoneTrend };
}
