/**
 * Tiny decoder-only transformer with pluggable attention masks.
 *
 * Sized for toy experiments: at most 2 layers, small model dim, single
 * attention head. Positions are absolute learned embeddings; an optional
 * source prefix is fed through the same network prefix-LM style, using a
 * reserved positional range so source and target positions never clash.
 *
 * The output projection covers only the scorable vocabulary; the
 * segment-start token has an input embedding row but no output logit.
 */

import * as tf from "@tensorflow/tfjs";

import { gaussian, mulberry32 } from "./rng.js";
import { Vocab, makeVocab } from "./vocab.js";

export interface ModelConfig {
  tokens: string[];
  order: number;
  dModel: number;
  nLayers: number;
  maxPos: number;
  maxCtx: number;
  seed: number;
}

export const CHECKPOINT_VERSION = 1;

export interface Model {
  config: ModelConfig;
  vocab: Vocab;
  params: Map<string, tf.Variable>;
}

export function defaultConfig(tokens: string[], order: number,
                              seed = 1234): ModelConfig {
  return { tokens, order, dModel: 32, nLayers: 2, maxPos: 48, maxCtx: 16, seed };
}

function seededVariable(shape: number[], scale: number,
                        rng: () => number): tf.Variable {
  let size = 1;
  for (const s of shape) size *= s;
  const data = new Float32Array(size);
  for (let i = 0; i < size; i++) data[i] = gaussian(rng) * scale;
  return tf.variable(tf.tensor(data, shape));
}

function constVariable(shape: number[], value: number): tf.Variable {
  return tf.variable(tf.fill(shape, value));
}

export function initModel(config: ModelConfig): Model {
  const vocab = makeVocab(config.tokens);
  const rng = mulberry32(config.seed);
  const d = config.dModel;
  const v = vocab.tokens.length;
  const params = new Map<string, tf.Variable>();

  params.set("tokEmb", seededVariable([v + 1, d], 0.1, rng));
  params.set("posEmb", seededVariable([config.maxPos + config.maxCtx, d], 0.1, rng));
  for (let layer = 0; layer < config.nLayers; layer++) {
    const p = `l${layer}.`;
    for (const w of ["wq", "wk", "wv", "wo"]) {
      params.set(p + w, seededVariable([d, d], 1 / Math.sqrt(d), rng));
    }
    params.set(p + "w1", seededVariable([d, 4 * d], 1 / Math.sqrt(d), rng));
    params.set(p + "b1", constVariable([4 * d], 0));
    params.set(p + "w2", seededVariable([4 * d, d], 1 / Math.sqrt(4 * d), rng));
    params.set(p + "b2", constVariable([d], 0));
    params.set(p + "ln1g", constVariable([d], 1));
    params.set(p + "ln1b", constVariable([d], 0));
    params.set(p + "ln2g", constVariable([d], 1));
    params.set(p + "ln2b", constVariable([d], 0));
  }
  params.set("lnFg", constVariable([config.dModel], 1));
  params.set("lnFb", constVariable([config.dModel], 0));
  params.set("wOut", seededVariable([d, v], 1 / Math.sqrt(d), rng));
  params.set("bOut", constVariable([v], 0));
  return { config, vocab, params };
}

function layerNorm(x: tf.Tensor, g: tf.Tensor, b: tf.Tensor): tf.Tensor {
  const mean = tf.mean(x, -1, true);
  const centered = tf.sub(x, mean);
  const variance = tf.mean(tf.square(centered), -1, true);
  const normed = tf.div(centered, tf.sqrt(tf.add(variance, 1e-5)));
  return tf.add(tf.mul(normed, g), b);
}

/** Apply a [d_in, d_out] weight to the last axis of a [B, L, d_in] tensor. */
function dense(x: tf.Tensor, w: tf.Tensor): tf.Tensor {
  const [b, l, dIn] = x.shape as [number, number, number];
  const flat = tf.matMul(tf.reshape(x, [b * l, dIn]), w as tf.Tensor2D);
  return tf.reshape(flat, [b, l, w.shape[1] as number]);
}

/** Plain causal additive mask: 0 on and below the diagonal, -inf above. */
export function causalAdditiveMask(len: number): tf.Tensor {
  const flat = new Float32Array(len * len);
  for (let i = 0; i < len; i++) {
    for (let j = 0; j < len; j++) flat[i * len + j] = j <= i ? 0 : -Infinity;
  }
  return tf.tensor(flat, [len, len]);
}

/**
 * Run the network. inputIds and positions are [batch, len]; addMask is a
 * [len, len] additive attention mask (0 = allowed, -Infinity = blocked).
 * Returns logits [batch, len, V] over the scorable vocabulary.
 */
export function forward(model: Model, inputIds: number[][],
                        positions: number[][], addMask: tf.Tensor): tf.Tensor {
  const get = (name: string) => {
    const p = model.params.get(name);
    if (!p) throw new Error(`missing parameter ${name}`);
    return p;
  };
  const d = model.config.dModel;
  const ids = tf.tensor(inputIds, undefined, "int32");
  const pos = tf.tensor(positions, undefined, "int32");
  let x = tf.add(tf.gather(get("tokEmb"), ids), tf.gather(get("posEmb"), pos));

  for (let layer = 0; layer < model.config.nLayers; layer++) {
    const p = `l${layer}.`;
    const h = layerNorm(x, get(p + "ln1g"), get(p + "ln1b"));
    const q = dense(h, get(p + "wq"));
    const k = dense(h, get(p + "wk"));
    const v = dense(h, get(p + "wv"));
    const scores = tf.add(tf.div(tf.matMul(q, k, false, true), Math.sqrt(d)),
                          addMask);
    const attn = tf.matMul(tf.softmax(scores), v);
    x = tf.add(x, dense(attn, get(p + "wo")));

    const f = layerNorm(x, get(p + "ln2g"), get(p + "ln2b"));
    const inner = tf.relu(tf.add(dense(f, get(p + "w1")), get(p + "b1")));
    x = tf.add(x, tf.add(dense(inner, get(p + "w2")), get(p + "b2")));
  }
  const final = layerNorm(x, get("lnFg"), get("lnFb"));
  return tf.add(dense(final, get("wOut")), get("bOut"));
}

export interface SpanQuery {
  m: number;
  l: number;
  span: number[];
}

/** Position index of a source-prefix slot in the shared table. */
export function srcPosition(model: Model, j: number): number {
  if (j >= model.config.maxCtx) {
    throw new Error(`source prefix longer than ${model.config.maxCtx}`);
  }
  return model.config.maxPos + j;
}

/**
 * Score span potentials: the log-probability of the span's last token
 * given the earlier span tokens, with the segment-start token at lattice
 * position l and the optional source prefix fully visible before it.
 *
 * Only the span itself enters the input, so tokens elsewhere in any
 * surrounding hypothesis cannot influence the value.
 */
export function scoreSpans(model: Model, queries: SpanQuery[],
                           ctx: number[]): number[] {
  const vocabSize = model.vocab.tokens.length;
  for (const q of queries) {
    if (q.m < 0 || q.m > model.config.order) {
      throw new Error(`span order ${q.m} exceeds model order ${model.config.order}`);
    }
    if (q.span.length !== q.m + 1) {
      throw new Error(`span length ${q.span.length} != m + 1`);
    }
    if (q.l < 0 || q.l + q.m >= model.config.maxPos) {
      throw new Error(`span position ${q.l}..${q.l + q.m} outside 0..${model.config.maxPos - 1}`);
    }
    for (const id of q.span) {
      if (!Number.isInteger(id) || id < 0 || id >= vocabSize) {
        throw new Error(`token id ${id} outside the vocabulary`);
      }
    }
  }
  const out = new Array<number>(queries.length);

  // group queries by input length so each group is one batched forward
  const groups = new Map<number, number[]>();
  queries.forEach((q, idx) => {
    const len = ctx.length + q.m + 1;
    const g = groups.get(len);
    if (g) g.push(idx);
    else groups.set(len, [idx]);
  });

  for (const [len, idxs] of groups) {
    const inputs: number[][] = [];
    const positions: number[][] = [];
    for (const idx of idxs) {
      const q = queries[idx];
      const inp = [...ctx, model.vocab.epsId, ...q.span.slice(0, q.m)];
      const pos = ctx.map((_, j) => srcPosition(model, j));
      for (let j = 0; j <= q.m; j++) pos.push(q.l + j);
      inputs.push(inp);
      positions.push(pos);
    }
    const values = tf.tidy(() => {
      const logits = forward(model, inputs, positions, causalAdditiveMask(len));
      const last = tf.squeeze(
        tf.slice(logits, [0, len - 1, 0], [idxs.length, 1, vocabSize]), [1]);
      return tf.logSoftmax(last);
    });
    const flat = values.dataSync() as Float32Array;
    values.dispose();
    idxs.forEach((idx, row) => {
      out[idx] = flat[row * vocabSize + queries[idx].span[queries[idx].m]];
    });
  }
  return out;
}

/** Full log-softmax row for one prefix, used by normalization checks. */
export function spanDistribution(model: Model, m: number, l: number,
                                 prefix: number[], ctx: number[]): Float32Array {
  const queries = model.vocab.tokens.map((_, x) => ({
    m, l, span: [...prefix, x],
  }));
  return Float32Array.from(scoreSpans(model, queries, ctx));
}

export interface Checkpoint {
  version: number;
  config: ModelConfig;
  params: Record<string, number[]>;
}

export function toCheckpoint(model: Model): Checkpoint {
  const params: Record<string, number[]> = {};
  for (const [name, p] of model.params) {
    params[name] = Array.from(p.dataSync() as Float32Array);
  }
  return { version: CHECKPOINT_VERSION, config: model.config, params };
}

export function fromCheckpoint(ckpt: Checkpoint): Model {
  if (ckpt.version !== CHECKPOINT_VERSION) {
    throw new Error(`unsupported checkpoint version ${ckpt.version}`);
  }
  const model = initModel(ckpt.config);
  for (const [name, p] of model.params) {
    const stored = ckpt.params[name];
    if (!stored || stored.length !== p.size) {
      throw new Error(`checkpoint is missing parameter ${name}`);
    }
    p.assign(tf.tensor(new Float32Array(stored), p.shape));
  }
  return model;
}
