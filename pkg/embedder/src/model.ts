/**
 * A small BERT-style masked-language-model encoder with deterministically
 * generated weights.
 *
 * Real pretrained checkpoints cannot be fetched in a hermetic environment,
 * and nothing downstream depends on the semantic quality of the vectors —
 * only on shape, masking behavior, and run-to-run determinism. So a model is
 * defined entirely by its config.json (dimensions plus a weight seed) and
 * vocab.txt; the full encoder stack is realized from a seeded PRNG at load
 * time. Same files, same weights, same outputs — on any machine.
 *
 * All arithmetic runs in 64-bit floats; callers round to 32-bit at the
 * serialization boundary.
 */

import { readFileSync, existsSync } from "node:fs";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { WordPieceTokenizer, parseVocab } from "./tokenizer.js";

export interface ModelConfig {
  name: string;
  hiddenSize: number;
  layers: number;
  heads: number;
  intermediateSize: number;
  maxPositions: number;
  seed: number;
}

/** Directory holding the models bundled with this package. */
export function bundledModelsDir(): string {
  return fileURLToPath(new URL("../models", import.meta.url));
}

/** splitmix32: tiny, seedable, and stable across platforms. */
function splitmix32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z = z ^ (z >>> 15);
    return (z >>> 0) / 4294967296;
  };
}

/** Gaussian stream via Box–Muller over the uniform stream. */
function gaussianStream(seed: number): () => number {
  const uniform = splitmix32(seed);
  let spare: number | null = null;
  return () => {
    if (spare !== null) {
      const value = spare;
      spare = null;
      return value;
    }
    let u = 0;
    while (u === 0) u = uniform();
    const v = uniform();
    const radius = Math.sqrt(-2.0 * Math.log(u));
    spare = radius * Math.sin(2.0 * Math.PI * v);
    return radius * Math.cos(2.0 * Math.PI * v);
  };
}

interface LayerWeights {
  wq: Float64Array;
  wk: Float64Array;
  wv: Float64Array;
  wo: Float64Array;
  bq: Float64Array;
  bk: Float64Array;
  bv: Float64Array;
  bo: Float64Array;
  w1: Float64Array; // hidden -> intermediate
  b1: Float64Array;
  w2: Float64Array; // intermediate -> hidden
  b2: Float64Array;
}

const INIT_SCALE = 0.08;

function gelu(x: number): number {
  return 0.5 * x * (1.0 + Math.tanh(Math.sqrt(2.0 / Math.PI) * (x + 0.044715 * x * x * x)));
}

export class MaskedLanguageModel {
  readonly config: ModelConfig;
  readonly tokenizer: WordPieceTokenizer;

  private readonly tokenEmbeddings: Float64Array; // vocab x hidden
  private readonly positionEmbeddings: Float64Array; // maxPositions x hidden
  private readonly layerWeights: LayerWeights[];

  constructor(config: ModelConfig, vocabPieces: string[]) {
    if (config.hiddenSize % config.heads !== 0) {
      throw new Error("hiddenSize must be divisible by heads");
    }
    this.config = config;
    this.tokenizer = new WordPieceTokenizer(vocabPieces);

    // One gaussian stream, consumed in a fixed order, realizes every weight.
    const next = gaussianStream(config.seed);
    const fill = (n: number) => {
      const arr = new Float64Array(n);
      for (let i = 0; i < n; i++) arr[i] = INIT_SCALE * next();
      return arr;
    };

    const d = config.hiddenSize;
    this.tokenEmbeddings = fill(this.tokenizer.size * d);
    this.positionEmbeddings = fill(config.maxPositions * d);
    this.layerWeights = [];
    for (let layer = 0; layer < config.layers; layer++) {
      this.layerWeights.push({
        wq: fill(d * d), wk: fill(d * d), wv: fill(d * d), wo: fill(d * d),
        bq: fill(d), bk: fill(d), bv: fill(d), bo: fill(d),
        w1: fill(d * config.intermediateSize), b1: fill(config.intermediateSize),
        w2: fill(config.intermediateSize * d), b2: fill(d),
      });
    }
  }

  get hiddenSize(): number {
    return this.config.hiddenSize;
  }

  /**
   * Load by bundled name or by path to a directory containing config.json
   * and vocab.txt.
   */
  static load(nameOrPath: string, modelsDir = bundledModelsDir()): MaskedLanguageModel {
    const candidates = [join(modelsDir, nameOrPath), resolve(nameOrPath)];
    const dir = candidates.find((c) => existsSync(join(c, "config.json")));
    if (dir === undefined) {
      throw new Error(
        `cannot resolve model "${nameOrPath}": no config.json under ${candidates.join(" or ")}`,
      );
    }
    const raw = JSON.parse(readFileSync(join(dir, "config.json"), "utf-8"));
    for (const field of ["hiddenSize", "layers", "heads", "intermediateSize", "maxPositions", "seed"]) {
      if (typeof raw[field] !== "number") {
        throw new Error(`model config at ${dir} is missing numeric field "${field}"`);
      }
    }
    const config: ModelConfig = { name: raw.name ?? nameOrPath, ...raw };
    const vocab = parseVocab(readFileSync(join(dir, "vocab.txt"), "utf-8"));
    return new MaskedLanguageModel(config, vocab);
  }

  /**
   * Run the encoder over one token-id sequence and return the final-layer
   * output vector at every position. Sequences longer than maxPositions are
   * the caller's responsibility (see the span-centered truncation upstream).
   */
  encode(tokenIds: number[]): Float64Array[] {
    const { hiddenSize: d, heads } = this.config;
    const n = tokenIds.length;
    if (n === 0) {
      return [];
    }
    if (n > this.config.maxPositions) {
      throw new Error(`sequence of ${n} tokens exceeds maxPositions ${this.config.maxPositions}`);
    }
    const headDim = d / heads;

    // Embedding lookup: token + position.
    let states: Float64Array[] = [];
    for (let i = 0; i < n; i++) {
      const vec = new Float64Array(d);
      const tokenBase = tokenIds[i] * d;
      const posBase = i * d;
      for (let c = 0; c < d; c++) {
        vec[c] = this.tokenEmbeddings[tokenBase + c] + this.positionEmbeddings[posBase + c];
      }
      states.push(layerNorm(vec));
    }

    for (const weights of this.layerWeights) {
      // Multi-head self-attention.
      const q = states.map((s) => affine(s, weights.wq, weights.bq, d, d));
      const k = states.map((s) => affine(s, weights.wk, weights.bk, d, d));
      const v = states.map((s) => affine(s, weights.wv, weights.bv, d, d));

      const attended: Float64Array[] = [];
      for (let i = 0; i < n; i++) {
        const merged = new Float64Array(d);
        for (let h = 0; h < heads; h++) {
          const offset = h * headDim;
          const scores = new Float64Array(n);
          let maxScore = -Infinity;
          for (let j = 0; j < n; j++) {
            let dot = 0;
            for (let c = 0; c < headDim; c++) {
              dot += q[i][offset + c] * k[j][offset + c];
            }
            scores[j] = dot / Math.sqrt(headDim);
            if (scores[j] > maxScore) maxScore = scores[j];
          }
          let denom = 0;
          for (let j = 0; j < n; j++) {
            scores[j] = Math.exp(scores[j] - maxScore);
            denom += scores[j];
          }
          for (let j = 0; j < n; j++) {
            const weight = scores[j] / denom;
            for (let c = 0; c < headDim; c++) {
              merged[offset + c] += weight * v[j][offset + c];
            }
          }
        }
        attended.push(affine(merged, weights.wo, weights.bo, d, d));
      }

      // Residual + norm, then the feed-forward block.
      const mid = states.map((s, i) => layerNorm(add(s, attended[i])));
      states = mid.map((s) => {
        const inner = affine(s, weights.w1, weights.b1, d, this.config.intermediateSize);
        for (let c = 0; c < inner.length; c++) inner[c] = gelu(inner[c]);
        const outer = affine(inner, weights.w2, weights.b2, this.config.intermediateSize, d);
        return layerNorm(add(s, outer));
      });
    }
    return states;
  }
}

function add(a: Float64Array, b: Float64Array): Float64Array {
  const out = new Float64Array(a.length);
  for (let i = 0; i < a.length; i++) out[i] = a[i] + b[i];
  return out;
}

/** y = x W + b with W stored row-major as (inDim x outDim). */
function affine(
  x: Float64Array,
  w: Float64Array,
  b: Float64Array,
  inDim: number,
  outDim: number,
): Float64Array {
  const out = new Float64Array(outDim);
  for (let r = 0; r < inDim; r++) {
    const xr = x[r];
    const base = r * outDim;
    for (let c = 0; c < outDim; c++) {
      out[c] += xr * w[base + c];
    }
  }
  for (let c = 0; c < outDim; c++) out[c] += b[c];
  return out;
}

function layerNorm(x: Float64Array, epsilon = 1e-12): Float64Array {
  let mean = 0;
  for (let i = 0; i < x.length; i++) mean += x[i];
  mean /= x.length;
  let variance = 0;
  for (let i = 0; i < x.length; i++) {
    const centered = x[i] - mean;
    variance += centered * centered;
  }
  variance /= x.length;
  const inv = 1.0 / Math.sqrt(variance + epsilon);
  const out = new Float64Array(x.length);
  for (let i = 0; i < x.length; i++) out[i] = (x[i] - mean) * inv;
  return out;
}
