/**
 * Content and context embeddings for entity occurrences.
 *
 * The content embedding of an occurrence is the mean of the final-layer
 * output vectors at the subword positions overlapping the entity span. The
 * context embedding replaces the whole span with a single [MASK] token and
 * takes the final-layer output at the mask position — so it depends only on
 * the surrounding sentence, never on the entity surface itself.
 */

import { MaskedLanguageModel } from "./model.js";
import { TokenSpan } from "./tokenizer.js";
import { OccurrenceRecord, EmbeddingRow, readOccurrences, writeEmbeddings } from "./jsonl.js";

/**
 * Keep at most `budget` body tokens, centered on the token range
 * [first, last], which must survive intact. Returns the slice bounds.
 */
function centeredWindow(
  bodyLength: number,
  first: number,
  last: number,
  budget: number,
): { lo: number; hi: number } | null {
  if (bodyLength <= budget) {
    return { lo: 0, hi: bodyLength };
  }
  const spanLength = last - first + 1;
  if (spanLength > budget) {
    return null; // the span alone exceeds the model window
  }
  let lo = first - Math.floor((budget - spanLength) / 2);
  lo = Math.max(0, Math.min(lo, bodyLength - budget));
  return { lo, hi: lo + budget };
}

function encodeWindow(
  model: MaskedLanguageModel,
  body: TokenSpan[],
  first: number,
  last: number,
): { outputs: Float64Array[]; offset: number } | null {
  const budget = model.config.maxPositions - 2; // room for [CLS] and [SEP]
  const window = centeredWindow(body.length, first, last, budget);
  if (window === null) {
    return null;
  }
  const slice = body.slice(window.lo, window.hi);
  const ids = model.tokenizer.withSpecials(slice).map((t) => t.id);
  // Position 0 is [CLS]; body token i of the slice sits at output i + 1.
  return { outputs: model.encode(ids), offset: window.lo - 1 };
}

/**
 * Mean of the final-layer outputs at the subword positions overlapping
 * [start, end). Null when no position overlaps or the span cannot fit the
 * model window; callers skip such records.
 */
export function embedOccurrenceContent(
  model: MaskedLanguageModel,
  sentence: string,
  start: number,
  end: number,
): Float64Array | null {
  const body = model.tokenizer.tokenize(sentence);
  const positions: number[] = [];
  for (let i = 0; i < body.length; i++) {
    if (body[i].start < end && body[i].end > start) {
      positions.push(i);
    }
  }
  if (positions.length === 0) {
    return null;
  }
  const encoded = encodeWindow(model, body, positions[0], positions[positions.length - 1]);
  if (encoded === null) {
    return null;
  }
  const mean = new Float64Array(model.hiddenSize);
  for (const position of positions) {
    const vec = encoded.outputs[position - encoded.offset];
    for (let c = 0; c < mean.length; c++) {
      mean[c] += vec[c];
    }
  }
  for (let c = 0; c < mean.length; c++) {
    mean[c] /= positions.length;
  }
  return mean;
}

/**
 * Final-layer output at the single [MASK] token that replaces [start, end).
 */
export function embedOccurrenceContext(
  model: MaskedLanguageModel,
  sentence: string,
  start: number,
  end: number,
): Float64Array | null {
  const { tokens, maskIndex } = model.tokenizer.tokenizeWithMask(sentence, start, end);
  const encoded = encodeWindow(model, tokens, maskIndex, maskIndex);
  if (encoded === null) {
    return null;
  }
  return encoded.outputs[maskIndex - encoded.offset];
}

export interface EmbedSummary {
  written: number;
  skipped: number;
}

export interface RunOptions {
  batchSize: number;
  onSkip?: (record: OccurrenceRecord, why: string) => void;
}

/**
 * Embed every record of an occurrences file into an occurrence-embeddings
 * file. Records are processed in batches purely as units of work; each
 * occurrence is encoded independently, so the output is identical for every
 * batch size, and rows keep the input order.
 */
export function runEmbedder(
  occurrencesPath: string,
  model: MaskedLanguageModel,
  outPath: string,
  options: RunOptions = { batchSize: 8 },
): EmbedSummary {
  const batchSize = Math.max(1, Math.floor(options.batchSize));
  const records = readOccurrences(occurrencesPath);
  const rows: EmbeddingRow[] = [];
  let skipped = 0;

  for (let base = 0; base < records.length; base += batchSize) {
    for (const record of records.slice(base, base + batchSize)) {
      const content = embedOccurrenceContent(model, record.sentence, record.start, record.end);
      const context = embedOccurrenceContext(model, record.sentence, record.start, record.end);
      if (content === null || context === null) {
        skipped += 1;
        options.onSkip?.(
          record,
          content === null
            ? "span maps to no subword positions or exceeds the model window"
            : "mask does not fit the model window",
        );
        continue;
      }
      rows.push({
        entityId: record.entityId,
        sentenceId: record.sentenceId,
        content,
        context,
      });
    }
  }

  writeEmbeddings(outPath, model.hiddenSize, model.config.name, rows);
  return { written: rows.length, skipped };
}
