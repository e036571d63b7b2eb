/**
 * File formats shared with the expansion pipeline.
 *
 * Input: occurrence records, one JSON object per line.
 * Output: an occurrence-embeddings file — one header line {"dim","model"}
 * followed by one JSON object per surviving record. Vector components are
 * rounded to 32-bit floats before serialization, so a file is bit-stable
 * across runs.
 */

import { readFileSync, writeFileSync } from "node:fs";

export interface OccurrenceRecord {
  entityId: number;
  sentenceId: string;
  /** Code-point offsets into sentence, inclusive start / exclusive end. */
  start: number;
  end: number;
  sentence: string;
}

export function readOccurrences(path: string): OccurrenceRecord[] {
  const text = readFileSync(path, "utf-8");
  const records: OccurrenceRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (!line.trim()) continue;
    let raw: Record<string, unknown>;
    try {
      raw = JSON.parse(line);
    } catch {
      throw new Error(`${path}:${i + 1}: not valid JSON`);
    }
    const fail = (why: string) => {
      throw new Error(`${path}:${i + 1}: ${why}`);
    };
    const { entity_id, sentence_id, start, end, sentence } = raw as {
      entity_id?: unknown;
      sentence_id?: unknown;
      start?: unknown;
      end?: unknown;
      sentence?: unknown;
    };
    if (!Number.isInteger(entity_id) || (entity_id as number) < 0) {
      fail("entity_id must be a non-negative integer");
    }
    if (typeof sentence_id !== "string" || sentence_id.length === 0) {
      fail("sentence_id must be a non-empty string");
    }
    if (typeof sentence !== "string") fail("sentence must be a string");
    const length = Array.from(sentence as string).length;
    if (!Number.isInteger(start) || !Number.isInteger(end)) {
      fail("start and end must be integers");
    }
    if ((start as number) < 0 || (start as number) >= (end as number) || (end as number) > length) {
      fail(`span [${start},${end}) out of bounds for a ${length}-character sentence`);
    }
    records.push({
      entityId: entity_id as number,
      sentenceId: sentence_id as string,
      start: start as number,
      end: end as number,
      sentence: sentence as string,
    });
  }
  return records;
}

export interface EmbeddingRow {
  entityId: number;
  sentenceId: string;
  content: Float64Array;
  context: Float64Array;
}

function roundTo32Bit(vec: Float64Array, what: string): number[] {
  const out = new Array<number>(vec.length);
  for (let i = 0; i < vec.length; i++) {
    const value = Math.fround(vec[i]);
    if (!Number.isFinite(value)) {
      throw new Error(`non-finite component in ${what}`);
    }
    out[i] = value === 0 ? 0 : value; // collapse -0, which JSON cannot express
  }
  return out;
}

export function writeEmbeddings(
  path: string,
  dim: number,
  model: string,
  rows: Iterable<EmbeddingRow>,
): void {
  const lines = [JSON.stringify({ dim, model })];
  for (const row of rows) {
    if (row.content.length !== dim || row.context.length !== dim) {
      throw new Error(`vector for entity ${row.entityId} does not have dimension ${dim}`);
    }
    lines.push(
      JSON.stringify({
        entity_id: row.entityId,
        sentence_id: row.sentenceId,
        content: roundTo32Bit(row.content, `content of entity ${row.entityId}`),
        context: roundTo32Bit(row.context, `context of entity ${row.entityId}`),
      }),
    );
  }
  writeFileSync(path, lines.join("\n") + "\n");
}
