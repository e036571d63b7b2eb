export { WordPieceTokenizer, parseVocab, CLS, SEP, MASK, PAD, UNK } from "./tokenizer.js";
export type { TokenSpan } from "./tokenizer.js";
export { MaskedLanguageModel, bundledModelsDir } from "./model.js";
export type { ModelConfig } from "./model.js";
export { embedOccurrenceContent, embedOccurrenceContext, runEmbedder } from "./embedder.js";
export type { EmbedSummary, RunOptions } from "./embedder.js";
export { readOccurrences, writeEmbeddings } from "./jsonl.js";
export type { OccurrenceRecord, EmbeddingRow } from "./jsonl.js";
