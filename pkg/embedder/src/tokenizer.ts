/**
 * Uncased WordPiece tokenizer that reports, for every subword piece, the span
 * of the original sentence it came from.
 *
 * Offsets are code-point indices (not UTF-16 units) so they line up with the
 * character offsets in occurrence records produced upstream. Lowercasing a
 * single code point can expand it to several characters; every expanded
 * character keeps pointing at its source code point, so spans stay valid.
 */

export interface TokenSpan {
  /** Vocabulary id. */
  id: number;
  /** The vocabulary string, e.g. "mysql" or "##ql". */
  piece: string;
  /** Source span in code-point offsets, inclusive start / exclusive end. */
  start: number;
  end: number;
  /** True for [CLS], [SEP], [MASK] and friends. */
  special: boolean;
}

// Combining marks count as word characters so that case foldings which
// expand one code point into letter-plus-mark stay inside a single word.
const LETTER_OR_DIGIT = /[\p{L}\p{M}\p{N}]/u;
const WHITESPACE = /\s/u;

export const PAD = "[PAD]";
export const UNK = "[UNK]";
export const CLS = "[CLS]";
export const SEP = "[SEP]";
export const MASK = "[MASK]";

const REQUIRED_SPECIALS = [PAD, UNK, CLS, SEP, MASK];

export class WordPieceTokenizer {
  private readonly vocab = new Map<string, number>();

  readonly padId: number;
  readonly unkId: number;
  readonly clsId: number;
  readonly sepId: number;
  readonly maskId: number;

  constructor(pieces: string[]) {
    pieces.forEach((piece, id) => {
      if (piece && !this.vocab.has(piece)) {
        this.vocab.set(piece, id);
      }
    });
    for (const token of REQUIRED_SPECIALS) {
      if (!this.vocab.has(token)) {
        throw new Error(`vocabulary is missing required token ${token}`);
      }
    }
    this.padId = this.vocab.get(PAD)!;
    this.unkId = this.vocab.get(UNK)!;
    this.clsId = this.vocab.get(CLS)!;
    this.sepId = this.vocab.get(SEP)!;
    this.maskId = this.vocab.get(MASK)!;
  }

  get size(): number {
    return this.vocab.size;
  }

  /**
   * Tokenize raw text into subword pieces with source spans. No special
   * tokens are added. `base` shifts all reported offsets, for callers that
   * tokenize a slice of a larger sentence.
   */
  tokenize(text: string, base = 0): TokenSpan[] {
    // Normalize per code point, remembering where every normalized
    // character came from.
    const normChars: string[] = [];
    const normSource: number[] = [];
    let sourceIndex = 0;
    for (const cp of text) {
      for (const ch of cp.toLowerCase()) {
        normChars.push(ch);
        normSource.push(sourceIndex);
      }
      sourceIndex += 1;
    }

    const out: TokenSpan[] = [];
    let i = 0;
    while (i < normChars.length) {
      const ch = normChars[i];
      if (WHITESPACE.test(ch)) {
        i += 1;
        continue;
      }
      if (!LETTER_OR_DIGIT.test(ch)) {
        // Punctuation is always its own word.
        this.wordpiece(normChars, normSource, i, i + 1, base, out);
        i += 1;
        continue;
      }
      let j = i;
      while (j < normChars.length && LETTER_OR_DIGIT.test(normChars[j])) {
        j += 1;
      }
      this.wordpiece(normChars, normSource, i, j, base, out);
      i = j;
    }
    return out;
  }

  /** Greedy longest-match-first split of one word; [UNK] if any part fails. */
  private wordpiece(
    chars: string[],
    source: number[],
    wordStart: number,
    wordEnd: number,
    base: number,
    out: TokenSpan[],
  ): void {
    const spanOf = (a: number, b: number) => ({
      start: base + source[a],
      end: base + source[b - 1] + 1,
    });

    const pieces: TokenSpan[] = [];
    let start = wordStart;
    while (start < wordEnd) {
      let end = wordEnd;
      let found: { id: number; piece: string } | null = null;
      while (start < end) {
        let candidate = chars.slice(start, end).join("");
        if (start > wordStart) candidate = "##" + candidate;
        const id = this.vocab.get(candidate);
        if (id !== undefined) {
          found = { id, piece: candidate };
          break;
        }
        end -= 1;
      }
      if (found === null) {
        const { start: s, end: e } = spanOf(wordStart, wordEnd);
        out.push({ id: this.unkId, piece: UNK, start: s, end: e, special: false });
        return;
      }
      const { start: s, end: e } = spanOf(start, end);
      pieces.push({ id: found.id, piece: found.piece, start: s, end: e, special: false });
      start = end;
    }
    out.push(...pieces);
  }

  /**
   * Tokenize a sentence in which the code-point span [spanStart, spanEnd) is
   * replaced by exactly one [MASK] token; the surrounding text is tokenized
   * as usual. Returns the pieces (no [CLS]/[SEP]) and the index of the mask
   * within them.
   */
  tokenizeWithMask(
    sentence: string,
    spanStart: number,
    spanEnd: number,
  ): { tokens: TokenSpan[]; maskIndex: number } {
    const cps = Array.from(sentence);
    const prefix = cps.slice(0, spanStart).join("");
    const suffix = cps.slice(spanEnd).join("");
    const tokens = this.tokenize(prefix, 0);
    const maskIndex = tokens.length;
    tokens.push({
      id: this.maskId,
      piece: MASK,
      start: spanStart,
      end: spanEnd,
      special: true,
    });
    tokens.push(...this.tokenize(suffix, spanEnd));
    return { tokens, maskIndex };
  }

  /** Wrap body pieces in [CLS] ... [SEP] and return the id sequence. */
  withSpecials(body: TokenSpan[]): TokenSpan[] {
    const cls: TokenSpan = { id: this.clsId, piece: CLS, start: 0, end: 0, special: true };
    const sep: TokenSpan = { id: this.sepId, piece: SEP, start: 0, end: 0, special: true };
    return [cls, ...body, sep];
  }
}

/** Parse a vocab.txt payload: one piece per line, id = line number. */
export function parseVocab(text: string): string[] {
  return text.split(/\r?\n/).map((line) => line.trim());
}
