/** Deterministic text features: hashed bag of tokens.
 *
 * Tokenization matches the evaluation toolkit (lowercase, alphanumeric
 * runs) and the token list is truncated at the configured sequence length.
 * Token counts are scattered into a fixed-size vector with FNV-1a hashing,
 * giving a deterministic stand-in for an encoder when no pretrained
 * transformer checkpoint is available.
 */

const TOKEN_RE = /[a-z0-9]+/g;

export function tokenize(text: string, maxTokens = Infinity): string[] {
  const tokens = text.toLowerCase().match(TOKEN_RE) ?? [];
  return tokens.length > maxTokens ? tokens.slice(0, maxTokens) : tokens;
}

function fnv1a(token: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < token.length; i++) {
    hash ^= token.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export class HashedFeaturizer {
  constructor(
    readonly dim: number,
    readonly maxSequenceLength: number,
  ) {
    if (dim < 1) throw new Error("dim must be >= 1");
  }

  /** Sparse token-count vector: feature index -> count. */
  featurize(text: string): Map<number, number> {
    const counts = new Map<number, number>();
    for (const token of tokenize(text, this.maxSequenceLength)) {
      const index = fnv1a(token) % this.dim;
      counts.set(index, (counts.get(index) ?? 0) + 1);
    }
    return counts;
  }
}
