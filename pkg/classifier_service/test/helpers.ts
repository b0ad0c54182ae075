import { LabeledClause } from "../src/corpus.js";

/** One dedicated keyword per taxonomy label. */
export const KEYWORDS = [
  "parties", "purpose", "bilateral", "definition", "obligation",
  "disclosure", "exclusion", "damages", "competition", "termination",
  "property", "employees", "jurisdiction", "miscellaneous",
];

export function keywordClause(labels: number[]): LabeledClause {
  const words: string[] = [];
  for (const label of labels) {
    for (let k = 0; k < 3; k++) words.push(KEYWORDS[label - 1]);
  }
  return { text: words.join(" "), labels: [...labels].sort((a, b) => a - b) };
}

/** The 50-clause keyword-separable overfit corpus: 3 single-label clauses
 * per taxonomy label plus 8 two-label clauses with controlled co-occurrence. */
export function overfitCorpus(): LabeledClause[] {
  const out: LabeledClause[] = [];
  for (let rep = 0; rep < 3; rep++) {
    for (let label = 1; label <= 14; label++) out.push(keywordClause([label]));
  }
  const pairs: Array<[number, number]> = [
    [1, 8], [2, 9], [3, 10], [4, 11], [5, 12], [6, 13], [7, 14], [1, 14],
  ];
  for (const pair of pairs) out.push(keywordClause(pair));
  return out;
}

export function validationCorpus(): LabeledClause[] {
  return [
    keywordClause([1]),
    keywordClause([5]),
    keywordClause([13]),
    keywordClause([2, 9]),
    keywordClause([14]),
    keywordClause([7]),
  ];
}
