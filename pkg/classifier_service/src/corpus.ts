/** Reader for the annotated clause corpus format.
 *
 * Training files are the delimiter-format text files produced by the
 * evaluation toolkit's corpus tools: each clause sits in an
 * [INIT_CLAUSE] ... [END_CLAUSE] block with an optional
 * [INIT_CLASSE]i,j[END_CLASSE] label payload (ids 1..14).
 */

import { NUM_LABELS } from "./config.js";

export interface LabeledClause {
  text: string;
  labels: number[]; // sorted, unique, each in 1..14
}

const BLOCK_RE = /\[INIT_CLAUSE\]([\s\S]*?)\[END_CLAUSE\]/g;
const CLASS_RE = /\[INIT_CLASSE\]([\s\S]*?)\[END_CLASSE\]/g;

export function parseAnnotated(text: string): LabeledClause[] {
  const clauses: LabeledClause[] = [];
  for (const block of text.matchAll(BLOCK_RE)) {
    const labels = new Set<number>();
    for (const tag of block[1].matchAll(CLASS_RE)) {
      for (const token of tag[1].split(",")) {
        const trimmed = token.trim();
        if (!/^\d+$/.test(trimmed)) {
          throw new Error(`invalid label token ${JSON.stringify(trimmed)}`);
        }
        const value = Number(trimmed);
        if (value < 1 || value > NUM_LABELS) {
          throw new Error(`label ${value} outside 1..${NUM_LABELS}`);
        }
        labels.add(value);
      }
    }
    const body = block[1].replace(CLASS_RE, "").trim();
    if (body.length === 0) {
      throw new Error(`clause block ${clauses.length} has empty text`);
    }
    clauses.push({ text: body, labels: [...labels].sort((a, b) => a - b) });
  }
  return clauses;
}

/** Binary 14-vector for a label list. */
export function labelsToRow(labels: number[]): number[] {
  const row = new Array<number>(NUM_LABELS).fill(0);
  for (const label of labels) {
    if (label < 1 || label > NUM_LABELS) {
      throw new Error(`label ${label} outside 1..${NUM_LABELS}`);
    }
    row[label - 1] = 1;
  }
  return row;
}
