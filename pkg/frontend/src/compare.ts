/** Scenario comparison table.
 *
 * Rendered straight from the /compare response: row order is the
 * service's ranking order, never re-sorted client-side; scores are the
 * response values verbatim.
 */

import { CompareResponse } from "./api.js";

export interface CompareRow {
  rank: number;
  scenarioId: string;
  score: number;
}

export interface CompareTable {
  criterion: Record<string, unknown>;
  seed: number;
  modelDigest: string;
  rows: CompareRow[];
}

export function buildCompareTable(response: CompareResponse): CompareTable {
  return {
    criterion: response.criterion,
    seed: response.seed,
    modelDigest: response.model_digest,
    rows: response.ranking.map((entry, i) => ({
      rank: i + 1,
      scenarioId: entry.id,
      score: entry.score,
    })),
  };
}
