/**
 * Static table export.
 *
 * Materializes the scorer into the text potential-file format consumed
 * by the decoder: every span over the scorable vocabulary, for each
 * order up to the requested maximum, at every lattice position. Only
 * sensible for tiny vocabularies.
 */

import * as fs from "node:fs";

import { Model, SpanQuery, scoreSpans } from "./model.js";

export const FILE_MAGIC = "markov-potentials 1";

export function formatPotential(value: number): string {
  return value === -Infinity ? "-inf" : String(value);
}

export function renderTables(model: Model, ctx: number[], latticeLen: number,
                             orders: number): string {
  if (orders > model.config.order) {
    throw new Error(
      `cannot export order ${orders} from an order-${model.config.order} model`);
  }
  const tokens = model.vocab.tokens;
  const lines = [FILE_MAGIC, `vocab ${tokens.length}`];
  tokens.forEach((tok, i) => lines.push(`${i} ${tok}`));
  lines.push(`orders ${orders}`, `length ${latticeLen}`);

  const ids = tokens.map((_, i) => i);
  for (let m = 0; m <= orders; m++) {
    let spans: number[][] = [[]];
    for (let j = 0; j <= m; j++) {
      spans = spans.flatMap((s) => ids.map((i) => [...s, i]));
    }
    for (let l = 0; l + m < latticeLen; l++) {
      const queries: SpanQuery[] = spans.map((span) => ({ m, l, span }));
      const values = scoreSpans(model, queries, ctx);
      spans.forEach((span, i) => {
        lines.push(`p ${m} ${l} ${span.join(" ")} ${formatPotential(values[i])}`);
      });
    }
  }
  return lines.join("\n") + "\n";
}

export function exportTables(model: Model, ctx: number[], latticeLen: number,
                             orders: number, outPath: string): void {
  fs.writeFileSync(outPath, renderTables(model, ctx, latticeLen, orders), "utf-8");
}
