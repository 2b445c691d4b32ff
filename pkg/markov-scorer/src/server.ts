/**
 * TCP scorer server speaking the line protocol:
 *
 *   CTX <id> ...                 install the conditioning source
 *   REUSE <iteration>            cache hint, accepted and ignored
 *   SCORE <batch_id> <count>     followed by count lines "<m> <l> <ids...>"
 *   -> OK <batch_id> <count>     followed by count potentials, or
 *   -> ERR <batch_id> <message>
 *
 * Each connection holds its own context; frames on a connection are
 * handled sequentially.
 */

import * as net from "node:net";

import { formatPotential } from "./export.js";
import { Model, SpanQuery, scoreSpans } from "./model.js";

interface PendingBatch {
  batchId: string;
  remaining: number;
  queries: SpanQuery[];
  failed: string | null;
}

/** Stateful line handler for one connection; exposed for direct tests. */
export class Session {
  private ctx: number[] = [];
  private ctxError: string | null = null;
  private pending: PendingBatch | null = null;

  constructor(private model: Model) {}

  /** Feed one input line; returns response lines to send (often none). */
  handleLine(line: string): string[] {
    const parts = line.split(/\s+/).filter((p) => p.length);
    if (!parts.length) return [];
    if (this.pending) return this.handleQueryLine(parts);

    switch (parts[0]) {
      case "CTX":
        return this.handleCtx(parts.slice(1));
      case "REUSE":
        return [];
      case "SCORE":
        return this.handleScoreHeader(parts);
      default:
        return [`ERR 0 unknown frame ${parts[0]}`];
    }
  }

  private handleCtx(fields: string[]): string[] {
    const ids = fields.map(Number);
    const vocabSize = this.model.vocab.tokens.length;
    if (ids.some((x) => !Number.isInteger(x) || x < 0 || x >= vocabSize)) {
      this.ctxError = "CTX contains ids outside the vocabulary";
    } else if (ids.length > this.model.config.maxCtx) {
      this.ctxError = `CTX longer than ${this.model.config.maxCtx}`;
    } else {
      this.ctx = ids;
      this.ctxError = null;
    }
    return [];
  }

  private handleScoreHeader(parts: string[]): string[] {
    const count = Number(parts[2]);
    const batchId = parts[1] ?? "0";
    if (parts.length !== 3 || !Number.isInteger(count) || count < 0) {
      return [`ERR ${batchId} malformed SCORE header`];
    }
    this.pending = { batchId, remaining: count, queries: [], failed: null };
    if (count === 0) return this.finishBatch();
    return [];
  }

  private handleQueryLine(parts: string[]): string[] {
    const pending = this.pending!;
    pending.remaining -= 1;
    if (!pending.failed) {
      const nums = parts.map(Number);
      if (nums.some((x) => !Number.isInteger(x))) {
        pending.failed = `non-integer query line ${parts.join(" ")}`;
      } else {
        const [m, l, ...span] = nums;
        if (span.length !== m + 1) {
          pending.failed = `span length ${span.length} != m + 1`;
        } else {
          pending.queries.push({ m, l, span });
        }
      }
    }
    if (pending.remaining > 0) return [];
    return this.finishBatch();
  }

  private finishBatch(): string[] {
    const { batchId, queries, failed } = this.pending!;
    this.pending = null;
    const problem = failed ?? this.ctxError;
    if (problem) return [`ERR ${batchId} ${oneLine(problem)}`];
    try {
      const values = scoreSpans(this.model, queries, this.ctx);
      return [`OK ${batchId} ${queries.length}`, ...values.map(formatPotential)];
    } catch (err) {
      return [`ERR ${batchId} ${oneLine(String(err))}`];
    }
  }
}

function oneLine(text: string): string {
  return text.replace(/\s+/g, " ").trim();
}

export function createScorerServer(model: Model): net.Server {
  return net.createServer((socket) => {
    const session = new Session(model);
    let buffer = "";
    socket.on("data", (chunk) => {
      buffer += chunk.toString("utf-8");
      let idx: number;
      const replies: string[] = [];
      while ((idx = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, idx);
        buffer = buffer.slice(idx + 1);
        replies.push(...session.handleLine(line));
      }
      if (replies.length) socket.write(replies.join("\n") + "\n");
    });
    socket.on("error", () => socket.destroy());
  });
}

/** Start listening; resolves with the bound port. */
export function listen(server: net.Server, host: string,
                       port: number): Promise<number> {
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, host, () => {
      const address = server.address() as net.AddressInfo;
      resolve(address.port);
    });
  });
}
