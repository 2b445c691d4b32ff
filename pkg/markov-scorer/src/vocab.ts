/**
 * Token/id bookkeeping for the scorer.
 *
 * The output vocabulary holds the scorable tokens (content plus <eos>).
 * The segment-start token <eps> is input-only: it has an embedding row
 * but no output logit, so softmax normalization over outputs is exact.
 */

export const EOS = "<eos>";
export const EPS = "<eps>";

export interface Vocab {
  /** Scorable tokens; ids on the wire index into this list. */
  tokens: string[];
  /** Input id of the segment-start token (= tokens.length). */
  epsId: number;
  eosId: number;
}

export function makeVocab(tokens: string[]): Vocab {
  const eosId = tokens.indexOf(EOS);
  if (eosId < 0) throw new Error(`vocabulary must contain ${EOS}`);
  if (tokens.includes(EPS)) throw new Error(`${EPS} is input-only`);
  if (new Set(tokens).size !== tokens.length) {
    throw new Error("duplicate tokens in vocabulary");
  }
  return { tokens: [...tokens], epsId: tokens.length, eosId };
}

/** Collect sorted content tokens from corpus lines and append <eos>. */
export function vocabFromCorpus(sentences: string[][]): Vocab {
  const seen = new Set<string>();
  for (const sent of sentences) {
    for (const tok of sent) {
      if (tok !== EOS) seen.add(tok);
    }
  }
  return makeVocab([...seen].sort().concat([EOS]));
}

export function encode(vocab: Vocab, sent: string[]): number[] {
  return sent.map((tok) => {
    const id = vocab.tokens.indexOf(tok);
    if (id < 0) throw new Error(`unknown token ${JSON.stringify(tok)}`);
    return id;
  });
}
