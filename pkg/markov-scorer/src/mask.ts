/**
 * Barrier attention masks.
 *
 * A mask of length L with order M and offset o splits positions into
 * contiguous segments of at most M+1 positions, with segment starts at
 * every position congruent to o modulo M+1. Attention is causal inside
 * a segment and forbidden across segments, so the hidden state at any
 * position can depend on at most M earlier tokens.
 */

export interface BarrierMask {
  length: number;
  order: number;
  offset: number;
  /** allow[i][j]: may position i attend to position j. */
  allow: boolean[][];
}

/** Index of the segment containing position i. */
export function segmentOf(i: number, order: number, offset: number): number {
  const period = order + 1;
  if (offset === 0) return Math.floor(i / period);
  return i < offset ? 0 : Math.floor((i - offset) / period) + 1;
}

export function buildBarrierMask(
  length: number,
  order: number,
  offset: number,
): BarrierMask {
  if (order < 0) throw new Error(`order must be >= 0, got ${order}`);
  if (offset < 0 || offset > order) {
    throw new Error(`offset must lie in 0..${order}, got ${offset}`);
  }
  const allow: boolean[][] = [];
  for (let i = 0; i < length; i++) {
    const row: boolean[] = [];
    for (let j = 0; j < length; j++) {
      row.push(j <= i && segmentOf(i, order, offset) === segmentOf(j, order, offset));
    }
    allow.push(row);
  }
  return { length, order, offset, allow };
}

/** Positions that start a segment (these receive the <eps> input). */
export function segmentStarts(mask: BarrierMask): number[] {
  const starts: number[] = [];
  for (let i = 0; i < mask.length; i++) {
    if (i === 0 || segmentOf(i, mask.order, mask.offset) !==
        segmentOf(i - 1, mask.order, mask.offset)) {
      starts.push(i);
    }
  }
  return starts;
}

/** Additive float mask: 0 where allowed, -Infinity where forbidden. */
export function additiveMask(mask: BarrierMask): Float32Array {
  const flat = new Float32Array(mask.length * mask.length);
  for (let i = 0; i < mask.length; i++) {
    for (let j = 0; j < mask.length; j++) {
      flat[i * mask.length + j] = mask.allow[i][j] ? 0 : -Infinity;
    }
  }
  return flat;
}
