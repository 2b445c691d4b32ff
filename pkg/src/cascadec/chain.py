"""Semiring kernels over first-order chains.

A chain of ``L`` positions with ``K`` states per position is described by
its ``L - 1`` edges, each a dense ``K x K`` table of log-scores in natural
units.  Infeasible transitions are ``-inf``; since the kernels only add
and maximise, ``-inf`` propagates cleanly and never produces NaN.

Three semirings are used:

* max-plus for Viterbi and max-marginals,
* max-plus over a balanced binary tree for the parallel-depth scan,
* sum-product over feasibility indicators for exact path counting
  (arbitrary-precision, since counts overflow 64 bits quickly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateChainError,
    EmptyMaxMarginalError,
    InfeasibleChainError,
)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ChainScores:
    """Log-scores of a first-order chain, indexed ``[edge, left, right]``."""

    scores: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValueError("scores must have shape (edges, K, K)")
        object.__setattr__(self, "scores", arr)

    @property
    def num_edges(self) -> int:
        return self.scores.shape[0]

    @property
    def num_states(self) -> int:
        return self.scores.shape[1]

    @property
    def mask(self) -> np.ndarray:
        """Feasibility mask; False exactly where the log-score is -inf."""
        return np.isfinite(self.scores)


@dataclass(frozen=True)
class MaxMarginalTable:
    """Per-edge log max-marginals, same layout as :class:`ChainScores`."""

    values: np.ndarray

    def viterbi_score(self) -> float:
        """Best total path score; equals the max of any single edge table."""
        return float(np.max(self.values[0]))


@dataclass(frozen=True)
class ScanTrace:
    """Counters describing one tree scan.

    ``levels_up``/``levels_down`` measure the sequential depth of the
    bottom-up and top-down sweeps; ``cell_ops`` counts individual
    ``K x K`` cells produced across all levels, which is O(K^2 L).
    """

    levels_up: int
    levels_down: int
    cell_ops: int


def _check_chain(chain: ChainScores) -> None:
    if chain.num_edges == 0:
        raise DegenerateChainError("degenerate chain")
    bad = ~chain.mask.any(axis=(1, 2))
    if bad.any():
        edge = int(np.argmax(bad))
        raise EmptyMaxMarginalError(f"empty max-marginal set at edge {edge}")


def _maxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Blockwise max-plus product of (B, K, K) stacks."""
    return np.max(a[:, :, :, None] + b[:, None, :, :], axis=2)


def next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def tree_max_marginals(chain: ChainScores) -> tuple[MaxMarginalTable, ScanTrace]:
    """Compute all edge max-marginals with a balanced binary tree scan.

    The edge list is padded to a power of two with all-zero edges past
    the true suffix; those act as free transitions, contribute a constant
    zero to every suffix, and are excluded from the output.  Sequential
    depth is the height of the tree in both sweeps.
    """
    _check_chain(chain)
    num_edges = chain.num_edges
    k = chain.num_states
    padded = next_pow2(num_edges)
    levels = padded.bit_length() - 1

    base = np.zeros((padded, k, k))
    base[:num_edges] = chain.scores

    # Bottom-up sweep: charts[i][j] is the best score across block j of
    # 2^i consecutive edges, constrained at both endpoints.
    charts = [base]
    ops = 0
    for _ in range(levels):
        top = charts[-1]
        charts.append(_maxplus(top[0::2], top[1::2]))
        ops += charts[-1].shape[0] * k * k

    # Top-down sweep: prefix[j] / suffix[j] are the best scores of the
    # edges strictly before / after block j, endpoint-constrained.
    prefix = np.zeros((1, k, k))
    suffix = np.zeros((1, k, k))
    for i in range(levels, 0, -1):
        lower = charts[i - 1]
        blocks = lower.shape[0]
        new_prefix = np.empty_like(lower)
        new_suffix = np.empty_like(lower)
        new_prefix[0::2] = prefix
        new_prefix[1::2] = _maxplus(prefix, lower[0::2])
        new_suffix[1::2] = suffix
        new_suffix[0::2] = _maxplus(lower[1::2], suffix)
        prefix, suffix = new_prefix, new_suffix
        ops += blocks * k * k

    best_prefix = prefix.max(axis=1)  # (padded, K), indexed by left state
    best_suffix = suffix.max(axis=2)  # (padded, K), indexed by right state
    values = best_prefix[:, :, None] + base + best_suffix[:, None, :]
    ops += num_edges * k * k

    table = MaxMarginalTable(values[:num_edges])
    return table, ScanTrace(levels_up=levels, levels_down=levels, cell_ops=ops)


def serial_max_marginals(chain: ChainScores) -> MaxMarginalTable:
    """O(K^2 L) forward-backward oracle for edge max-marginals."""
    _check_chain(chain)
    num_edges = chain.num_edges
    k = chain.num_states
    scores = chain.scores

    alpha = np.zeros((num_edges + 1, k))
    for e in range(num_edges):
        alpha[e + 1] = np.max(alpha[e][:, None] + scores[e], axis=0)
    beta = np.zeros((num_edges + 1, k))
    for e in range(num_edges - 1, -1, -1):
        beta[e] = np.max(scores[e] + beta[e + 1][None, :], axis=1)

    values = alpha[:-1, :, None] + scores + beta[1:, None, :]
    return MaxMarginalTable(values)


def viterbi(chain: ChainScores) -> tuple[list[int], float]:
    """Best path through the chain with deterministic tie-breaking.

    Among all score-optimal paths, the lexicographically smallest state
    sequence is returned.  This is achieved by a suffix-table backward
    pass followed by greedy front-to-back selection of the smallest
    state id that still attains the optimum.
    """
    _check_chain(chain)
    num_edges = chain.num_edges
    k = chain.num_states
    scores = chain.scores

    best = np.zeros((num_edges + 1, k))
    for e in range(num_edges - 1, -1, -1):
        best[e] = np.max(scores[e] + best[e + 1][None, :], axis=1)

    total = float(np.max(best[0]))
    if not np.isfinite(total):
        raise InfeasibleChainError("no feasible path")

    path = [int(np.argmax(best[0] == best[0].max()))]
    for e in range(num_edges):
        cont = scores[e][path[-1]] + best[e + 1]
        path.append(int(np.argmax(cont == best[e][path[-1]])))
    return path, total


def count_paths(chain: ChainScores) -> int:
    """Exact number of feasible paths, via the counting semiring.

    Python integers keep the count exact at any magnitude.
    """
    k = chain.num_states
    feasible = chain.mask
    counts = [1] * k
    for e in range(chain.num_edges):
        counts = [
            sum(counts[k1] for k1 in range(k) if feasible[e, k1, k2])
            for k2 in range(k)
        ]
    return sum(counts)
