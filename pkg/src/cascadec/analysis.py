"""Baselines and measurement instruments.

Everything here treats the decoder as a black box: a serial beam-search
baseline over the same potentials, a repetition metric, the raw-score
pruning ablation, and a grid sweep that emits machine-readable reports.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .cascade import DecodeConfig, DecodeResult, decode
from .potentials import NEG_INF, PotentialProvider
from .vocab import Vocabulary


def beam_search(scorer: PotentialProvider, lattice_len: int, beam: int,
                max_order=None, stop_at_eos: bool = True):
    """Left-to-right beam search over the same potentials.

    Hypotheses are scored incrementally: the token appended at position
    ``t`` contributes the potential of the span ending there, with
    context truncated to ``min(t, max_order)`` previous tokens.  Ties
    break toward the lexicographically smaller prefix.  With
    ``stop_at_eos`` an eos freezes the hypothesis; otherwise sequences
    run to the full length.

    Returns ``(ids, log_score)`` under the incremental objective.
    """
    if beam < 1:
        raise ValueError("beam must be >= 1")
    vocab = scorer.vocab
    if max_order is None:
        max_order = scorer.max_order
    tokens = [i for i in vocab.scorable_ids]

    hyps: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    finished: list[tuple[float, tuple[int, ...]]] = []
    for t in range(lattice_len):
        expanded = []
        for score, prefix in hyps:
            m = min(t, max_order)
            for tok in tokens:
                span = prefix[len(prefix) - m:] + (tok,)
                gain = scorer.score(m, t - m, span)
                if gain == NEG_INF:
                    continue
                expanded.append((score + gain, prefix + (tok,)))
        expanded.sort(key=lambda sp: (-sp[0], sp[1]))
        hyps = []
        for score, prefix in expanded:
            if stop_at_eos and prefix[-1] == vocab.eos_id:
                finished.append((score, prefix))
            else:
                hyps.append((score, prefix))
            if len(hyps) == beam:
                break
        if not hyps:
            break
    pool = finished + hyps
    if not pool:
        raise ValueError("beam search found no feasible hypothesis")
    pool.sort(key=lambda sp: (-sp[0], sp[1]))
    best_score, best = pool[0]
    return list(best), float(best_score)


def repetition_ratio(tokens, n: int) -> float:
    """Fraction of distinct n-grams among all n-grams of the sequence."""
    tokens = list(tokens)
    if len(tokens) < n:
        raise ValueError(f"sequence shorter than n = {n}")
    grams = [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]
    return len(set(grams)) / len(grams)


def prune_by_ngram_score(span_set, provider, k):
    """Top-K pruning by raw span potentials instead of max-marginals.

    Raw scores ignore compatibility with the rest of the lattice, so
    this variant can orphan spans; orphaned positions fall back to
    max-marginal ranking (counted in the third return value).
    """
    from .cascade import prune_step

    return prune_step(span_set, provider, k, criterion="raw")


@dataclass
class RunReport:
    """One decode summarised as a flat record."""

    k: int
    iters: int
    delta_l: int
    score: float = float("nan")
    tokens: list = field(default_factory=list)
    span_counts: list = field(default_factory=list)
    path_counts: list = field(default_factory=list)
    depths: list = field(default_factory=list)
    ms_total: float = 0.0
    ms_scan: float = 0.0
    oracle_score: float | None = None
    error: str | None = None

    @classmethod
    def from_result(cls, cfg: DecodeConfig, result: DecodeResult) -> "RunReport":
        d = result.diagnostics
        return cls(
            k=cfg.k, iters=cfg.iterations, delta_l=cfg.delta_l,
            score=result.log_score, tokens=list(result.tokens),
            span_counts=list(d.span_counts), path_counts=list(d.path_counts),
            depths=[t.levels_up for t in d.traces],
            ms_total=d.total_seconds * 1e3, ms_scan=d.scan_seconds * 1e3,
        )

    def to_line(self) -> str:
        pairs = [f"k={self.k}", f"iters={self.iters}", f"delta_l={self.delta_l}"]
        if self.error is not None:
            pairs.append(f"error={self.error.replace(' ', '_')}")
            return " ".join(pairs)
        pairs.append(f"score={self.score:.6f}")
        pairs += [f"paths_iter{i}={c}" for i, c in enumerate(self.path_counts)]
        pairs += [f"spans_iter{i}={c}" for i, c in enumerate(self.span_counts)]
        pairs += [f"depth_iter{i}={d}" for i, d in enumerate(self.depths)]
        pairs.append(f"ms_total={self.ms_total:.3f}")
        pairs.append(f"ms_scan={self.ms_scan:.3f}")
        if self.oracle_score is not None:
            pairs.append(f"oracle_score={self.oracle_score:.6f}")
        pairs.append("tokens=" + ",".join(self.tokens))
        return " ".join(pairs)


def sweep(sources, scorer: PotentialProvider, ks, iters, delta_ls,
          base_cfg: DecodeConfig = DecodeConfig(), jobs: int = 1,
          oracle=None) -> list[RunReport]:
    """Decode every source under every (K, iterations, delta_l) cell.

    Cells run independently (optionally in a thread pool) and reports
    come back in deterministic grid order.  A failing cell is recorded
    as a report with its error message; the sweep continues.  ``oracle``
    is an optional callable ``(source, cfg) -> float`` adding a
    brute-force optimum column.

    ``jobs > 1`` requires a scorer whose potentials do not depend on
    the installed context (the context is per-provider state).
    """
    grid = [(k, it, dl) for k in ks for it in iters for dl in delta_ls]
    if not grid:
        raise ValueError("empty sweep grid")
    cells = [(k, it, dl, src) for (k, it, dl), src
             in itertools.product(grid, sources)]

    def run(cell):
        k, it, dl, src = cell
        cfg = DecodeConfig(
            k=k, iterations=it, delta_l=dl,
            length_slope=base_cfg.length_slope,
            length_intercept=base_cfg.length_intercept,
            length_relax=base_cfg.length_relax,
            tie_break=base_cfg.tie_break)
        try:
            report = RunReport.from_result(cfg, decode(src, scorer, cfg))
            if oracle is not None:
                report.oracle_score = oracle(src, cfg)
            return report
        except Exception as exc:  # noqa: BLE001 - recorded per cell
            return RunReport(k=k, iters=it, delta_l=dl, error=str(exc))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, cells))
    return [run(cell) for cell in cells]
