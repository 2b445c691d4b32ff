"""Cascaded decoding driver.

One decode runs ``iterations`` scoring passes of increasing Markov order
over a lattice of fixed length:

1. order 0 prunes the per-position vocabulary to the top-K tokens,
2. each following pass joins adjacent surviving spans into spans one
   token longer, relabels them as states of a first-order chain, scores
   the chain with the next-order potentials, computes all edge
   max-marginals with the tree scan, and keeps the top-K spans per
   position,
3. the last pass runs Viterbi over the final chain instead of pruning.

Spans are pruned by max-marginal, so a span survives only if some full
sequence through it scores well; every span on the optimal path has the
globally maximal max-marginal and therefore always survives, which keeps
the lattice non-empty.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainScores, ScanTrace, count_paths, serial_max_marginals, \
    tree_max_marginals, viterbi
from .errors import CascadecError, LatticeDisconnectedError
from .lengths import LengthWindow, strip_padding, wrap_potentials
from .potentials import NEG_INF, PotentialProvider
from .vocab import Vocabulary

TIE_BREAK_POLICIES = ("lexicographic",)


@dataclass(frozen=True)
class DecodeConfig:
    """Search hyperparameters.

    ``iterations`` is the number of scoring passes, i.e. the final model
    order plus one.  The affine length rule maps source length to the
    predicted output length (counting the eos token).
    """

    k: int = 16
    iterations: int = 2
    delta_l: int = 3
    length_slope: float = 1.0
    length_intercept: float = 0.0
    length_relax: bool = True
    tie_break: str = "lexicographic"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.delta_l < 0:
            raise ValueError("delta_l must be >= 0")
        if self.tie_break not in TIE_BREAK_POLICIES:
            raise ValueError(f"unknown tie_break {self.tie_break!r}")

    def predict_length(self, source_len: int) -> int:
        return max(2, round(self.length_slope * source_len + self.length_intercept))


@dataclass
class SpanSet:
    """Surviving spans of one order, with their pruning-pass scores.

    ``spans[l]`` is lexicographically sorted, which makes the relabeling
    map simply the position of a span in that list.
    """

    order: int
    spans: list[list[tuple[int, ...]]]
    values: list[dict[tuple[int, ...], float]]

    def phi(self, position: int) -> dict[tuple[int, ...], int]:
        return {span: i for i, span in enumerate(self.spans[position])}

    @property
    def num_positions(self) -> int:
        return len(self.spans)

    def total_spans(self) -> int:
        return sum(len(s) for s in self.spans)

    def validate(self) -> None:
        m = self.order
        for l, spans in enumerate(self.spans):
            if not spans:
                raise LatticeDisconnectedError(f"no spans at position {l}")
            if any(len(s) != m + 1 for s in spans):
                raise ValueError("span length does not match order")
            if m >= 1 and l + 1 < len(self.spans):
                nxt = {s[:-1] for s in self.spans[l + 1]}
                if not any(s[1:] in nxt for s in spans):
                    raise LatticeDisconnectedError(
                        f"no compatible spans between {l} and {l + 1}")


@dataclass
class DecodeDiagnostics:
    lattice_len: int = 0
    order_used: int = 0
    span_counts: list = field(default_factory=list)
    path_counts: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    scan_seconds: float = 0.0
    total_seconds: float = 0.0
    prune_fallbacks: int = 0


@dataclass
class DecodeResult:
    tokens: list[str]
    ids: list[int]
    log_score: float
    diagnostics: DecodeDiagnostics


def init_unigram_set(provider: PotentialProvider, lattice_len: int, k: int,
                     forced=None) -> SpanSet:
    """Keep the K best tokens per position by order-0 score.

    Tokens with -inf score are dropped unless listed in ``forced``
    (a mapping position -> ids that must survive, used for the pad and
    eos guarantees of length relaxation).
    """
    vocab = provider.vocab
    candidates = [i for i in range(len(vocab)) if i != vocab.epsilon_id]
    queries = [(0, l, (tok,)) for l in range(lattice_len) for tok in candidates]
    scores = provider.score_many(queries)

    spans: list[list[tuple[int, ...]]] = []
    values: list[dict[tuple[int, ...], float]] = []
    idx = 0
    for l in range(lattice_len):
        scored = {}
        for tok in candidates:
            scored[tok] = scores[idx]
            idx += 1
        finite = [(tok, s) for tok, s in scored.items() if s > NEG_INF]
        finite.sort(key=lambda ts: (-ts[1], ts[0]))
        keep = {tok: s for tok, s in finite[:k]}
        for tok in sorted(forced.get(l, ()) if forced else ()):
            keep.setdefault(tok, scored[tok])
        if not keep:
            raise LatticeDisconnectedError(f"no scorable token at position {l}")
        spans.append([(tok,) for tok in sorted(keep)])
        values.append({(tok,): s for tok, s in keep.items()})
    return SpanSet(order=0, spans=spans, values=values)


def build_chain(span_set: SpanSet, provider: PotentialProvider):
    """Relabel adjacent span sets into a first-order chain.

    States at position ``l`` are the surviving spans there; the cell
    ``(i, j)`` is feasible iff the spans overlap on all but one token,
    and then carries the next-order potential of their union.  Returns
    the chain together with the per-cell merged spans.
    """
    positions = span_set.num_positions
    if positions < 2:
        raise CascadecError("need at least two span positions to build a chain")
    merged_order = span_set.order + 1
    width = max(len(s) for s in span_set.spans)
    edges = positions - 1

    scores = np.full((edges, width, width), NEG_INF)
    cells: list[list[tuple[int, int, tuple[int, ...]]]] = []
    queries = []
    locations = []
    for e in range(edges):
        cells.append([])
        for i, left in enumerate(span_set.spans[e]):
            for j, right in enumerate(span_set.spans[e + 1]):
                if left[1:] != right[:-1]:
                    continue
                merged = left + (right[-1],)
                cells[e].append((i, j, merged))
                queries.append((merged_order, e, merged))
                locations.append((e, i, j))
        if not cells[e]:
            raise LatticeDisconnectedError(f"lattice disconnected at edge {e}")
    for (e, i, j), val in zip(locations, provider.score_many(queries)):
        scores[e, i, j] = val
    return ChainScores(scores), cells


def _feasibility_chain(span_set: SpanSet) -> ChainScores:
    positions = span_set.num_positions
    width = max(len(s) for s in span_set.spans)
    scores = np.full((max(positions - 1, 0), width, width), NEG_INF)
    for e in range(positions - 1):
        for i, left in enumerate(span_set.spans[e]):
            for j, right in enumerate(span_set.spans[e + 1]):
                if left[1:] == right[:-1]:
                    scores[e, i, j] = 0.0
    return ChainScores(scores)


def count_sequences(span_set: SpanSet) -> int:
    """Exact number of full sequences consistent with the span set."""
    if span_set.num_positions == 1:
        return len(span_set.spans[0])
    chain = _feasibility_chain(span_set)
    # dummy padding states are infeasible everywhere, but a state at the
    # first position with no outgoing edge would still seed a count of 1,
    # so count through the chain kernel which only follows feasible cells
    return count_paths(chain)


def _repair(selected: list[dict]) -> bool:
    """Drop spans without a compatible neighbour until a fixed point.

    Returns False if some position lost all of its spans.
    """
    changed = True
    while changed:
        changed = False
        for l, here in enumerate(selected):
            if not here:
                return False
            before = selected[l - 1] if l > 0 else None
            after = selected[l + 1] if l + 1 < len(selected) else None
            for span in list(here):
                ok = True
                if before is not None and not any(
                        p[1:] == span[:-1] for p in before):
                    ok = False
                if after is not None and not any(
                        span[1:] == n[:-1] for n in after):
                    ok = False
                if not ok:
                    del here[span]
                    changed = True
    return all(selected)


def prune_step(span_set: SpanSet, provider: PotentialProvider, k: int,
               criterion: str = "max_marginal"):
    """One cascade iteration: score, scan, keep the top-K spans.

    ``criterion`` selects the ranking statistic: edge max-marginals
    (the default) or the raw span potentials (the ablation baseline,
    which can orphan spans; orphaned positions fall back to
    max-marginal ranking and the fallback is reported).
    """
    if criterion not in ("max_marginal", "raw"):
        raise ValueError(f"unknown pruning criterion {criterion!r}")
    chain, cells = build_chain(span_set, provider)
    table, trace = tree_max_marginals(chain)
    mm = table.values

    def select(rank_of, positions=None):
        picked: list[dict[tuple[int, ...], float]] = [
            {} for _ in range(chain.num_edges)]
        for e in range(chain.num_edges):
            ranked = []
            for i, j, merged in cells[e]:
                value = rank_of(e, i, j)
                if value > NEG_INF:
                    ranked.append((value, merged, i, j))
            ranked.sort(key=lambda r: (-r[0], r[1]))
            for value, merged, i, j in ranked[:k]:
                picked[e][merged] = float(mm[e, i, j])
        return picked

    fallbacks = 0
    if criterion == "max_marginal":
        selected = select(lambda e, i, j: mm[e, i, j])
        if not _repair(selected):
            raise LatticeDisconnectedError("pruning emptied a position")
    else:
        raw = chain.scores
        selected = select(lambda e, i, j: raw[e, i, j])
        if not _repair(selected):
            # the ablation's failure mode: raw scores kept incompatible
            # spans; redo the emptied positions with max-marginals
            fallbacks = sum(1 for s in selected if not s)
            mm_selected = select(lambda e, i, j: mm[e, i, j])
            for e in range(len(selected)):
                if not selected[e]:
                    selected[e] = mm_selected[e]
            if not _repair(selected):
                raise LatticeDisconnectedError("pruning emptied a position")

    new_set = SpanSet(
        order=span_set.order + 1,
        spans=[sorted(s) for s in selected],
        values=selected,
    )
    new_set.validate()
    return new_set, trace, fallbacks


def _spans_to_sequence(span_path: list[tuple[int, ...]]) -> list[int]:
    ids = list(span_path[0])
    ids.extend(span[-1] for span in span_path[1:])
    return ids


def _argmax_decode(provider, lattice_len, diag) -> tuple[list[int], float]:
    """Non-autoregressive special case: per-position argmax of unaries."""
    candidates = provider.vocab.scorable_ids
    ids = []
    total = 0.0
    for l in range(lattice_len):
        scored = sorted(
            ((provider.score(0, l, (tok,)), tok) for tok in candidates),
            key=lambda st: (-st[0], st[1]))
        best_score, best_tok = scored[0]
        ids.append(best_tok)
        total += best_score
    diag.span_counts.append(lattice_len * len(candidates))
    diag.path_counts.append(1)
    return ids, total


def decode(source_tokens, scorer: PotentialProvider, cfg: DecodeConfig,
           prune_criterion: str = "max_marginal") -> DecodeResult:
    """Run the full cascade for one source sentence."""
    start = time.perf_counter()
    diag = DecodeDiagnostics()

    predicted = cfg.predict_length(len(source_tokens))
    source_ids = [scorer.vocab.id(t) for t in source_tokens
                  if t in scorer.vocab]
    scorer.set_context(source_ids)

    if cfg.length_relax and cfg.iterations > 1:
        delta = min(cfg.delta_l, predicted - 1)
        window = LengthWindow(predicted, delta)
        provider = wrap_potentials(scorer, window)
        lattice_len = window.lattice_len
    else:
        window = None
        provider = scorer
        lattice_len = predicted

    if cfg.iterations - 1 > provider.max_order:
        raise CascadecError(
            f"scorer supports orders up to {provider.max_order}, "
            f"cannot run {cfg.iterations} iterations")

    diag.lattice_len = lattice_len
    # a chain needs at least one edge, which caps the usable order
    order = min(cfg.iterations - 1, lattice_len - 1)
    diag.order_used = order

    if order == 0:
        ids, score = _argmax_decode(scorer, predicted, diag)
        diag.total_seconds = time.perf_counter() - start
        return DecodeResult(scorer.vocab.decode(ids), ids, score, diag)

    forced = None
    if window is not None:
        vocab = provider.vocab
        low = window.predicted_l - window.delta_l
        forced = {}
        for l in range(lattice_len):
            want = {vocab.pad_id}
            if low <= l + 1 < lattice_len:
                want.add(vocab.eos_id)
            forced[l] = want

    provider.reuse_hint(0)
    spans = init_unigram_set(provider, lattice_len, cfg.k, forced=forced)
    diag.span_counts.append(spans.total_spans())
    diag.path_counts.append(count_sequences(spans))

    for m in range(1, order):
        provider.reuse_hint(m)
        t0 = time.perf_counter()
        spans, trace, fallbacks = prune_step(spans, provider, cfg.k,
                                             criterion=prune_criterion)
        diag.scan_seconds += time.perf_counter() - t0
        diag.traces.append(trace)
        diag.span_counts.append(spans.total_spans())
        diag.path_counts.append(count_sequences(spans))
        diag.prune_fallbacks += fallbacks

    provider.reuse_hint(order)
    chain, cells = build_chain(spans, provider)
    t0 = time.perf_counter()
    state_path, score = viterbi(chain)
    diag.scan_seconds += time.perf_counter() - t0
    span_path = [spans.spans[l][s] for l, s in enumerate(state_path)]
    ids = _spans_to_sequence(span_path)

    if window is not None:
        ids = strip_padding(ids, provider.vocab)
    tokens = provider.vocab.decode(ids)
    diag.total_seconds = time.perf_counter() - start
    return DecodeResult(tokens, ids, float(score), diag)
