"""Brute-force reference implementations.

Everything here enumerates the full sequence space, so it is only usable
on tiny instances; it exists to pin down the exact semantics the fast
paths must reproduce.
"""

from __future__ import annotations

import itertools

from .cascade import DecodeConfig
from .lengths import LengthWindow, strip_padding, wrap_potentials
from .potentials import NEG_INF, PotentialProvider, model_score


def _candidates(provider: PotentialProvider):
    vocab = provider.vocab
    return [i for i in range(len(vocab)) if i != vocab.epsilon_id]


def model_optimum(provider: PotentialProvider, lattice_len: int, order: int,
                  token_ids=None):
    """Exhaustive argmax of the order-``order`` objective.

    Enumerates every sequence over ``token_ids`` (default: all tokens
    except the scorer-internal epsilon), scores each as the sum of one
    potential per span, and returns ``(ids, score)`` with ties broken
    toward the lexicographically smaller sequence.
    """
    if token_ids is None:
        token_ids = _candidates(provider)
    best_ids = None
    best = NEG_INF
    for seq in itertools.product(sorted(token_ids), repeat=lattice_len):
        score = model_score(provider, list(seq), order)
        if score > best:
            best, best_ids = score, list(seq)
    if best_ids is None:
        raise ValueError("no sequence has finite score")
    return best_ids, best


def true_max_marginals(provider: PotentialProvider, lattice_len: int,
                       order: int, token_ids=None):
    """Per-span max-marginals by enumeration.

    Returns ``tables[l][span] = best full-sequence score among sequences
    containing ``span`` at position ``l``; spans whose best is -inf are
    omitted.
    """
    if token_ids is None:
        token_ids = _candidates(provider)
    tables: list[dict[tuple[int, ...], float]] = [
        {} for _ in range(lattice_len - order)]
    for seq in itertools.product(sorted(token_ids), repeat=lattice_len):
        score = model_score(provider, list(seq), order)
        if score == NEG_INF:
            continue
        for l in range(lattice_len - order):
            span = tuple(seq[l:l + order + 1])
            if score > tables[l].get(span, NEG_INF):
                tables[l][span] = score
    return tables


def window_optimum(source_tokens, scorer: PotentialProvider,
                   cfg: DecodeConfig) -> float:
    """Exhaustive optimum of the same objective ``decode`` searches.

    Rebuilds the decoder's lattice (predicted length, pad/eos window
    when relaxation is on) and enumerates it fully.  Returns only the
    optimal score; use ``window_argmax`` for the sequence.
    """
    return window_argmax(source_tokens, scorer, cfg)[1]


def window_argmax(source_tokens, scorer: PotentialProvider,
                  cfg: DecodeConfig):
    """As ``window_optimum`` but returns ``(stripped_ids, score)``."""
    predicted = cfg.predict_length(len(source_tokens))
    source_ids = [scorer.vocab.id(t) for t in source_tokens
                  if t in scorer.vocab]
    scorer.set_context(source_ids)
    order = cfg.iterations - 1

    if cfg.length_relax and order >= 1:
        delta = min(cfg.delta_l, predicted - 1)
        window = LengthWindow(predicted, delta)
        provider = wrap_potentials(scorer, window)
        lattice_len = window.lattice_len
    else:
        window = None
        provider = scorer
        lattice_len = predicted
    order = min(order, lattice_len - 1)

    ids, score = model_optimum(provider, lattice_len, order)
    if window is not None:
        ids = strip_padding(ids, provider.vocab)
    return ids, score
