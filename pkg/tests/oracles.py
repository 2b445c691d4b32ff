"""Independent brute-force reference implementations used by the tests.

Everything here is written in plain Python against the provider's
``score`` method only, so it shares no code path with the kernels under
test.  All enumeration is exhaustive; a branch is abandoned only once
its running sum is already -inf, which cannot change any maximum.
"""

import itertools

NEG_INF = float("-inf")


def enumerate_chain(chain):
    """Yield (path, score) for every feasible path of a ChainScores."""
    scores = chain.scores
    edges, k, _ = scores.shape
    for path in itertools.product(range(k), repeat=edges + 1):
        total = 0.0
        ok = True
        for e in range(edges):
            val = scores[e, path[e], path[e + 1]]
            if val == NEG_INF:
                ok = False
                break
            total += val
        if ok:
            yield list(path), total


def chain_argmax(chain):
    """Best (path, score) with score-then-lexicographic tie-break."""
    best_path, best = None, NEG_INF
    for path, total in enumerate_chain(chain):
        if total > best:
            best_path, best = path, total
    return best_path, best


def chain_max_marginals(chain):
    """Per-edge max-marginals by full path enumeration (-inf if none)."""
    edges, k, _ = chain.scores.shape
    mm = [[[NEG_INF] * k for _ in range(k)] for _ in range(edges)]
    for path, total in enumerate_chain(chain):
        for e in range(edges):
            i, j = path[e], path[e + 1]
            if total > mm[e][i][j]:
                mm[e][i][j] = total
    return mm


def _span_scores(provider, lattice_len, order, token_ids):
    table = {}
    for l in range(lattice_len - order):
        for span in itertools.product(token_ids, repeat=order + 1):
            table[(l, span)] = provider.score(order, l, span)
    return table


def sequence_argmax(provider, lattice_len, order, token_ids):
    """Exhaustive argmax of the order-``order`` objective.

    Visits sequences in lexicographic order and keeps strict
    improvements only, so ties resolve to the smallest sequence.
    Returns (ids, score); (None, -inf) if nothing is feasible.
    """
    token_ids = sorted(token_ids)
    table = _span_scores(provider, lattice_len, order, token_ids)
    best = [None, NEG_INF]

    def visit(prefix, total):
        t = len(prefix)
        if t == lattice_len:
            if total > best[1]:
                best[0], best[1] = list(prefix), total
            return
        for tok in token_ids:
            prefix.append(tok)
            gain = 0.0
            if order == 0:
                gain = table[(t, (tok,))]
            elif t >= order:
                gain = table[(t - order, tuple(prefix[t - order:]))]
            if gain > NEG_INF:
                visit(prefix, total + gain)
            prefix.pop()

    visit([], 0.0)
    return best[0], best[1]


def sequence_max_marginals(provider, lattice_len, order, token_ids):
    """True per-position span max-marginals by full enumeration.

    Returns a list over positions of {span: best full-sequence score},
    omitting spans no finite-score sequence passes through.
    """
    token_ids = sorted(token_ids)
    table = _span_scores(provider, lattice_len, order, token_ids)
    mm = [{} for _ in range(lattice_len - order)]

    for seq in itertools.product(token_ids, repeat=lattice_len):
        total = 0.0
        for l in range(lattice_len - order):
            val = table[(l, seq[l:l + order + 1])]
            if val == NEG_INF:
                total = NEG_INF
                break
            total += val
        if total == NEG_INF:
            continue
        for l in range(lattice_len - order):
            span = seq[l:l + order + 1]
            if total > mm[l].get(span, NEG_INF):
                mm[l][span] = total
    return mm


def repair_fixpoint(kept, order):
    """Orphan removal on per-position span lists, mirroring the pruning
    contract: a span must overlap some neighbour on ``order`` tokens."""
    kept = [list(s) for s in kept]
    changed = True
    while changed:
        changed = False
        for l, here in enumerate(kept):
            before = kept[l - 1] if l > 0 else None
            after = kept[l + 1] if l + 1 < len(kept) else None
            for span in list(here):
                ok = True
                if before is not None and not any(
                        p[1:] == span[:-1] for p in before):
                    ok = False
                if after is not None and not any(
                        span[1:] == n[:-1] for n in after):
                    ok = False
                if not ok:
                    here.remove(span)
                    changed = True
    return kept
