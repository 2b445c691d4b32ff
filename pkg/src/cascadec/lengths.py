"""Length relaxation via pad / eos potential surgery.

Candidates of every length from ``L - dL`` to ``L + dL`` compete inside
one lattice of ``L + dL + 1`` positions.  A padding token is adjoined to
the vocabulary; the wrapped provider rewrites potentials so that

* eos and pad always transition to pad (score 0),
* nothing else may transition to pad,
* eos cannot appear before position ``L - dL`` (1-based),
* the final lattice position must be pad.

Trailing pads score 0, so paths that agree up to their first eos have
identical totals and lengths become directly comparable.  Lengths here
count the eos: a candidate of length ``n`` places its eos at 1-based
position ``n``.

Positions in the rules above are 1-based as in the case list; the code
below receives 0-based ``l`` and converts once, in :meth:`score`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnterminatedHypothesisError
from .potentials import NEG_INF, PotentialProvider
from .vocab import Vocabulary


@dataclass(frozen=True)
class LengthWindow:
    """Predicted length and tolerance; the lattice holds L + dL + 1 slots."""

    predicted_l: int
    delta_l: int

    def __post_init__(self):
        if self.delta_l < 0:
            raise ValueError("delta_l must be >= 0")
        if self.predicted_l - self.delta_l < 1:
            raise ValueError("window reaches below length 1")

    @property
    def lattice_len(self) -> int:
        return self.predicted_l + self.delta_l + 1


class LengthRelaxedProvider(PotentialProvider):
    """Wrap a base provider with the pad/eos rewrite rules."""

    def __init__(self, base: PotentialProvider, window: LengthWindow):
        self.base = base
        self.window = window
        self.vocab: Vocabulary = base.vocab.with_pad()
        self.max_order = base.max_order
        self._eos = self.vocab.eos_id
        self._pad = self.vocab.pad_id

    def set_context(self, source_ids):
        self.base.set_context(source_ids)

    def reuse_hint(self, iteration):
        self.base.reuse_hint(iteration)

    def score(self, m, l, span):
        span = tuple(span)
        eos, pad = self._eos, self._pad
        low = self.window.predicted_l - self.window.delta_l
        last_pos = l + m + 1  # 1-based position of the span's last token
        last = span[-1]

        # Every token of a path is the last token of some span in the
        # score sum, except tokens inside the very first span.  Those are
        # validated here so that no rule below can be bypassed through
        # the lattice prefix.
        if l == 0 and m >= 1:
            for i in range(m):
                tok, pos = span[i], i + 1
                if tok == eos and pos < low:
                    return NEG_INF
                if tok == pad and pos <= low:
                    return NEG_INF
                if i >= 1:
                    prev_i = span[i - 1]
                    if prev_i in (eos, pad) and tok != pad:
                        return NEG_INF
                    if tok == pad and prev_i not in (eos, pad):
                        return NEG_INF

        # A pad can only follow an eos, so it cannot occur at or before
        # the earliest legal eos position.
        if last == pad and last_pos <= low:
            return NEG_INF
        if m >= 1:
            prev = span[-2]
            if prev == eos:
                return 0.0 if last == pad else NEG_INF
            if prev == pad:
                return 0.0 if last == pad else NEG_INF
            if last == pad:  # nothing else transitions to pad
                return NEG_INF
        if last == eos and last_pos < low:
            return NEG_INF
        if last_pos == self.window.lattice_len:
            return 0.0 if last == pad else NEG_INF
        if pad in span:
            # pad surviving outside the structural cases above (possible
            # only for order-0 queries); it carries no score of its own
            return NEG_INF
        return self.base.score(m, l, span)


def wrap_potentials(base: PotentialProvider,
                    window: LengthWindow) -> LengthRelaxedProvider:
    return LengthRelaxedProvider(base, window)


def strip_padding(path_ids, vocab: Vocabulary) -> list[int]:
    """Drop the first eos and everything after it.

    A path decoded under a wrapped provider always terminates: the final
    pad can only be reached through an eos.
    """
    ids = list(path_ids)
    if vocab.eos_id not in ids:
        raise UnterminatedHypothesisError("unterminated hypothesis")
    return ids[: ids.index(vocab.eos_id)]
