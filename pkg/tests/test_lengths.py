import itertools

import pytest

from cascadec import (
    LengthWindow,
    UnterminatedHypothesisError,
    Vocabulary,
    model_score,
    strip_padding,
    wrap_potentials,
)
from conftest import NEG_INF, random_table
from oracles import sequence_argmax


def make_wrapped(rng, num_content, predicted, delta, max_order=2):
    window = LengthWindow(predicted, delta)
    base = random_table(rng, num_content, window.lattice_len, max_order)
    return base, wrap_potentials(base, window), window


class TestLengthWindow:
    def test_lattice_len(self):
        assert LengthWindow(5, 3).lattice_len == 9
        assert LengthWindow(1, 0).lattice_len == 2

    def test_invalid_windows(self):
        with pytest.raises(ValueError):
            LengthWindow(5, -1)
        with pytest.raises(ValueError):
            LengthWindow(2, 2)  # reaches below length 1


class TestRewriteRules:
    def test_eos_to_pad_scores_zero(self, rng):
        base, wrapped, win = make_wrapped(rng, 2, predicted=4, delta=1)
        eos, pad = wrapped.vocab.eos_id, wrapped.vocab.pad_id
        assert wrapped.score(1, 3, (eos, pad)) == 0.0

    def test_pad_to_pad_scores_zero(self, rng):
        base, wrapped, win = make_wrapped(rng, 2, predicted=4, delta=1)
        pad = wrapped.vocab.pad_id
        assert wrapped.score(1, 4, (pad, pad)) == 0.0

    def test_eos_to_non_pad_forbidden(self, rng):
        base, wrapped, win = make_wrapped(rng, 2, predicted=4, delta=1)
        eos = wrapped.vocab.eos_id
        assert wrapped.score(1, 3, (eos, 0)) == NEG_INF
        assert wrapped.score(1, 3, (eos, eos)) == NEG_INF

    def test_nothing_else_to_pad(self, rng):
        base, wrapped, win = make_wrapped(rng, 2, predicted=4, delta=1)
        pad = wrapped.vocab.pad_id
        assert wrapped.score(1, 3, (0, pad)) == NEG_INF

    def test_eos_not_too_early(self, rng):
        # predicted 5, delta 2: earliest legal eos is 1-based position 3
        base, wrapped, win = make_wrapped(rng, 2, predicted=5, delta=2)
        eos = wrapped.vocab.eos_id
        assert wrapped.score(1, 0, (0, eos)) == NEG_INF  # eos at position 2
        assert wrapped.score(1, 1, (0, eos)) != NEG_INF  # eos at position 3
        assert wrapped.score(1, 2, (0, eos)) != NEG_INF  # eos at position 4

    def test_eos_boundary_exact(self, rng):
        base, wrapped, win = make_wrapped(rng, 2, predicted=5, delta=2)
        eos = wrapped.vocab.eos_id
        low = win.predicted_l - win.delta_l  # 1-based earliest eos
        # span ending in eos with last token at 1-based position low - 1
        assert wrapped.score(1, low - 3, (0, eos)) == NEG_INF
        # same span one position later carries the base conditional
        span = (0, eos)
        assert wrapped.score(1, low - 2, span) == base.score(1, low - 2, span)

    def test_final_position_must_be_pad(self, rng):
        base, wrapped, win = make_wrapped(rng, 2, predicted=4, delta=0)
        eos, pad = wrapped.vocab.eos_id, wrapped.vocab.pad_id
        last_l = win.lattice_len - 2  # bigram ending on the final slot
        assert wrapped.score(1, last_l, (eos, pad)) == 0.0
        assert wrapped.score(1, last_l, (0, 0)) == NEG_INF
        assert wrapped.score(1, last_l, (0, eos)) == NEG_INF

    def test_interior_scores_pass_through(self, rng):
        base, wrapped, win = make_wrapped(rng, 3, predicted=5, delta=1)
        for span in [(0, 1), (2, 0), (1, 1)]:
            assert wrapped.score(1, 1, span) == base.score(1, 1, span)

    def test_context_and_hints_forwarded(self, rng):
        calls = []
        base, wrapped, _ = make_wrapped(rng, 2, predicted=3, delta=0)
        base.set_context = lambda ids: calls.append(("ctx", list(ids)))
        base.reuse_hint = lambda it: calls.append(("reuse", it))
        wrapped.set_context([1, 2])
        wrapped.reuse_hint(3)
        assert calls == [("ctx", [1, 2]), ("reuse", 3)]


class TestPathSoundness:
    """Exhaustive checks over every full lattice path of tiny instances."""

    def finite_paths(self, wrapped, lattice_len, order):
        all_ids = range(len(wrapped.vocab.tokens))
        skip = wrapped.vocab.epsilon_id
        ids = [i for i in all_ids if i != skip]
        for seq in itertools.product(ids, repeat=lattice_len):
            score = model_score(wrapped, seq, order)
            if score > NEG_INF:
                yield list(seq), score

    @pytest.mark.parametrize("predicted,delta,order", [
        (3, 0, 1), (3, 1, 1), (4, 2, 1), (3, 1, 2), (2, 1, 2),
    ])
    def test_window_soundness(self, rng, predicted, delta, order):
        base, wrapped, win = make_wrapped(rng, 2, predicted, delta,
                                          max_order=order)
        eos = wrapped.vocab.eos_id
        pad = wrapped.vocab.pad_id
        low = predicted - delta
        found = 0
        for seq, score in self.finite_paths(wrapped, win.lattice_len, order):
            found += 1
            assert eos in seq, seq
            pos = seq.index(eos) + 1  # 1-based
            assert low <= pos <= win.lattice_len - 1, seq
            assert seq[-1] == pad, seq
            assert all(t == pad for t in seq[pos:]), seq
            stripped = strip_padding(seq, wrapped.vocab)
            assert eos not in stripped and pad not in stripped
            assert low - 1 <= len(stripped) <= predicted + delta - 1
        assert found > 0

    def test_every_window_length_is_reachable(self, rng):
        base, wrapped, win = make_wrapped(rng, 2, predicted=4, delta=2,
                                          max_order=1)
        lengths = set()
        for seq, _ in self.finite_paths(wrapped, win.lattice_len, 1):
            lengths.add(len(strip_padding(seq, wrapped.vocab)))
        assert lengths == {1, 2, 3, 4, 5}  # predicted-1 +- delta

    def test_trailing_pad_neutrality(self, rng):
        # spans whose last token falls after the first eos score exactly 0,
        # so the pad tail never shifts a candidate's total
        base, wrapped, win = make_wrapped(rng, 2, predicted=4, delta=2,
                                          max_order=1)
        for seq, score in self.finite_paths(wrapped, win.lattice_len, 1):
            pos = seq.index(wrapped.vocab.eos_id)
            tail = [wrapped.score(1, l, tuple(seq[l:l + 2]))
                    for l in range(pos, win.lattice_len - 1)]
            assert all(v == 0.0 for v in tail)
            head = sum(wrapped.score(1, l, tuple(seq[l:l + 2]))
                       for l in range(pos))
            assert head == score

    def test_delta_zero_equals_hard_length_constraint(self, rng):
        base, wrapped, win = make_wrapped(rng, 2, predicted=4, delta=0,
                                          max_order=1)
        ids, best = sequence_argmax(
            wrapped, win.lattice_len, 1,
            [i for i in range(len(wrapped.vocab.tokens))])
        # hard constraint: exactly predicted-1 content tokens then eos,
        # scored by the unwrapped base potentials
        eos = base.vocab.eos_id
        content = [i for i in base.vocab.scorable_ids if i != eos]
        hard_best, hard_ids = NEG_INF, None
        for seq in itertools.product(sorted(content), repeat=3):
            full = list(seq) + [eos]
            score = model_score(base, full, 1)
            if score > hard_best:
                hard_best, hard_ids = score, full
        assert best == pytest.approx(hard_best, abs=1e-12)
        assert strip_padding(ids, wrapped.vocab) == hard_ids[:-1]

    def test_optimum_monotone_in_delta(self, rng):
        # nested feasible sets: widening the window cannot hurt the optimum
        import numpy as np

        base = random_table(np.random.default_rng(7), 2, 7, 1)
        best = []
        for delta in (0, 1, 2):
            window = LengthWindow(4, delta)
            wrapped = wrap_potentials(base, window)
            _, score = sequence_argmax(
                wrapped, window.lattice_len, 1,
                list(range(len(wrapped.vocab.tokens))))
            best.append(score)
        assert best[0] <= best[1] + 1e-12 <= best[2] + 2e-12


class TestStripPadding:
    def test_example_sentence(self):
        v = Vocabulary((".", "amazing", "an", "woman", "<eos>")).with_pad()
        path = v.encode(["an", "amazing", "woman", ".", "<eos>",
                         "<pad>", "<pad>", "<pad>"])
        assert v.decode(strip_padding(path, v)) == \
            ["an", "amazing", "woman", "."]

    def test_immediate_eos(self):
        v = Vocabulary(("a", "<eos>")).with_pad()
        assert strip_padding(v.encode(["<eos>", "<pad>", "<pad>"]), v) == []

    def test_missing_eos_is_an_error(self):
        v = Vocabulary(("a", "<eos>")).with_pad()
        with pytest.raises(UnterminatedHypothesisError, match="unterminated"):
            strip_padding(v.encode(["a", "a"]), v)
