import math

import numpy as np
import pytest

from cascadec import (
    CascadecError,
    PotentialFileError,
    TablePotentials,
    Vocabulary,
    load_potentials,
    model_score,
    save_potentials,
    train_ngram,
)
from conftest import NEG_INF, random_corpus, random_ngram, random_table


class TestNgramModel:
    def test_hand_counted_bigram(self):
        # corpus "a b <eos>", order 2, add_k=1, V = {a, b, <eos>}:
        # count(a -> b) = 1, count(a -> .) = 1, so
        # P(b | a) = (1 + 1) / (1 + 3) = 0.5
        model = train_ngram([["a", "b"]], order=2, add_k=1.0)
        a, b = model.vocab.id("a"), model.vocab.id("b")
        assert model.log_prob(b, (a,)) == pytest.approx(math.log(0.5))

    def test_unseen_context_uniform(self):
        model = train_ngram([["a", "b"]], order=2, add_k=0.5)
        v = len(model.vocab.scorable_ids)
        unseen = (model.vocab.id("b"),)  # "b" is never a context start
        # b only precedes <eos> in training, so P(a | b) is pure smoothing
        assert model.log_prob(model.vocab.id("a"), unseen) == \
            pytest.approx(math.log(0.5 / (1 + 0.5 * v)))

    def test_normalization(self, rng):
        model = random_ngram(rng, num_content=4, order=3, sentences=20)
        ids = model.vocab.scorable_ids
        for _ in range(100):
            ctx = tuple(rng.choice(ids, size=int(rng.integers(0, 3))))
            total = sum(math.exp(model.log_prob(t, ctx)) for t in ids)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_context_truncation(self, tiny_model):
        v = tiny_model.vocab
        long_ctx = tuple(v.encode(["b", "a", "b"]))
        short_ctx = tuple(v.encode(["a", "b"]))
        assert tiny_model.log_prob(v.id("a"), long_ctx) == \
            tiny_model.log_prob(v.id("a"), short_ctx)

    def test_score_is_position_independent(self, tiny_model):
        v = tiny_model.vocab
        span = tuple(v.encode(["a", "b"]))
        assert tiny_model.score(1, 0, span) == tiny_model.score(1, 3, span)

    def test_empty_corpus(self):
        with pytest.raises(CascadecError, match="empty corpus"):
            train_ngram([], 2, 0.1)

    def test_bad_params(self):
        with pytest.raises(ValueError):
            train_ngram([["a"]], 0, 0.1)
        with pytest.raises(ValueError):
            train_ngram([["a"]], 2, 0.0)

    def test_save_load_round_trip(self, tiny_model, tmp_path, rng):
        path = tmp_path / "m.json"
        tiny_model.save(path)
        loaded = tiny_model.load(path)
        assert loaded.vocab.tokens == tiny_model.vocab.tokens
        ids = loaded.vocab.scorable_ids
        for _ in range(50):
            span = tuple(rng.choice(ids, size=int(rng.integers(1, 4))))
            m = len(span) - 1
            assert loaded.score(m, 0, span) == tiny_model.score(m, 0, span)

    def test_load_rejects_other_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(CascadecError, match="not an ngram model"):
            from cascadec import NgramModel
            NgramModel.load(path)


class TestPotentialFile:
    def test_round_trip(self, tiny_model, tmp_path):
        path = tmp_path / "pot.txt"
        save_potentials(tiny_model, lattice_len=4, orders=2, path=path)
        table = load_potentials(path)
        assert table.vocab.tokens == tiny_model.vocab.tokens
        assert table.lattice_len == 4 and table.max_order == 2
        for (m, l, span), val in table.records.items():
            assert val == tiny_model.score(m, l, span)

    def test_absent_span_is_masked(self, tiny_model, tmp_path):
        path = tmp_path / "pot.txt"
        save_potentials(tiny_model, lattice_len=3, orders=1, path=path)
        table = load_potentials(path)
        assert table.score(1, 5, (0, 1)) == NEG_INF  # beyond stored length

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "pot.txt"
        path.write_text(
            "markov-potentials 1\n\n# a comment\nvocab 2\n0 a\n1 <eos>\n"
            "orders 0\nlength 2\np 0 0 0 -1.5  # trailing comment\n")
        table = load_potentials(path)
        assert table.score(0, 0, (0,)) == -1.5

    def test_minus_inf_literal(self, tmp_path):
        path = tmp_path / "pot.txt"
        path.write_text(
            "markov-potentials 1\nvocab 2\n0 a\n1 <eos>\n"
            "orders 0\nlength 1\np 0 0 1 -inf\n")
        assert load_potentials(path).score(0, 0, (1,)) == NEG_INF

    @pytest.mark.parametrize("body,line,msg", [
        ("bogus-header\n", 1, "expected header"),
        ("markov-potentials 1\nvocab x\n", 2, "not an integer"),
        ("markov-potentials 1\nvocab 1\n5 a\n", 3, "dense"),
        ("markov-potentials 1\nvocab 1\n0 <eos>\norders 1\nlength nope\n",
         5, "not an integer"),
        ("markov-potentials 1\nvocab 1\n0 <eos>\norders 1\nlength 2\n"
         "p 0 0 7 -1\n", 6, "unknown token id"),
        ("markov-potentials 1\nvocab 1\n0 <eos>\norders 1\nlength 2\n"
         "p 0 0 0 nan\n", 6, "bad log-potential"),
        ("markov-potentials 1\nvocab 1\n0 <eos>\norders 1\nlength 2\n"
         "p 0 0 0 -1\np 0 0 0 -2\n", 7, "duplicate"),
    ])
    def test_malformed_files_name_the_line(self, tmp_path, body, line, msg):
        path = tmp_path / "bad.txt"
        path.write_text(body)
        with pytest.raises(PotentialFileError, match=msg) as exc:
            load_potentials(path)
        assert exc.value.line == line

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("markov-potentials 1\nvocab 1\n0 <eos>\n")
        with pytest.raises(PotentialFileError, match="truncated"):
            load_potentials(path)


class TestModelScore:
    def test_order_zero_sums_unaries(self, rng):
        table = random_table(rng, 2, 4, 0)
        ids = [0, 1, 0, table.vocab.eos_id]
        expect = sum(table.score(0, l, (t,)) for l, t in enumerate(ids))
        assert model_score(table, ids, 0) == pytest.approx(expect)

    def test_order_two_sums_trigrams(self, rng):
        table = random_table(rng, 2, 5, 2)
        ids = [0, 1, 1, 0, table.vocab.eos_id]
        expect = sum(table.score(2, l, tuple(ids[l:l + 3])) for l in range(3))
        assert model_score(table, ids, 2) == pytest.approx(expect)


def test_provider_thread_safety(tiny_model):
    from concurrent.futures import ThreadPoolExecutor

    v = tiny_model.vocab
    queries = [(1, 0, (i, j)) for i in v.scorable_ids for j in v.scorable_ids]
    expect = tiny_model.score_many(queries)
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda _: tiny_model.score_many(queries),
                                range(16)))
    assert all(r == expect for r in results)
