import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cascadec import ChainScores, TablePotentials, Vocabulary, train_ngram

NEG_INF = float("-inf")


def random_chain(rng, edges, k, mask_frac=0.1):
    """Random valid ChainScores: each edge keeps >= 1 feasible cell."""
    scores = rng.uniform(-5.0, 5.0, size=(edges, k, k))
    if mask_frac > 0:
        drop = rng.random((edges, k, k)) < mask_frac
        for e in range(edges):
            if drop[e].all():
                drop[e, rng.integers(k), rng.integers(k)] = False
        scores[drop] = NEG_INF
    return ChainScores(scores)


def random_table(rng, num_content, lattice_len, max_order, lo=-5.0, hi=-0.1):
    """TablePotentials with finite random scores on every span of the
    scorable vocabulary (content tokens + eos)."""
    letters = [chr(ord("a") + i) for i in range(num_content)]
    vocab = Vocabulary(tuple(letters) + ("<eos>",))
    ids = vocab.scorable_ids
    records = {}
    for m in range(max_order + 1):
        for l in range(lattice_len - m):
            for span in itertools.product(ids, repeat=m + 1):
                records[(m, l, span)] = float(rng.uniform(lo, hi))
    return TablePotentials(vocab, lattice_len, max_order, records)


def random_corpus(rng, num_content, sentences, max_len=6):
    letters = [chr(ord("a") + i) for i in range(num_content)]
    out = []
    for _ in range(sentences):
        n = int(rng.integers(1, max_len + 1))
        out.append([letters[int(rng.integers(num_content))] for _ in range(n)])
    return out


def random_ngram(rng, num_content=3, order=3, sentences=12, add_k=0.1):
    return train_ngram(random_corpus(rng, num_content, sentences), order, add_k)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def tiny_corpus():
    return [["a", "b", "a"], ["a", "b", "b"], ["b", "a", "a"],
            ["a", "b", "a", "b"], ["b", "b", "a"]]


@pytest.fixture
def tiny_model(tiny_corpus):
    return train_ngram(tiny_corpus, 3, 0.1)
