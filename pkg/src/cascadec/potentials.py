"""Log-potential providers.

A provider assigns a log-score to a span of ``m + 1`` token ids starting
at lattice position ``l``, for every order ``m`` up to ``max_order``.
Scores are deterministic and safe to query from multiple threads.

Two concrete providers live here: a count-based m-gram model with add-k
smoothing, and a static table backed by a text file.  The streaming
client for external scorers is in :mod:`cascadec.stream`.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod

from .errors import CascadecError, PotentialFileError
from .vocab import EOS_TOKEN, Vocabulary

NEG_INF = float("-inf")


class PotentialProvider(ABC):
    """Interface shared by all scorers."""

    vocab: Vocabulary
    max_order: int

    @abstractmethod
    def score(self, m: int, l: int, span: tuple[int, ...]) -> float:
        """Log-potential of ``span`` (length ``m + 1``) starting at ``l``."""

    def score_many(self, queries) -> list[float]:
        """Batch entry point; providers with transport costs override it."""
        return [self.score(m, l, span) for m, l, span in queries]

    def set_context(self, source_ids) -> None:
        """Install the conditioning payload (e.g. a source sentence)."""

    def reuse_hint(self, iteration: int) -> None:
        """Tell stateful scorers a new cascade iteration is starting."""


class NgramModel(PotentialProvider):
    """Count-based m-gram model with add-k smoothing.

    Potentials are position-independent:
    ``f(span) = log P(span[-1] | span[:-1])`` with the context truncated
    to the model order.  Smoothing guarantees each conditional sums to
    one over the scorable vocabulary.
    """

    def __init__(self, vocab: Vocabulary, order: int, add_k: float, counts):
        if order < 1:
            raise ValueError("order must be >= 1")
        if add_k <= 0:
            raise ValueError("add_k must be > 0")
        self.vocab = vocab
        self.order = order
        self.add_k = add_k
        self.max_order = order - 1
        # counts[ctx_tuple][token_id] and totals[ctx_tuple]
        self._counts = counts
        self._totals = {ctx: sum(c.values()) for ctx, c in counts.items()}
        self._event_ids = set(vocab.scorable_ids)
        self._v = len(self._event_ids)

    def log_prob(self, token_id: int, context: tuple[int, ...]) -> float:
        if token_id not in self._event_ids:
            return NEG_INF
        context = tuple(context[-(self.order - 1):]) if self.order > 1 else ()
        hits = self._counts.get(context, {})
        num = hits.get(token_id, 0) + self.add_k
        den = self._totals.get(context, 0) + self.add_k * self._v
        return math.log(num / den)

    def score(self, m, l, span):
        if len(span) != m + 1:
            raise ValueError("span length must be m + 1")
        return self.log_prob(span[-1], span[:-1])

    def save(self, path) -> None:
        payload = {
            "format": "ngram-counts",
            "version": 1,
            "order": self.order,
            "add_k": self.add_k,
            "tokens": list(self.vocab.tokens),
            "counts": [
                [list(ctx), sorted(cnt.items())]
                for ctx, cnt in sorted(self._counts.items())
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "NgramModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != "ngram-counts":
            raise CascadecError(f"{path}: not an ngram model file")
        counts = {
            tuple(ctx): dict((int(t), int(c)) for t, c in items)
            for ctx, items in payload["counts"]
        }
        vocab = Vocabulary(tuple(payload["tokens"]))
        return cls(vocab, int(payload["order"]), float(payload["add_k"]), counts)


def train_ngram(corpus, order: int, add_k: float,
                eos_token: str = EOS_TOKEN) -> NgramModel:
    """Count all grams up to ``order`` tokens over an eos-terminated corpus.

    ``corpus`` is an iterable of token lists; ``eos_token`` is appended
    to any sentence that does not already end with it.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if add_k <= 0:
        raise ValueError("add_k must be > 0")
    sentences = [list(sent) for sent in corpus]
    if not sentences:
        raise CascadecError("empty corpus")
    for sent in sentences:
        if not sent or sent[-1] != eos_token:
            sent.append(eos_token)

    vocab = Vocabulary.from_corpus(sentences)
    counts: dict[tuple[int, ...], dict[int, int]] = {}
    for sent in sentences:
        ids = vocab.encode(sent)
        for i, tok in enumerate(ids):
            for ctx_len in range(min(i, order - 1) + 1):
                ctx = tuple(ids[i - ctx_len:i])
                bucket = counts.setdefault(ctx, {})
                bucket[tok] = bucket.get(tok, 0) + 1
    return NgramModel(vocab, order, add_k, counts)


class TablePotentials(PotentialProvider):
    """Potentials stored explicitly per (order, position, span).

    Missing records score -inf, i.e. the span is masked out.
    """

    def __init__(self, vocab: Vocabulary, lattice_len: int, max_order: int,
                 records: dict[tuple[int, int, tuple[int, ...]], float]):
        self.vocab = vocab
        self.lattice_len = lattice_len
        self.max_order = max_order
        self.records = dict(records)

    def score(self, m, l, span):
        return self.records.get((m, l, tuple(span)), NEG_INF)


FILE_MAGIC = "markov-potentials 1"


def save_potentials(provider: PotentialProvider, lattice_len: int,
                    orders: int, path) -> None:
    """Materialise a provider into the text table format.

    Every span over the scorable vocabulary is enumerated for each order
    up to ``orders`` inclusive, so this is for small vocabularies only.
    """
    vocab = provider.vocab
    ids = vocab.scorable_ids
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(FILE_MAGIC + "\n")
        fh.write(f"vocab {len(vocab)}\n")
        for i, tok in enumerate(vocab.tokens):
            fh.write(f"{i} {tok}\n")
        fh.write(f"orders {orders}\n")
        fh.write(f"length {lattice_len}\n")
        for m in range(orders + 1):
            spans = [()]
            for _ in range(m + 1):
                spans = [s + (i,) for s in spans for i in ids]
            for l in range(lattice_len - m):
                for span in spans:
                    val = provider.score(m, l, span)
                    text = "-inf" if val == NEG_INF else repr(val)
                    fh.write(f"p {m} {l} {' '.join(map(str, span))} {text}\n")


def load_potentials(path) -> TablePotentials:
    """Parse the text table format, diagnosing errors by line number."""
    header: dict[str, int] = {}
    tokens: list[str] = []
    records: dict[tuple[int, int, tuple[int, ...]], float] = {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    def fail(msg, n):
        raise PotentialFileError(msg, line=n)

    it = iter(enumerate(lines, start=1))
    pending_vocab = 0
    stage = "magic"
    for n, raw in it:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if stage == "magic":
            if line != FILE_MAGIC:
                fail(f"expected header {FILE_MAGIC!r}", n)
            stage = "vocab"
        elif stage == "vocab":
            if parts[0] != "vocab" or len(parts) != 2:
                fail("expected 'vocab N'", n)
            try:
                pending_vocab = int(parts[1])
            except ValueError:
                fail("vocab size is not an integer", n)
            stage = "tokens" if pending_vocab else "orders"
        elif stage == "tokens":
            if len(parts) != 2:
                fail("expected '<id> <token>'", n)
            try:
                idx = int(parts[0])
            except ValueError:
                fail("token id is not an integer", n)
            if idx != len(tokens):
                fail(f"token ids must be dense, expected {len(tokens)}", n)
            tokens.append(parts[1])
            if len(tokens) == pending_vocab:
                stage = "orders"
        elif stage == "orders":
            if parts[0] != "orders" or len(parts) != 2:
                fail("expected 'orders M'", n)
            try:
                header["orders"] = int(parts[1])
            except ValueError:
                fail("orders is not an integer", n)
            stage = "length"
        elif stage == "length":
            if parts[0] != "length" or len(parts) != 2:
                fail("expected 'length L'", n)
            try:
                header["length"] = int(parts[1])
            except ValueError:
                fail("length is not an integer", n)
            stage = "records"
        else:
            if parts[0] != "p":
                fail("expected a 'p' record", n)
            try:
                m = int(parts[1])
                l = int(parts[2])
            except (ValueError, IndexError):
                fail("malformed record header", n)
            if len(parts) != 4 + m + 1:
                fail(f"record for order {m} needs {m + 1} span ids", n)
            try:
                span = tuple(int(x) for x in parts[3:3 + m + 1])
            except ValueError:
                fail("span ids must be integers", n)
            for tid in span:
                if not 0 <= tid < len(tokens):
                    fail(f"unknown token id {tid}", n)
            text = parts[-1]
            try:
                val = NEG_INF if text == "-inf" else float(text)
            except ValueError:
                fail(f"bad log-potential {text!r}", n)
            if math.isnan(val) or val == float("inf"):
                fail(f"bad log-potential {text!r}", n)
            key = (m, l, span)
            if key in records:
                fail(f"duplicate record {key}", n)
            records[key] = val
    if stage != "records":
        raise PotentialFileError("truncated file, missing header sections")
    vocab = Vocabulary(tuple(tokens))
    return TablePotentials(vocab, header["length"], header["orders"], records)


def model_score(provider: PotentialProvider, ids, order: int) -> float:
    """Score of a full sequence under the order-``order`` model:
    the sum of one potential per span."""
    ids = tuple(ids)
    if order == 0:
        return sum(provider.score(0, l, (t,)) for l, t in enumerate(ids))
    total = 0.0
    for l in range(len(ids) - order):
        total += provider.score(order, l, ids[l:l + order + 1])
    return total
