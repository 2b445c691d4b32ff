"""scikit-learn style facade.

``CascadeDecoder`` behaves like an estimator: ``fit`` trains the
internal m-gram scorer on a corpus, ``predict`` decodes a batch of
source sentences.  Parameters follow the get_params/set_params protocol
so the decoder composes with pipelines and grid search.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .cascade import DecodeConfig, decode
from .potentials import train_ngram


def as_token_lists(X):
    """Accept strings or token sequences; return lists of tokens."""
    out = []
    for row in X:
        if isinstance(row, str):
            out.append(row.split())
        else:
            out.append([str(t) for t in row])
    if not out:
        raise ValueError("empty input")
    return out


class CascadeDecoder(BaseEstimator):
    def __init__(self, k=16, iterations=2, delta_l=3, ngram_order=3,
                 add_k=0.1, length_slope=1.0, length_intercept=0.0,
                 length_relax=True):
        self.k = k
        self.iterations = iterations
        self.delta_l = delta_l
        self.ngram_order = ngram_order
        self.add_k = add_k
        self.length_slope = length_slope
        self.length_intercept = length_intercept
        self.length_relax = length_relax

    def fit(self, X, y=None):
        corpus = as_token_lists(X)
        if self.ngram_order < self.iterations:
            raise ValueError(
                "ngram_order must be >= iterations so every requested "
                "order has potentials")
        self.scorer_ = train_ngram(corpus, self.ngram_order, self.add_k)
        return self

    def _config(self) -> DecodeConfig:
        return DecodeConfig(
            k=self.k, iterations=self.iterations, delta_l=self.delta_l,
            length_slope=self.length_slope,
            length_intercept=self.length_intercept,
            length_relax=self.length_relax)

    def decode_one(self, source):
        if not hasattr(self, "scorer_"):
            raise NotFittedError("CascadeDecoder is not fitted")
        [tokens] = as_token_lists([source])
        return decode(tokens, self.scorer_, self._config())

    def predict(self, X):
        return [" ".join(self.decode_one(src).tokens)
                for src in as_token_lists(X)]
