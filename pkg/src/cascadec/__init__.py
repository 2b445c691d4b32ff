"""Cascaded lattice decoding for bounded-order sequence models."""

from .analysis import RunReport, beam_search, prune_by_ngram_score, \
    repetition_ratio, sweep
from .cascade import DecodeConfig, DecodeDiagnostics, DecodeResult, SpanSet, \
    build_chain, count_sequences, decode, init_unigram_set, prune_step
from .chain import ChainScores, MaxMarginalTable, ScanTrace, count_paths, \
    next_pow2, serial_max_marginals, tree_max_marginals, viterbi
from .errors import CascadecError, DegenerateChainError, \
    EmptyMaxMarginalError, InfeasibleChainError, LatticeDisconnectedError, \
    PotentialFileError, ProtocolError, UnterminatedHypothesisError
from .estimator import CascadeDecoder
from .lengths import LengthRelaxedProvider, LengthWindow, strip_padding, \
    wrap_potentials
from .potentials import NEG_INF, NgramModel, PotentialProvider, \
    TablePotentials, load_potentials, model_score, save_potentials, \
    train_ngram
from .stream import ProviderServer, StreamScorer
from .vocab import EOS_TOKEN, EPSILON_TOKEN, PAD_TOKEN, Vocabulary

__version__ = "0.1.0"

__all__ = [
    "CascadeDecoder", "CascadecError", "ChainScores", "DecodeConfig",
    "DecodeDiagnostics", "DecodeResult", "DegenerateChainError",
    "EOS_TOKEN", "EPSILON_TOKEN", "EmptyMaxMarginalError",
    "InfeasibleChainError", "LatticeDisconnectedError",
    "LengthRelaxedProvider", "LengthWindow", "MaxMarginalTable", "NEG_INF",
    "NgramModel", "PAD_TOKEN", "PotentialFileError", "PotentialProvider",
    "ProtocolError", "ProviderServer", "RunReport", "ScanTrace", "SpanSet",
    "StreamScorer", "TablePotentials", "UnterminatedHypothesisError",
    "Vocabulary", "beam_search", "build_chain", "count_paths",
    "count_sequences", "decode", "init_unigram_set", "load_potentials",
    "model_score", "next_pow2", "prune_by_ngram_score", "prune_step",
    "repetition_ratio", "save_potentials", "serial_max_marginals",
    "strip_padding", "sweep", "train_ngram", "tree_max_marginals", "viterbi",
    "wrap_potentials",
]
