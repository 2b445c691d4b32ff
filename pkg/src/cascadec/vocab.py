"""Token <-> id tables with reserved end/pad/epsilon entries."""

from __future__ import annotations

from dataclasses import dataclass, field

EOS_TOKEN = "<eos>"
PAD_TOKEN = "<pad>"
EPSILON_TOKEN = "<eps>"


@dataclass(frozen=True)
class Vocabulary:
    """Dense token table.

    ``eos`` is always present.  ``pad`` only exists on vocabularies
    extended with :meth:`with_pad`, which happens at decode time when
    length relaxation is active.  ``epsilon`` is the segment-start input
    used by neural scorers and is optional as well.
    """

    tokens: tuple[str, ...]
    _ids: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = {tok: i for i, tok in enumerate(self.tokens)}
        if len(ids) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")
        if EOS_TOKEN not in ids:
            raise ValueError(f"vocabulary must contain {EOS_TOKEN}")
        object.__setattr__(self, "_ids", ids)

    @classmethod
    def from_corpus(cls, sentences, include_epsilon=False) -> "Vocabulary":
        """Sorted corpus tokens followed by the reserved entries."""
        seen = sorted({tok for sent in sentences for tok in sent})
        extra = [t for t in (EOS_TOKEN, EPSILON_TOKEN if include_epsilon else None)
                 if t is not None and t not in seen]
        return cls(tuple(seen) + tuple(extra))

    def with_pad(self) -> "Vocabulary":
        if PAD_TOKEN in self._ids:
            return self
        return Vocabulary(self.tokens + (PAD_TOKEN,))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def id(self, token: str) -> int:
        return self._ids[token]

    def token(self, idx: int) -> str:
        return self.tokens[idx]

    def encode(self, tokens) -> list[int]:
        return [self._ids[t] for t in tokens]

    def decode(self, ids) -> list[str]:
        return [self.tokens[i] for i in ids]

    @property
    def eos_id(self) -> int:
        return self._ids[EOS_TOKEN]

    @property
    def pad_id(self):
        return self._ids.get(PAD_TOKEN)

    @property
    def epsilon_id(self):
        return self._ids.get(EPSILON_TOKEN)

    @property
    def scorable_ids(self) -> list[int]:
        """Ids a base scorer assigns probability to: everything except
        the pad and epsilon markers."""
        skip = {self.pad_id, self.epsilon_id} - {None}
        return [i for i in range(len(self.tokens)) if i not in skip]
