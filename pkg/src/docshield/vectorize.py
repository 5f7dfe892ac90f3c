"""Bag-of-words vocabulary and sparse count matrix construction.

Token columns are assigned in lexicographic order so that two runs over
the same corpus always produce the same matrix and, downstream, the same
model file.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError
from .sparse import CsrMatrix

__all__ = ["Vocabulary", "build_vocabulary", "count_vectorize", "UnknownTally"]


@dataclass(frozen=True)
class Vocabulary:
    """Bijection between lemmas and contiguous column indices 0..V-1."""

    index_to_token: tuple
    token_to_index: dict = field(repr=False)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Vocabulary":
        ordered = tuple(sorted(set(tokens)))
        return cls(
            index_to_token=ordered,
            token_to_index={tok: j for j, tok in enumerate(ordered)},
        )

    def __len__(self) -> int:
        return len(self.index_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index


class UnknownTally:
    """Mutable counter for out-of-vocabulary tokens seen at transform time."""

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        self.count += n


def build_vocabulary(docs: Sequence, min_df: int = 1) -> Vocabulary:
    """Collect the sorted distinct tokens of all documents.

    `min_df` optionally drops tokens appearing in fewer than that many
    documents; the default keeps everything.
    """
    if min_df < 1:
        raise InputError(f"min_df must be >= 1, got {min_df}")
    df = Counter()
    for doc in docs:
        df.update(set(doc.tokens))
    if not df:
        raise InputError("cannot build a vocabulary: every document is empty")
    kept = [tok for tok, n in df.items() if n >= min_df]
    if not kept:
        raise InputError(
            f"min_df={min_df} removed every token; vocabulary would be empty"
        )
    return Vocabulary.from_tokens(kept)


def count_vectorize(
    docs: Sequence,
    vocab: Vocabulary,
    unknown_out: Optional[UnknownTally] = None,
) -> CsrMatrix:
    """Count in-vocabulary token occurrences per document.

    Tokens missing from the vocabulary are dropped; when `unknown_out` is
    given the number of dropped tokens is accumulated there (inference
    diagnostics).
    """
    rows = []
    for doc in docs:
        counts = Counter()
        unknown = 0
        for tok in doc.tokens:
            j = vocab.token_to_index.get(tok)
            if j is None:
                unknown += 1
            else:
                counts[j] += 1
        if unknown and unknown_out is not None:
            unknown_out.add(unknown)
        rows.append(sorted(counts.items()))
    return CsrMatrix.from_rows(n_cols=len(vocab), rows=rows, dtype=np.float64)
