"""Text normalization pipeline: case folding, punctuation stripping,
tokenization, stopword removal, and stemming.

The stages always run in that order. Stemming can map a surface form onto
a word that *is* in the stoplist (e.g. "being" stems to "be"), so the
stopword filter runs once more over the stemmed output; without that
second pass the output could contain stoplist entries through the back
door.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError
from .porter import stem

__all__ = [
    "StopwordList",
    "TokenizedDocument",
    "normalize_case",
    "strip_punctuation",
    "tokenize",
    "remove_stopwords",
    "stem",
    "preprocess_text",
    "preprocess_document",
    "load_stopwords",
    "default_stopwords",
]


@dataclass(frozen=True)
class StopwordList:
    """Set of lowercase words removed during preprocessing."""

    words: frozenset

    def __post_init__(self) -> None:
        for word in self.words:
            if not word:
                raise InputError("stopword list contains an empty entry")
            if word != word.lower():
                raise InputError(f"stopword {word!r} is not lowercase")
            if any(ch.isspace() for ch in word):
                raise InputError(f"stopword {word!r} contains whitespace")

    def __contains__(self, token: str) -> bool:
        return token in self.words

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class TokenizedDocument:
    """Document reduced to its normalized token sequence."""

    doc_id: str
    tokens: tuple


def normalize_case(text: str) -> str:
    return text.lower()


@lru_cache(maxsize=None)
def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def strip_punctuation(text: str) -> str:
    """Replace every Unicode punctuation character with a space.

    Hyphens and apostrophes count: "e-mail" becomes "e mail" and "don't"
    becomes "don t". The space (rather than deletion) keeps the two halves
    from fusing into a token that never appeared in the text.
    """
    return "".join(" " if _is_punctuation(ch) else ch for ch in text)


def tokenize(text: str) -> list:
    return text.split()


def remove_stopwords(tokens: Iterable[str], stoplist: StopwordList) -> list:
    return [tok for tok in tokens if tok not in stoplist]


def preprocess_text(text: str, stoplist: StopwordList) -> list:
    """Run the full pipeline over raw text and return the token list."""
    tokens = tokenize(strip_punctuation(normalize_case(text)))
    tokens = remove_stopwords(tokens, stoplist)
    stemmed = [stem(tok) for tok in tokens]
    # Second stopword pass; see module docstring.
    return remove_stopwords(stemmed, stoplist)


def preprocess_document(doc, stoplist: StopwordList) -> TokenizedDocument:
    return TokenizedDocument(
        doc_id=doc.doc_id, tokens=tuple(preprocess_text(doc.raw_text, stoplist))
    )


def _parse_stopword_lines(lines: Iterable[str], origin: str) -> StopwordList:
    words = set()
    for lineno, line in enumerate(lines, start=1):
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        if any(ch.isspace() for ch in entry):
            raise InputError(
                f"{origin}:{lineno}: stopword entry {entry!r} contains whitespace"
            )
        words.add(entry.lower())
    return StopwordList(words=frozenset(words))


def load_stopwords(path) -> StopwordList:
    """Load a newline-delimited stopword file. Blank lines and lines
    starting with # are skipped; entries are lowercased."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read stopword file {path}: {exc}") from exc
    return _parse_stopword_lines(text.splitlines(), origin=str(path))


def default_stopwords() -> StopwordList:
    """The English stopword list shipped with the package."""
    text = (
        resources.files("docshield.data").joinpath("stopwords.txt").read_text("utf-8")
    )
    return _parse_stopword_lines(text.splitlines(), origin="<default stopwords>")
