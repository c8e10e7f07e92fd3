"""Text preprocessing shared by documents and queries."""

import os
import unicodedata
from functools import lru_cache

from simpleclir.models.io import PACKAGE_DATA, iter_lines

STOPWORD_DIR = PACKAGE_DATA / "stopwords"


def _is_punctuation(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def strip_punctuation(token: str) -> str:
    """Remove Unicode punctuation at both ends of a token; interior characters are kept."""
    start, end = 0, len(token)
    while start < end and _is_punctuation(token[start]):
        start += 1
    while end > start and _is_punctuation(token[end - 1]):
        end -= 1
    return token[start:end]


def preprocess_text(raw: str, stopwords: frozenset[str] | set[str]) -> list[str]:
    """Lower-case, tokenize on whitespace, strip boundary punctuation and filter tokens.

    Stopwords and tokens shorter than two characters are dropped; order is preserved.

    Examples
    --------
    >>> preprocess_text("The Telephone, a device!", {"the", "a"})
    ['telephone', 'device']
    """
    tokens = []
    for piece in raw.lower().split():
        token = strip_punctuation(piece)
        if len(token) < 2 or token in stopwords:
            continue
        tokens.append(token)
    return tokens


def available_stopword_languages() -> list[str]:
    """Language codes of the shipped stopword lists."""
    return sorted(p.stem for p in STOPWORD_DIR.glob("*.txt"))


@lru_cache(maxsize=16)
def _load_shipped(language: str) -> frozenset[str]:
    return frozenset(line.strip().lower() for _, line in iter_lines(STOPWORD_DIR / f"{language}.txt"))


def load_stopwords(source: str | os.PathLike[str] | None) -> frozenset[str]:
    """Load a stopword list: one token per line.

    Args:
        source: Either a shipped language code (``"en"``, ``"es"``, ...), a path to a
            stopword file, or None for an empty list.
    """
    if source is None:
        return frozenset()
    if isinstance(source, str) and source in available_stopword_languages():
        return _load_shipped(source)
    return frozenset(line.strip().lower() for _, line in iter_lines(source))
