"""Description-record preprocessing: tokenize, drop stop words, stem."""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import FrozenSet, Iterable, List, Union

from .porter import porter_stem

__all__ = [
    "StopWordList",
    "default_stopwords",
    "load_stopwords",
    "porter_stem",
    "preprocess",
    "remove_stopwords",
    "tokenize",
]

_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class StopWordList:
    words: FrozenSet[str]

    def __post_init__(self):
        if not self.words:
            raise ValueError("stop word list is empty")

    def __contains__(self, word: str) -> bool:
        return word in self.words


def parse_stopwords(lines: Iterable[str]) -> StopWordList:
    words = set()
    for line in lines:
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return StopWordList(frozenset(words))


def load_stopwords(path: Union[str, Path]) -> StopWordList:
    with open(path, encoding="utf-8") as fh:
        return parse_stopwords(fh)


def default_stopwords() -> StopWordList:
    """The bundled English stop-word list."""
    text = resources.files("astaxon.data").joinpath("stopwords.txt").read_text("utf-8")
    return parse_stopwords(text.splitlines())


def tokenize(text: str) -> List[str]:
    """Split on non-alphanumerics, lowercase, drop pure-digit tokens.

    >>> tokenize("KPMG LLP, tel. 555-0100")
    ['kpmg', 'llp', 'tel']
    """
    return [tok for tok in (m.lower() for m in _TOKEN_RE.findall(text)) if not tok.isdigit()]


def remove_stopwords(tokens: Iterable[str], stoplist: StopWordList) -> List[str]:
    return [tok for tok in tokens if tok not in stoplist]


def preprocess(descr: str, stoplist: StopWordList) -> List[str]:
    return [porter_stem(tok) for tok in remove_stopwords(tokenize(descr), stoplist)]
