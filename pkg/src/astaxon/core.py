"""Domain types shared across the toolkit.

An AS is described by a list of preprocessed description terms and five
integer attributes.  A classifier produces a :class:`Ranking` (one real score
per class); :func:`decide` turns it into a :class:`Prediction`, abstaining
when no class has a strictly positive score.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

SCALAR_ATTRIBUTES = ("customers", "providers", "peers", "prefixes", "space")


class AstaxonError(Exception):
    """Base class for toolkit errors."""


class EmptyDatasetError(AstaxonError):
    """Raised when an operation needs at least one record and got none."""


class ConfigError(AstaxonError):
    """Raised for invalid run or training configuration."""


class FormatError(AstaxonError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AsClass(enum.IntEnum):
    LARGE_ISP = 0
    SMALL_ISP = 1
    CUSTOMER = 2
    UNIVERSITY = 3
    IXP = 4
    NIC = 5

    @property
    def token(self) -> str:
        return _CLASS_TOKENS[self]

    @classmethod
    def from_token(cls, token: str) -> "AsClass":
        try:
            return _TOKEN_CLASSES[token]
        except KeyError:
            raise ValueError(f"unknown class token {token!r}") from None


_CLASS_TOKENS = {
    AsClass.LARGE_ISP: "large_isp",
    AsClass.SMALL_ISP: "small_isp",
    AsClass.CUSTOMER: "customer",
    AsClass.UNIVERSITY: "university",
    AsClass.IXP: "ixp",
    AsClass.NIC: "nic",
}
_TOKEN_CLASSES = {v: k for k, v in _CLASS_TOKENS.items()}

CLASSES: Tuple[AsClass, ...] = tuple(AsClass)
K = len(CLASSES)


@dataclass(frozen=True)
class AsRecord:
    """One AS and its six attributes.

    Attributes:
        asn: AS number.
        description_terms: Stemmed, stop-word-free description tokens.
        customers, providers, peers: Relationship degrees.
        prefixes: Number of distinct advertised prefixes.
        space: Advertised address space in /24 units.
    """

    asn: int
    description_terms: Tuple[str, ...] = ()
    customers: int = 0
    providers: int = 0
    peers: int = 0
    prefixes: int = 0
    space: int = 0

    def __post_init__(self):
        if not isinstance(self.asn, int) or self.asn <= 0:
            raise ValueError(f"asn must be a positive integer, got {self.asn!r}")
        object.__setattr__(self, "description_terms", tuple(self.description_terms))
        for name in SCALAR_ATTRIBUTES:
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    def scalar(self, name: str) -> int:
        return getattr(self, name)


@dataclass(frozen=True)
class LabeledExample:
    record: AsRecord
    label: AsClass


@dataclass(frozen=True)
class Ranking:
    scores: Tuple[float, ...]

    def __post_init__(self):
        scores = tuple(float(s) for s in self.scores)
        if len(scores) != K:
            raise ValueError(f"ranking needs {K} scores, got {len(scores)}")
        if not all(math.isfinite(s) for s in scores):
            raise ValueError("ranking scores must be finite")
        object.__setattr__(self, "scores", scores)


@dataclass(frozen=True)
class Prediction:
    ranking: Ranking
    top_class: Optional[AsClass] = field(default=None)

    @property
    def abstained(self) -> bool:
        return self.top_class is None


def rank_order(ranking: Ranking) -> Tuple[AsClass, ...]:
    """Classes by descending score; equal scores keep ascending ordinal."""
    return tuple(sorted(CLASSES, key=lambda c: (-ranking.scores[c], int(c))))


def decide(ranking: Ranking) -> Prediction:
    """Top-ranked class, or abstention when its score is <= 0."""
    head = rank_order(ranking)[0]
    if ranking.scores[head] > 0:
        return Prediction(ranking, head)
    return Prediction(ranking, None)


def class_position(ranking: Ranking, label: AsClass) -> int:
    return rank_order(ranking).index(label)
