"""AdaBoost.MH with real-valued, one-attribute weak hypotheses.

Each round the weak learner scores every candidate rule by

    Z = W_0 + sum_l 2 * sqrt(W_+^l * W_-^l)

summed over the rule's blocks (``W_0`` is weight on pairs where a term rule
abstains), picks the minimum, and sets per-class confidences to
``0.5 * ln((W_+ + eps) / (W_- + eps))``.  Term rules match consecutive token
sequences in the description and abstain when the sequence is absent;
threshold rules split a scalar attribute at a midpoint and vote on both sides.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from .core import (
    K,
    SCALAR_ATTRIBUTES,
    AsClass,
    AsRecord,
    AstaxonError,
    ConfigError,
    EmptyDatasetError,
    FormatError,
    LabeledExample,
    Prediction,
    Ranking,
    decide,
)

log = logging.getLogger(__name__)

DESCRIPTION = "description"
ATTRIBUTE_ORDER = (DESCRIPTION,) + SCALAR_ATTRIBUTES
MODEL_MAGIC = "astaxon-model"
MODEL_VERSION = "v1"


class NoTextRuleError(AstaxonError):
    """No description term occurs in the training set."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def contains_sequence(terms: Sequence[str], seq: Sequence[str]) -> bool:
    n = len(seq)
    return any(tuple(terms[i : i + n]) == tuple(seq) for i in range(len(terms) - n + 1))


@dataclass(frozen=True)
class TermRule:
    terms: Tuple[str, ...]
    present: Tuple[float, ...]

    attribute = DESCRIPTION

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "present", tuple(float(c) for c in self.present))
        if not self.terms:
            raise ValueError("term rule needs at least one term")
        _check_confidences(self.present)

    def output(self, record: AsRecord) -> Tuple[float, ...]:
        if contains_sequence(record.description_terms, self.terms):
            return self.present
        return (0.0,) * K

    def describe(self) -> str:
        return f'{DESCRIPTION} "{" ".join(self.terms)}"'


@dataclass(frozen=True)
class ThresholdRule:
    attribute: str
    threshold: float
    below: Tuple[float, ...]
    above: Tuple[float, ...]

    def __post_init__(self):
        if self.attribute not in SCALAR_ATTRIBUTES:
            raise ValueError(f"unknown scalar attribute {self.attribute!r}")
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "below", tuple(float(c) for c in self.below))
        object.__setattr__(self, "above", tuple(float(c) for c in self.above))
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")
        _check_confidences(self.below)
        _check_confidences(self.above)

    @property
    def degenerate(self) -> bool:
        """True when both sides vote identically (no split information)."""
        return self.below == self.above

    def output(self, record: AsRecord) -> Tuple[float, ...]:
        return self.below if record.scalar(self.attribute) < self.threshold else self.above

    def describe(self) -> str:
        return f"{self.attribute} < {self.threshold:g}"


WeakHypothesis = Union[TermRule, ThresholdRule]


def _check_confidences(values: Tuple[float, ...]) -> None:
    if len(values) != K or not all(math.isfinite(v) for v in values):
        raise ValueError(f"need {K} finite confidences, got {values!r}")


def hypothesis_output(h: WeakHypothesis, x: AsRecord, y: AsClass) -> float:
    return h.output(x)[int(y)]


@dataclass(frozen=True)
class TrainConfig:
    rounds: int = 28
    smoothing: Optional[float] = None  # None -> 1 / (m * k)
    max_sequence_len: int = 2
    rng_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not isinstance(self.rounds, int) or self.rounds < 1:
            raise ConfigError(f"rounds must be a positive integer, got {self.rounds!r}")
        if self.smoothing is not None and not (self.smoothing > 0 and math.isfinite(self.smoothing)):
            raise ConfigError(f"smoothing must be positive, got {self.smoothing!r}")
        if not isinstance(self.max_sequence_len, int) or self.max_sequence_len < 1:
            raise ConfigError(f"max_sequence_len must be a positive integer, got {self.max_sequence_len!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def epsilon(self, m: int) -> float:
        return self.smoothing if self.smoothing is not None else 1.0 / (m * K)


@dataclass(frozen=True)
class Model:
    """Ordered weak hypotheses; ``f(x, y) = sum_t h_t(x, y)``.

    ``m`` and ``z_values`` are training diagnostics and are not persisted.
    """

    rounds: Tuple[WeakHypothesis, ...]
    smoothing: float
    max_sequence_len: int
    m: Optional[int] = field(default=None, compare=False)
    z_values: Tuple[float, ...] = field(default=(), compare=False)

    @property
    def T(self) -> int:
        return len(self.rounds)

    def scores(self, record: AsRecord) -> np.ndarray:
        total = np.zeros(K)
        for h in self.rounds:
            total += h.output(record)
        return total

    def ranking(self, record: AsRecord) -> Ranking:
        return Ranking(tuple(self.scores(record)))

    def header(self) -> str:
        return (
            f"{MODEL_MAGIC} {MODEL_VERSION} k={K} T={self.T} "
            f"eps={_fmt(self.smoothing)} maxseq={self.max_sequence_len}"
        )


def classify(model: Model, x: AsRecord) -> Prediction:
    return decide(model.ranking(x))


# -- training data -----------------------------------------------------------


class TrainingData:
    """Precomputed arrays for one training set.

    Attributes:
        labels: (m,) class ordinals.
        signs: (m, k) matrix of P(x, y) in {+1, -1}.
        scalars: (m, 5) float matrix in ``SCALAR_ATTRIBUTES`` order.
        sequences: candidate token sequences, sorted lexicographically.
        pair_seq, pair_ex: incidence pairs (sequence index, example index),
            one per example containing the sequence.
    """

    def __init__(self, examples: Sequence[LabeledExample], max_sequence_len: int = 2):
        if not examples:
            raise EmptyDatasetError("empty training set")
        self.examples = list(examples)
        self.max_sequence_len = max_sequence_len
        m = len(self.examples)
        self.labels = np.array([int(ex.label) for ex in self.examples], dtype=np.int64)
        self.signs = -np.ones((m, K))
        self.signs[np.arange(m), self.labels] = 1.0
        self.scalars = np.array(
            [[ex.record.scalar(a) for a in SCALAR_ATTRIBUTES] for ex in self.examples], dtype=np.float64
        )

        occurrences: Dict[Tuple[str, ...], List[int]] = {}
        for i, ex in enumerate(self.examples):
            terms = ex.record.description_terms
            grams = set()
            for n in range(1, max_sequence_len + 1):
                for j in range(len(terms) - n + 1):
                    grams.add(tuple(terms[j : j + n]))
            for g in grams:
                occurrences.setdefault(g, []).append(i)
        self.sequences: List[Tuple[str, ...]] = sorted(occurrences)
        self.sequence_index = {s: i for i, s in enumerate(self.sequences)}
        counts = [len(occurrences[s]) for s in self.sequences]
        self.pair_seq = np.repeat(np.arange(len(self.sequences), dtype=np.int64), counts)
        self.pair_ex = np.array([i for s in self.sequences for i in occurrences[s]], dtype=np.int64)

    @property
    def m(self) -> int:
        return len(self.examples)

    def outputs(self, h: WeakHypothesis) -> np.ndarray:
        """(m, k) matrix of h(x_i, y)."""
        out = np.zeros((self.m, K))
        if isinstance(h, TermRule):
            if len(h.terms) <= self.max_sequence_len and h.terms in self.sequence_index:
                s = self.sequence_index[h.terms]
                rows = self.pair_ex[self.pair_seq == s]
            else:
                rows = [
                    i for i, ex in enumerate(self.examples) if contains_sequence(ex.record.description_terms, h.terms)
                ]
            out[rows] = h.present
        else:
            col = self.scalars[:, SCALAR_ATTRIBUTES.index(h.attribute)]
            below = col < h.threshold
            out[below] = h.below
            out[~below] = h.above
        return out


def _as_data(S, max_sequence_len: int = 2) -> TrainingData:
    return S if isinstance(S, TrainingData) else TrainingData(S, max_sequence_len)


def _split_weights(D: np.ndarray, data: TrainingData) -> Tuple[np.ndarray, np.ndarray]:
    pos = np.where(data.signs > 0, D, 0.0)
    return pos, D - pos


def _confidences(w_pos: np.ndarray, w_neg: np.ndarray, eps: float) -> Tuple[float, ...]:
    return tuple(float(c) for c in 0.5 * np.log((w_pos + eps) / (w_neg + eps)))


# -- boosting primitives -----------------------------------------------------


def init_distribution(m: int) -> np.ndarray:
    if m < 1:
        raise EmptyDatasetError("empty training set")
    return np.full((m, K), 1.0 / (m * K))


def best_term_rule(D: np.ndarray, S, eps: float, max_len: int = 2) -> Tuple[TermRule, float]:
    """Minimum-Z term rule over every token n-gram (n <= max_len) in S.

    Ties resolve to the lexicographically smallest sequence.  Raises
    :class:`NoTextRuleError` when no example has a description term.
    """
    data = _as_data(S, max_len)
    n = len(data.sequences)
    if n == 0:
        raise NoTextRuleError("no description terms in training set")
    pos, neg = _split_weights(D, data)
    w_pos = np.empty((n, K))
    w_neg = np.empty((n, K))
    for y in range(K):
        w_pos[:, y] = np.bincount(data.pair_seq, weights=pos[data.pair_ex, y], minlength=n)
        w_neg[:, y] = np.bincount(data.pair_seq, weights=neg[data.pair_ex, y], minlength=n)
    w_absent = D.sum() - (w_pos.sum(axis=1) + w_neg.sum(axis=1))
    z = w_absent + 2.0 * np.sqrt(w_pos * w_neg).sum(axis=1)
    best = int(np.argmin(z))
    rule = TermRule(data.sequences[best], _confidences(w_pos[best], w_neg[best], eps))
    return rule, float(z[best])


def best_threshold_rule(D: np.ndarray, S, attribute: str, eps: float) -> Tuple[ThresholdRule, float]:
    """Minimum-Z split of a scalar attribute.

    Candidates are one threshold below the minimum value (empty lower block)
    followed by midpoints between consecutive distinct values; ties go to
    the smallest threshold.  An empty lower block copies the upper block's
    confidences, so a constant attribute yields a degenerate rule.
    """
    data = _as_data(S)
    pos, neg = _split_weights(D, data)
    values = data.scalars[:, SCALAR_ATTRIBUTES.index(attribute)]
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    zero = np.zeros((1, K))
    # prefix and suffix sums, never differences: empty classes stay exactly 0
    below_pos = np.vstack((zero, np.cumsum(pos[order], axis=0)))
    below_neg = np.vstack((zero, np.cumsum(neg[order], axis=0)))
    above_pos = np.vstack((np.cumsum(pos[order][::-1], axis=0)[::-1], zero))
    above_neg = np.vstack((np.cumsum(neg[order][::-1], axis=0)[::-1], zero))

    cuts = np.nonzero(sorted_vals[1:] != sorted_vals[:-1])[0] + 1  # rows below the split
    split_at = np.concatenate(([0], cuts))
    thresholds = np.concatenate(([sorted_vals[0] - 0.5], (sorted_vals[cuts - 1] + sorted_vals[cuts]) / 2.0))
    b_pos, b_neg = below_pos[split_at], below_neg[split_at]
    a_pos, a_neg = above_pos[split_at], above_neg[split_at]
    z = 2.0 * (np.sqrt(b_pos * b_neg).sum(axis=1) + np.sqrt(a_pos * a_neg).sum(axis=1))
    best = int(np.argmin(z))
    above = _confidences(a_pos[best], a_neg[best], eps)
    below = _confidences(b_pos[best], b_neg[best], eps) if best else above
    return ThresholdRule(attribute, float(thresholds[best]), below, above), float(z[best])


def _candidate(D, data, attribute, eps):
    try:
        if attribute == DESCRIPTION:
            return best_term_rule(D, data, eps, data.max_sequence_len)
        return best_threshold_rule(D, data, attribute, eps)
    except NoTextRuleError:
        return None


def select_weak_hypothesis(
    D: np.ndarray,
    S,
    config: TrainConfig = TrainConfig(),
    executor: Optional[ThreadPoolExecutor] = None,
) -> Tuple[WeakHypothesis, float]:
    """Best candidate across all six attributes as ``(rule, Z)``.

    Ties go to the earlier attribute in ``ATTRIBUTE_ORDER``.
    """
    data = _as_data(S, config.max_sequence_len)
    eps = config.epsilon(data.m)
    if executor is not None:
        results = list(executor.map(lambda a: _candidate(D, data, a, eps), ATTRIBUTE_ORDER))
    else:
        results = [_candidate(D, data, a, eps) for a in ATTRIBUTE_ORDER]
    ranked = [(r[1], i, r[0]) for i, r in enumerate(results) if r is not None]
    z, _, rule = min(ranked, key=lambda t: (t[0], t[1]))
    return rule, z


def update_distribution(D: np.ndarray, S, h: WeakHypothesis) -> Tuple[np.ndarray, float]:
    """Reweight by ``exp(-P * h)`` and renormalize; returns ``(D_next, Z_t)``."""
    data = _as_data(S)
    unnormalized = D * np.exp(-data.signs * data.outputs(h))
    z = float(unnormalized.sum())
    if not (z > 0 and math.isfinite(z)):
        raise RuntimeError(f"degenerate normalization Z_t={z}")
    return unnormalized / z, z


def train(S: Sequence[LabeledExample], config: TrainConfig = TrainConfig()) -> Model:
    data = _as_data(S, config.max_sequence_len)
    eps = config.epsilon(data.m)
    D = init_distribution(data.m)
    rounds: List[WeakHypothesis] = []
    z_values: List[float] = []
    executor = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for t in range(config.rounds):
            h, _ = select_weak_hypothesis(D, data, config, executor)
            D, z_t = update_distribution(D, data, h)
            rounds.append(h)
            z_values.append(z_t)
            log.debug("round %d: %s Z=%.6f", t + 1, h.describe(), z_t)
    finally:
        if executor is not None:
            executor.shutdown()
    return Model(tuple(rounds), eps, config.max_sequence_len, m=data.m, z_values=tuple(z_values))


def hamming_loss(model: Model, examples: Sequence[LabeledExample]) -> float:
    """Fraction of (x, y) pairs where sign(f(x, y)) != P(x, y); zero counts as wrong."""
    if not examples:
        raise EmptyDatasetError("no examples")
    wrong = 0
    for ex in examples:
        f = model.scores(ex.record)
        signs = -np.ones(K)
        signs[int(ex.label)] = 1.0
        wrong += int(np.count_nonzero(f * signs <= 0))
    return wrong / (len(examples) * K)


# -- persistence -------------------------------------------------------------


def _fmt_block(values: Iterable[float]) -> str:
    return ",".join(_fmt(v) for v in values)


def format_round(h: WeakHypothesis) -> str:
    if isinstance(h, TermRule):
        return f"term|{' '.join(h.terms)}|{_fmt_block(h.present)}"
    return f"thr|{h.attribute}|{_fmt(h.threshold)}|{_fmt_block(h.below)}|{_fmt_block(h.above)}"


def save_model(model: Model, sink: TextIO) -> None:
    sink.write(model.header() + "\n")
    for h in model.rounds:
        sink.write(format_round(h) + "\n")


def _parse_block(text: str, lineno: int) -> Tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != K:
        raise FormatError(f"expected {K} confidences, got {len(parts)}", lineno)
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise FormatError(f"bad confidence value in {text!r}", lineno) from None
    if not all(math.isfinite(v) for v in values):
        raise FormatError("non-finite confidence", lineno)
    return values


def _parse_header(line: str) -> Tuple[int, float, int]:
    parts = line.split()
    if len(parts) != 6 or parts[0] != MODEL_MAGIC:
        raise FormatError("not an astaxon model file", 1)
    if parts[1] != MODEL_VERSION:
        raise FormatError(f"unsupported model version {parts[1]!r} (expected {MODEL_VERSION})", 1)
    fields = {}
    for item in parts[2:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise FormatError(f"bad header field {item!r}", 1)
        fields[key] = value
    try:
        if int(fields["k"]) != K:
            raise FormatError(f"model has k={fields['k']}, expected {K}", 1)
        T, eps, maxseq = int(fields["T"]), float(fields["eps"]), int(fields["maxseq"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad header: {exc}", 1) from None
    if T < 0 or not (eps > 0 and math.isfinite(eps)) or maxseq < 1:
        raise FormatError("header values out of range", 1)
    return T, eps, maxseq


def parse_round(line: str, lineno: int) -> WeakHypothesis:
    fields = line.split("|")
    try:
        if fields[0] == "term" and len(fields) == 3:
            return TermRule(tuple(fields[1].split()), _parse_block(fields[2], lineno))
        if fields[0] == "thr" and len(fields) == 5:
            try:
                threshold = float(fields[2])
            except ValueError:
                raise FormatError(f"bad threshold {fields[2]!r}", lineno) from None
            return ThresholdRule(
                fields[1], threshold, _parse_block(fields[3], lineno), _parse_block(fields[4], lineno)
            )
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc), lineno) from None
    raise FormatError(f"malformed round line {line!r}", lineno)


def load_model(source: Iterable[str]) -> Model:
    lines = [raw.rstrip("\r\n") for raw in source]
    if not lines or not lines[0].strip():
        raise FormatError("empty model file", 1)
    T, eps, maxseq = _parse_header(lines[0])
    body = [(i, ln) for i, ln in enumerate(lines[1:], 2) if ln.strip()]
    if len(body) < T:
        raise FormatError(f"truncated model: header declares T={T} but only {len(body)} rounds present", len(lines) + 1)
    if len(body) > T:
        raise FormatError(f"extra round line beyond T={T}", body[T][0])
    rounds = tuple(parse_round(ln, i) for i, ln in body)
    return Model(rounds, eps, maxseq)
