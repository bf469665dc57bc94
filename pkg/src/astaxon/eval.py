"""Accuracy/coverage metrics and repeated random-subsampling validation.

Accuracy counts a test AS as correct only if the classifier does not abstain
and its top class is the label.  Coverage is the mean zero-based position of
the true class in the full descending ranking (positions are defined even
when every score is non-positive).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .boosting import Model, TrainConfig, classify, train
from .core import CLASSES, K, ConfigError, EmptyDatasetError, LabeledExample, Prediction, rank_order


def _require(test: Sequence[LabeledExample]) -> None:
    if not test:
        raise EmptyDatasetError("empty test set")


def _positions(model: Model, test: Sequence[LabeledExample]) -> List[int]:
    return [rank_order(model.ranking(ex.record)).index(ex.label) for ex in test]


def accuracy(model: Model, test: Sequence[LabeledExample]) -> float:
    _require(test)
    hits = sum(classify(model, ex.record).top_class == ex.label for ex in test)
    return hits / len(test)


def coverage(model: Model, test: Sequence[LabeledExample]) -> float:
    _require(test)
    return sum(_positions(model, test)) / len(test)


def top2_rate(model: Model, test: Sequence[LabeledExample]) -> float:
    _require(test)
    return sum(p <= 1 for p in _positions(model, test)) / len(test)


def per_class_recall(model: Model, test: Sequence[LabeledExample]) -> Tuple[Optional[float], ...]:
    """Per-class fraction predicted correctly; ``None`` for classes absent from ``test``."""
    _require(test)
    return _recall([classify(model, ex.record) for ex in test], test)


def _recall(preds: Sequence[Prediction], test: Sequence[LabeledExample]) -> Tuple[Optional[float], ...]:
    seen = [0] * K
    hit = [0] * K
    for pred, ex in zip(preds, test):
        seen[ex.label] += 1
        hit[ex.label] += pred.top_class == ex.label
    return tuple(hit[c] / seen[c] if seen[c] else None for c in range(K))


@dataclass(frozen=True)
class ClassDistribution:
    counts: Tuple[int, ...]
    abstained: int

    @property
    def classified(self) -> int:
        return sum(self.counts)

    @property
    def total(self) -> int:
        return self.classified + self.abstained

    def percentages(self) -> Tuple[float, ...]:
        """Share of each class among classified (non-abstaining) ASes, in percent."""
        n = self.classified
        return tuple(100.0 * c / n if n else 0.0 for c in self.counts)


def class_distribution(predictions: Iterable[Prediction]) -> ClassDistribution:
    counts = [0] * K
    abstained = 0
    for p in predictions:
        if p.top_class is None:
            abstained += 1
        else:
            counts[p.top_class] += 1
    return ClassDistribution(tuple(counts), abstained)


def format_distribution(dist: ClassDistribution) -> str:
    lines = [f"{'class':<12}{'ASes':>8}{'%':>8}"]
    for cls, n, pct in zip(CLASSES, dist.counts, dist.percentages()):
        lines.append(f"{cls.token:<12}{n:>8}{pct:>8.1f}")
    lines.append(f"{'ABSTAIN':<12}{dist.abstained:>8}")
    lines.append(f"{'total':<12}{dist.total:>8}")
    return "\n".join(lines)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    coverage: float
    top2_rate: float
    per_class_recall: Tuple[Optional[float], ...]
    abstention_rate: float
    class_distribution: ClassDistribution
    n: int
    n_correct: int
    n_abstained: int
    n_wrong: int

    @property
    def misclassification_rate(self) -> float:
        return self.n_wrong / self.n


def evaluate(model: Model, test: Sequence[LabeledExample]) -> EvalReport:
    _require(test)
    preds = [classify(model, ex.record) for ex in test]
    positions = [rank_order(p.ranking).index(ex.label) for p, ex in zip(preds, test)]
    n = len(test)
    correct = sum(p.top_class == ex.label for p, ex in zip(preds, test))
    abstained = sum(p.top_class is None for p in preds)
    return EvalReport(
        accuracy=correct / n,
        coverage=sum(positions) / n,
        top2_rate=sum(pos <= 1 for pos in positions) / n,
        per_class_recall=_recall(preds, test),
        abstention_rate=abstained / n,
        class_distribution=class_distribution(preds),
        n=n,
        n_correct=correct,
        n_abstained=abstained,
        n_wrong=n - correct - abstained,
    )


# -- cross-validation --------------------------------------------------------


@dataclass(frozen=True)
class SizeSummary:
    size: int
    mean_accuracy: float
    sd_accuracy: float
    mean_coverage: float
    sd_coverage: float
    mean_top2: float
    iterations: int

    @property
    def se_accuracy(self) -> float:
        return self.sd_accuracy / math.sqrt(self.iterations)

    @property
    def se_coverage(self) -> float:
        return self.sd_coverage / math.sqrt(self.iterations)


@dataclass(frozen=True)
class CVResult:
    train_sizes: Tuple[int, ...]
    accuracy: np.ndarray  # (iterations, sizes)
    coverage: np.ndarray
    top2: np.ndarray
    seed: int

    def summary(self) -> List[SizeSummary]:
        n = self.accuracy.shape[0]
        ddof = 1 if n > 1 else 0
        return [
            SizeSummary(
                size=size,
                mean_accuracy=float(self.accuracy[:, j].mean()),
                sd_accuracy=float(self.accuracy[:, j].std(ddof=ddof)),
                mean_coverage=float(self.coverage[:, j].mean()),
                sd_coverage=float(self.coverage[:, j].std(ddof=ddof)),
                mean_top2=float(self.top2[:, j].mean()),
                iterations=n,
            )
            for j, size in enumerate(self.train_sizes)
        ]


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    """Independent stream per iteration, so scheduling never affects draws."""
    return np.random.default_rng(np.random.SeedSequence([seed, iteration]))


def _run_iteration(S, holdout, train_sizes, seed, iteration, config):
    rng = iteration_rng(seed, iteration)
    perm = rng.permutation(len(S))
    test = [S[i] for i in perm[:holdout]]
    remainder = perm[holdout:]
    accs, covs, top2s = [], [], []
    for size in train_sizes:
        picked = rng.choice(remainder, size=size, replace=False)
        model = train([S[i] for i in picked], config)
        report = evaluate(model, test)
        accs.append(report.accuracy)
        covs.append(report.coverage)
        top2s.append(report.top2_rate)
    return accs, covs, top2s


def cross_validate(
    S: Sequence[LabeledExample],
    holdout: int,
    iterations: int,
    train_sizes: Sequence[int],
    seed: int = 0,
    config: TrainConfig = TrainConfig(),
    workers: int = 1,
) -> CVResult:
    """Repeated random subsampling.

    Each iteration draws ``holdout`` test examples without replacement, then
    for every train size draws a subset of the remaining examples and trains
    a fresh model on it.
    """
    S = list(S)
    sizes = tuple(int(s) for s in train_sizes)
    if holdout < 1 or holdout >= len(S):
        raise ConfigError(f"holdout must be in [1, {len(S) - 1}], got {holdout}")
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    if not sizes:
        raise ConfigError("no train sizes given")
    for size in sizes:
        if size < 1 or size > len(S) - holdout:
            raise ConfigError(f"train size {size} outside [1, {len(S) - holdout}] (|S|={len(S)}, holdout={holdout})")
    config = replace(config, rng_seed=seed)

    def run(it):
        return _run_iteration(S, holdout, sizes, seed, it, config)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(iterations)))
    else:
        results = [run(it) for it in range(iterations)]
    acc = np.array([r[0] for r in results])
    cov = np.array([r[1] for r in results])
    top2 = np.array([r[2] for r in results])
    return CVResult(sizes, acc, cov, top2, seed)


def format_cv_table(result: CVResult) -> str:
    lines = [f"{'size':>6} {'accuracy':>10} {'sd':>8} {'coverage':>10} {'sd':>8} {'top2':>8}"]
    for s in result.summary():
        lines.append(
            f"{s.size:>6} {s.mean_accuracy:>10.4f} {s.sd_accuracy:>8.4f} "
            f"{s.mean_coverage:>10.4f} {s.sd_coverage:>8.4f} {s.mean_top2:>8.4f}"
        )
    return "\n".join(lines)


def format_cv_lines(result: CVResult) -> str:
    """Machine-readable ``size|mean_acc|sd_acc|mean_cov|sd_cov`` lines."""
    return "\n".join(
        f"{s.size}|{s.mean_accuracy:.17g}|{s.sd_accuracy:.17g}|{s.mean_coverage:.17g}|{s.sd_coverage:.17g}"
        for s in result.summary()
    )
