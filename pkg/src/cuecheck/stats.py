"""Accuracy aggregation, significance testing, and agreement measures.

The randomization test asks whether an observed accuracy gap between two
item groups could arise from arbitrary regrouping: group labels are
reshuffled (sizes preserved) and the gap recomputed. Both the observed and
the resampled statistics are compared in integer arithmetic
(|s_a * n_b - s_b * n_a|, a cross-multiplied form of the accuracy
difference), so ties at the threshold are counted exactly rather than at the
mercy of float rounding.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CorpusFormatError, ValidationError

DEFAULT_ROUNDS = 10_000
_CHUNK = 2_000


def accuracy(predicted: Mapping[str, int], gold: Mapping[str, int]) -> float:
    """Fraction of ids predicted correctly; both maps must cover the same ids."""
    if set(predicted) != set(gold):
        raise ValidationError("prediction and gold ids differ")
    if not gold:
        raise ValidationError("empty evaluation set")
    return sum(1 for i, g in gold.items() if predicted[i] == g) / len(gold)


def format_accuracy(mean: float, std: float) -> str:
    """Render mean and spread as percentages: ``59.6 ($\\pm$ 2.3)``."""
    return f"{100 * mean:.1f} ($\\pm$ {100 * std:.1f})"


@dataclass(frozen=True)
class AccuracyReport:
    """Accuracy of one model over several seeds."""

    model_tag: str
    per_seed: tuple[tuple[int, float], ...]  # (seed, accuracy), seed-sorted

    def __post_init__(self):
        if not self.per_seed:
            raise ValidationError("report needs at least one seed")
        seeds = [s for s, _ in self.per_seed]
        if len(set(seeds)) != len(seeds):
            raise ValidationError("duplicate seeds in report")
        object.__setattr__(self, "per_seed", tuple(sorted(self.per_seed)))

    @property
    def mean(self) -> float:
        return sum(a for _, a in self.per_seed) / len(self.per_seed)

    @property
    def std(self) -> float:
        # population spread: seeds are the whole population of runs made
        m = self.mean
        return math.sqrt(sum((a - m) ** 2 for _, a in self.per_seed) / len(self.per_seed))

    def formatted(self) -> str:
        return format_accuracy(self.mean, self.std)

    def markdown_row(self) -> str:
        return f"| {self.model_tag} | {self.formatted()} |"


@dataclass(frozen=True)
class ARTestResult:
    statistic: float  # observed |acc_a - acc_b|
    p_value: float
    rounds: int
    count_ge: int  # resamples with a gap at least as large
    seed: int


def approx_randomization_test(
    correct_a: Sequence[bool],
    correct_b: Sequence[bool],
    rounds: int = DEFAULT_ROUNDS,
    seed: int = 0,
) -> ARTestResult:
    """Two-sided randomization test on the accuracy gap between two groups.

    p = (count + 1) / (rounds + 1), which cannot report an impossible zero.
    """
    a = np.asarray(correct_a, dtype=np.int64)
    b = np.asarray(correct_b, dtype=np.int64)
    if a.ndim != 1 or b.ndim != 1 or len(a) == 0 or len(b) == 0:
        raise ValidationError("both groups must be non-empty 1-d sequences")
    if rounds < 1:
        raise ValidationError("rounds must be >= 1")
    n_a, n_b = len(a), len(b)
    s_a, s_b = int(a.sum()), int(b.sum())
    observed_k = abs(s_a * n_b - s_b * n_a)
    pooled = np.concatenate([a, b])
    total = s_a + s_b

    rng = np.random.default_rng(seed)
    count = 0
    done = 0
    while done < rounds:
        size = min(_CHUNK, rounds - done)
        perms = rng.permuted(np.tile(pooled, (size, 1)), axis=1)
        shuffled_a = perms[:, :n_a].sum(axis=1, dtype=np.int64)
        shuffled_b = total - shuffled_a
        k = np.abs(shuffled_a * n_b - shuffled_b * n_a)
        count += int((k >= observed_k).sum())
        done += size
    return ARTestResult(
        statistic=abs(s_a / n_a - s_b / n_b),
        p_value=(count + 1) / (rounds + 1),
        rounds=rounds,
        count_ge=count,
        seed=seed,
    )


@dataclass(frozen=True)
class RatingsMatrix:
    """Categorical labels from every rater on every item."""

    items: tuple[str, ...]
    raters: tuple[str, ...]
    categories: tuple[str, ...]
    labels: tuple[tuple[str, ...], ...]  # labels[item][rater]

    def __post_init__(self):
        if len(self.items) == 0 or len(self.raters) < 2:
            raise ValidationError("need at least one item and two raters")
        if len(self.labels) != len(self.items):
            raise ValidationError("label rows do not match items")
        cats = set(self.categories)
        for row in self.labels:
            if len(row) != len(self.raters):
                raise ValidationError("label row does not match rater count")
            for label in row:
                if label not in cats:
                    raise ValidationError(f"label {label!r} not in the category set")

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, str, str]]) -> "RatingsMatrix":
        """Build from (item, rater, label) triples; every rater must label
        every item exactly once."""
        by_item: dict[str, dict[str, str]] = {}
        raters: set[str] = set()
        categories: set[str] = set()
        for item, rater, label in rows:
            cell = by_item.setdefault(item, {})
            if rater in cell:
                raise ValidationError(f"rater {rater!r} labeled item {item!r} twice")
            cell[rater] = label
            raters.add(rater)
            categories.add(label)
        if not by_item:
            raise ValidationError("no ratings given")
        rater_order = tuple(sorted(raters))
        item_order = tuple(sorted(by_item))
        for item in item_order:
            missing = [r for r in rater_order if r not in by_item[item]]
            if missing:
                raise ValidationError(
                    f"item {item!r} lacks ratings from: {', '.join(missing)}"
                )
        labels = tuple(
            tuple(by_item[item][rater] for rater in rater_order) for item in item_order
        )
        return cls(
            items=item_order,
            raters=rater_order,
            categories=tuple(sorted(categories)),
            labels=labels,
        )

    @classmethod
    def from_csv(cls, text: str) -> "RatingsMatrix":
        """CSV with header ``item,rater,label``."""
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError("empty ratings file", line=1)
        if [h.strip() for h in header] != ["item", "rater", "label"]:
            raise CorpusFormatError(
                f"header must be item,rater,label, got {','.join(header)!r}", line=1
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise CorpusFormatError(f"expected 3 columns, got {len(row)}", line=lineno)
            rows.append((row[0].strip(), row[1].strip(), row[2].strip()))
        return cls.from_rows(rows)


def fleiss_kappa(matrix: RatingsMatrix) -> float:
    """Chance-corrected agreement over the ratings matrix.

    With a single used category the expected agreement is 1; observed
    agreement is then necessarily 1 as well and the value is defined as 1.0
    (perfect agreement on the only option), never 0/0.
    """
    n_raters = len(matrix.raters)
    n_items = len(matrix.items)
    counts = np.zeros((n_items, len(matrix.categories)), dtype=np.int64)
    cat_index = {c: j for j, c in enumerate(matrix.categories)}
    for i, row in enumerate(matrix.labels):
        for label in row:
            counts[i, cat_index[label]] += 1
    p_observed = float(
        ((counts * counts).sum(axis=1) - n_raters).sum()
    ) / (n_items * n_raters * (n_raters - 1))
    proportions = counts.sum(axis=0) / (n_items * n_raters)
    p_expected = float((proportions * proportions).sum())
    if p_expected == 1.0:
        if p_observed == 1.0:
            return 1.0
        raise ValidationError(
            "expected agreement is 1 but observed is not; ratings are inconsistent"
        )
    return (p_observed - p_expected) / (1.0 - p_expected)
