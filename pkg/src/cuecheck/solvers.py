"""Premise-oblivious ablation classifier, Easy/Hard test splitting, and the
word-frequency baseline.

The ablation model sees only the two alternatives, never the premise, so any
above-chance accuracy it reaches is direct evidence of superficial cues. It
is a deliberately small bag-of-tokens linear scorer trained by full-batch
gradient descent; external prediction files (CSV) can be loaded instead when
the split should be computed from a stronger model's outputs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from .corpus import ALT1, ALT2, Dataset, Instance
from .errors import TrainingDivergedError, ValidationError
from .tokenizer import DEFAULT_CONFIG, TokenizerConfig, tokenize


@dataclass(frozen=True)
class Choice:
    """A solver decision; ties break toward the first alternative and are
    flagged so downstream reports can count them."""

    choice: int
    tie: bool = False


@dataclass(frozen=True)
class TrainingLog:
    epochs: int
    losses: tuple[float, ...]
    final_accuracy: float


@dataclass
class ObliviousModel:
    """Bag-of-tokens linear scorer over alternatives only.

    An alternative scores ``bias + sum(weights[token])`` over its token
    occurrences; the premise is never read, so predictions are invariant
    under any change to it.
    """

    vocabulary: dict[str, int]
    weights: np.ndarray
    bias: float
    seed: int
    config: TokenizerConfig
    log: TrainingLog

    def score_text(self, text: str) -> float:
        total = self.bias
        for token in tokenize(text, self.config):
            idx = self.vocabulary.get(token)
            if idx is not None:
                total += float(self.weights[idx])
        return total


@dataclass(frozen=True)
class ObliviousHyper:
    epochs: int = 300
    learning_rate: float = 0.5
    l2: float = 1e-3


def _count_matrix(dataset: Dataset, vocab: dict[str, int], config: TokenizerConfig):
    """Per instance, the difference of token-count vectors alt1 - alt2."""
    diff = np.zeros((len(dataset), len(vocab)))
    targets = np.zeros(len(dataset))
    for row, inst in enumerate(dataset):
        for token in tokenize(inst.alt1, config):
            idx = vocab.get(token)
            if idx is not None:
                diff[row, idx] += 1.0
        for token in tokenize(inst.alt2, config):
            idx = vocab.get(token)
            if idx is not None:
                diff[row, idx] -= 1.0
        targets[row] = 1.0 if inst.gold == ALT1 else 0.0
    return diff, targets


def stability_learning_rate(dataset: Dataset, config: TokenizerConfig = DEFAULT_CONFIG,
                            l2: float = 0.0) -> float:
    """Learning rate below which full-batch gradient descent on the training
    loss is non-increasing: 2 / (max_i ||d_i||^2 / 4 + l2), a conservative
    bound from the curvature of the logistic loss on count-difference
    features d_i."""
    vocab = build_vocabulary(dataset, config)
    diff, _ = _count_matrix(dataset, vocab, config)
    max_sq = float(np.max(np.sum(diff * diff, axis=1))) if len(diff) else 1.0
    return 2.0 / (max_sq / 4.0 + l2 + 1e-12)


def build_vocabulary(dataset: Dataset, config: TokenizerConfig) -> dict[str, int]:
    tokens: set[str] = set()
    for inst in dataset:
        tokens.update(tokenize(inst.alt1, config))
        tokens.update(tokenize(inst.alt2, config))
    return {token: i for i, token in enumerate(sorted(tokens))}


def train_oblivious(
    train: Dataset,
    config: TokenizerConfig = DEFAULT_CONFIG,
    hyper: ObliviousHyper = ObliviousHyper(),
    seed: int = 0,
) -> ObliviousModel:
    """Fit the bag-of-tokens model by full-batch gradient descent on the
    softmax cross-entropy of the two alternative scores.

    The two scores share the bias, so the loss depends only on the weight
    vector applied to the count difference; the bias stays at zero. Training
    is deterministic for a fixed seed (the seed controls weight init only).
    """
    if len(train) == 0:
        raise ValidationError("training set is empty")
    vocab = build_vocabulary(train, config)
    diff, targets = _count_matrix(train, vocab, config)
    rng = np.random.default_rng(seed)
    weights = rng.normal(0.0, 0.01, size=len(vocab))
    n = len(train)
    losses = []
    for epoch in range(hyper.epochs):
        # overflow surfaces as a TrainingDivergedError, not a warning
        with np.errstate(over="ignore", invalid="ignore"):
            margins = diff @ weights
            pos = margins >= 0
            probs = np.empty_like(margins)
            probs[pos] = 1.0 / (1.0 + np.exp(-margins[pos]))
            exp_m = np.exp(margins[~pos])
            probs[~pos] = exp_m / (1.0 + exp_m)
            eps = 1e-12
            loss = float(
                -np.mean(targets * np.log(probs + eps) + (1.0 - targets) * np.log(1.0 - probs + eps))
                + 0.5 * hyper.l2 * float(weights @ weights)
            )
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}", log=tuple(losses)
                )
            losses.append(loss)
            grad = diff.T @ (probs - targets) / n + hyper.l2 * weights
            weights = weights - hyper.learning_rate * grad
    margins = diff @ weights
    correct = ((margins > 0) & (targets == 1.0)) | ((margins < 0) & (targets == 0.0))
    # exact ties predict alt1
    correct |= (margins == 0) & (targets == 1.0)
    final_acc = float(np.mean(correct)) if n else 0.0
    return ObliviousModel(
        vocabulary=vocab,
        weights=weights,
        bias=0.0,
        seed=seed,
        config=config,
        log=TrainingLog(epochs=hyper.epochs, losses=tuple(losses), final_accuracy=final_acc),
    )


def predict(model: ObliviousModel, instance: Instance) -> Choice:
    """Pick the higher-scoring alternative; the premise is ignored."""
    s1 = model.score_text(instance.alt1)
    s2 = model.score_text(instance.alt2)
    if s1 == s2:
        return Choice(choice=ALT1, tie=True)
    return Choice(choice=ALT1 if s1 > s2 else ALT2)


@dataclass(frozen=True)
class PredictionSet:
    """Per-seed predicted choices over a test set.

    ``choices`` maps seed -> instance id -> choice (1 or 2); every seed must
    cover the same ids. ``ties`` optionally records which decisions were
    ties (not preserved by the CSV interchange format).
    """

    model_tag: str
    choices: Mapping[int, Mapping[int, int]]
    ties: Optional[Mapping[int, frozenset[int]]] = None

    def __post_init__(self):
        object.__setattr__(
            self, "choices", {s: dict(m) for s, m in self.choices.items()}
        )
        id_sets = {frozenset(m) for m in self.choices.values()}
        if len(id_sets) > 1:
            raise ValidationError("seeds cover different instance id sets")

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(sorted(self.choices))

    def ids(self) -> frozenset[int]:
        for mapping in self.choices.values():
            return frozenset(mapping)
        return frozenset()

    def check_covers(self, dataset: Dataset) -> None:
        missing = set(dataset.ids()) - self.ids()
        if missing:
            raise ValidationError(f"predictions missing ids {sorted(missing)[:10]}")

    def correctness(self, gold: Dataset) -> dict[int, dict[int, bool]]:
        """seed -> id -> predicted the gold alternative."""
        self.check_covers(gold)
        out: dict[int, dict[int, bool]] = {}
        for seed, mapping in self.choices.items():
            out[seed] = {inst.id: mapping[inst.id] == inst.gold for inst in gold}
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "seed", "choice"])
        for seed in sorted(self.choices):
            mapping = self.choices[seed]
            for instance_id in sorted(mapping):
                writer.writerow([instance_id, seed, mapping[instance_id]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, model_tag: str = "external") -> "PredictionSet":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "seed", "choice"]:
            raise ValidationError("prediction CSV must start with header id,seed,choice")
        choices: dict[int, dict[int, int]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                instance_id, seed, choice = int(row[0]), int(row[1]), int(row[2])
            except (ValueError, IndexError):
                raise ValidationError(f"bad prediction row at line {lineno}: {row!r}") from None
            if choice not in (ALT1, ALT2):
                raise ValidationError(f"choice must be 1 or 2 at line {lineno}")
            seed_map = choices.setdefault(seed, {})
            if instance_id in seed_map:
                raise ValidationError(f"duplicate prediction for id {instance_id}, seed {seed}")
            seed_map[instance_id] = choice
        return cls(model_tag=model_tag, choices=choices)


def predict_dataset(
    model: ObliviousModel, test: Dataset, seed: Optional[int] = None, tag: str = "oblivious"
) -> PredictionSet:
    seed_key = model.seed if seed is None else seed
    mapping: dict[int, int] = {}
    ties: set[int] = set()
    for inst in test:
        decision = predict(model, inst)
        mapping[inst.id] = decision.choice
        if decision.tie:
            ties.add(inst.id)
    return PredictionSet(
        model_tag=tag,
        choices={seed_key: mapping},
        ties={seed_key: frozenset(ties)},
    )


def merge_prediction_sets(sets: Iterable[PredictionSet], model_tag: str) -> PredictionSet:
    choices: dict[int, dict[int, int]] = {}
    ties: dict[int, frozenset[int]] = {}
    for ps in sets:
        for seed, mapping in ps.choices.items():
            if seed in choices:
                raise ValidationError(f"duplicate seed {seed} while merging predictions")
            choices[seed] = dict(mapping)
            if ps.ties and seed in ps.ties:
                ties[seed] = ps.ties[seed]
    return PredictionSet(model_tag=model_tag, choices=choices, ties=ties or None)


@dataclass(frozen=True)
class EasyHardSplit:
    """Partition of a test set: Easy instances are solved by the
    premise-oblivious predictions in every seeded run, Hard are the rest."""

    easy_ids: frozenset[int]
    hard_ids: frozenset[int]
    n_seeds: int

    def __post_init__(self):
        if self.easy_ids & self.hard_ids:
            raise ValidationError("easy and hard sets overlap")

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "easy": sorted(self.easy_ids),
                "hard": sorted(self.hard_ids),
                "n_seeds": self.n_seeds,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "EasyHardSplit":
        import json

        payload = json.loads(text)
        return cls(
            easy_ids=frozenset(payload["easy"]),
            hard_ids=frozenset(payload["hard"]),
            n_seeds=payload.get("n_seeds", 0),
        )


def easy_hard_split(test: Dataset, predictions: PredictionSet) -> EasyHardSplit:
    """An instance is Easy iff it is predicted correctly under every seed
    (row-wise AND over the seed axis)."""
    correctness = predictions.correctness(test)
    if not correctness:
        raise ValidationError("prediction set has no seeds")
    easy = set()
    hard = set()
    for inst in test:
        if all(correctness[seed][inst.id] for seed in correctness):
            easy.add(inst.id)
        else:
            hard.add(inst.id)
    return EasyHardSplit(
        easy_ids=frozenset(easy), hard_ids=frozenset(hard), n_seeds=len(correctness)
    )


@dataclass(frozen=True)
class FrequencyTable:
    """Token -> corpus frequency, with an explicit floor for unknown tokens
    (smallest listed frequency times 0.1, avoiding log of zero)."""

    frequencies: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "frequencies", dict(self.frequencies))
        if not self.frequencies:
            raise ValidationError("frequency table is empty")
        if any(f <= 0 for f in self.frequencies.values()):
            raise ValidationError("frequencies must be positive")

    @property
    def floor(self) -> float:
        return min(self.frequencies.values()) * 0.1

    def log_frequency(self, token: str) -> float:
        return math.log(self.frequencies.get(token, self.floor))

    @classmethod
    def from_tsv(cls, text: str) -> "FrequencyTable":
        freqs: dict[str, float] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValidationError(f"frequency TSV line {lineno}: expected token<TAB>frequency")
            try:
                freqs[parts[0]] = float(parts[1])
            except ValueError:
                raise ValidationError(f"frequency TSV line {lineno}: bad number {parts[1]!r}") from None
        return cls(frequencies=freqs)

    def to_tsv(self) -> str:
        lines = [f"{token}\t{self.frequencies[token]!r}" for token in sorted(self.frequencies)]
        return "\n".join(lines) + "\n"


PREFER_FREQUENT = "prefer-frequent"
PREFER_RARE = "prefer-rare"


def _mean_log_frequency(text: str, table: FrequencyTable, config: TokenizerConfig) -> float:
    tokens = tokenize(text, config)
    if not tokens:
        return math.log(table.floor)
    return sum(table.log_frequency(t) for t in tokens) / len(tokens)


def wordfreq_solve(
    instance: Instance,
    table: FrequencyTable,
    direction: str = PREFER_FREQUENT,
    config: TokenizerConfig = DEFAULT_CONFIG,
) -> Choice:
    """Pick an alternative by mean log corpus frequency of its tokens."""
    if direction not in (PREFER_FREQUENT, PREFER_RARE):
        raise ValidationError(f"unknown direction {direction!r}")
    m1 = _mean_log_frequency(instance.alt1, table, config)
    m2 = _mean_log_frequency(instance.alt2, table, config)
    if m1 == m2:
        return Choice(choice=ALT1, tie=True)
    if direction == PREFER_FREQUENT:
        return Choice(choice=ALT1 if m1 > m2 else ALT2)
    return Choice(choice=ALT1 if m1 < m2 else ALT2)


@dataclass(frozen=True)
class DirectionFit:
    direction: str
    tie: bool
    accuracy_frequent: float
    accuracy_rare: float


def fit_direction(
    train: Dataset, table: FrequencyTable, config: TokenizerConfig = DEFAULT_CONFIG
) -> DirectionFit:
    """Learn whether frequent or rare tokens mark the gold alternative on
    the training set; ties default to prefer-frequent and are flagged."""
    if len(train) == 0:
        raise ValidationError("training set is empty")
    hits = {PREFER_FREQUENT: 0, PREFER_RARE: 0}
    for inst in train:
        for direction in hits:
            if wordfreq_solve(inst, table, direction, config).choice == inst.gold:
                hits[direction] += 1
    acc_f = hits[PREFER_FREQUENT] / len(train)
    acc_r = hits[PREFER_RARE] / len(train)
    if acc_f == acc_r:
        return DirectionFit(PREFER_FREQUENT, True, acc_f, acc_r)
    winner = PREFER_FREQUENT if acc_f > acc_r else PREFER_RARE
    return DirectionFit(winner, False, acc_f, acc_r)
