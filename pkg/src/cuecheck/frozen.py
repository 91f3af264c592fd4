"""Linear SVM evaluation on top of frozen, externally produced embeddings.

Embeddings arrive in a plain text format so any encoder can feed the
pipeline: a header line ``h=<dim> encoder=<tag>`` followed by one line per
(instance, alternative) pair, ``id<TAB>alt1|alt2<TAB>v1,v2,...``. Each
alternative is one training example (positive when it is the gold one), the
margin objective is 0.5*||w||^2 + C * sum hinge with an unregularized bias,
and the regularization strength is picked on validation accuracy with ties
going to the smaller C. Training is full-batch subgradient descent with a
diminishing step size and a pocket for the best objective seen, so repeated
runs give byte-identical models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .corpus import ALT1, ALT2, Dataset, Instance
from .errors import CorpusFormatError, ValidationError
from .solvers import Choice, EasyHardSplit

C_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0)

_ALT_TAGS = {"alt1": ALT1, "alt2": ALT2}
_TAG_OF = {ALT1: "alt1", ALT2: "alt2"}


@dataclass
class EmbeddingSet:
    """Frozen vectors keyed by (instance id, alternative index)."""

    dim: int
    encoder: str
    vectors: dict[tuple[int, int], np.ndarray]

    def vector(self, instance_id: int, alternative: int) -> np.ndarray:
        key = (instance_id, alternative)
        if key not in self.vectors:
            raise ValidationError(
                f"no embedding for instance {instance_id} alternative {_TAG_OF[alternative]}"
            )
        return self.vectors[key]

    def covers(self, dataset: Dataset) -> list[int]:
        """Ids from ``dataset`` that lack a vector for either alternative."""
        missing = []
        for instance in dataset:
            if (instance.id, ALT1) not in self.vectors or (instance.id, ALT2) not in self.vectors:
                missing.append(instance.id)
        return missing


def load_embeddings(path) -> EmbeddingSet:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CorpusFormatError(f"{path}: empty embedding file", line=1)
    header = lines[0].split()
    fields = dict(part.split("=", 1) for part in header if "=" in part)
    if "h" not in fields or "encoder" not in fields:
        raise CorpusFormatError(
            f"{path}: header must be 'h=<dim> encoder=<tag>', got {lines[0]!r}", line=1
        )
    try:
        dim = int(fields["h"])
    except ValueError:
        raise CorpusFormatError(f"{path}: dimension {fields['h']!r} is not an integer", line=1)
    if dim < 1:
        raise CorpusFormatError(f"{path}: dimension must be positive, got {dim}", line=1)
    vectors: dict[tuple[int, int], np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise CorpusFormatError(
                f"{path}: expected 3 tab-separated fields, got {len(parts)}", line=lineno
            )
        raw_id, tag, values = parts
        try:
            instance_id = int(raw_id)
        except ValueError:
            raise CorpusFormatError(
                f"{path}: instance id {raw_id!r} is not an integer", line=lineno
            )
        if tag not in _ALT_TAGS:
            raise CorpusFormatError(
                f"{path}: alternative tag must be alt1 or alt2, got {tag!r}", line=lineno
            )
        key = (instance_id, _ALT_TAGS[tag])
        if key in vectors:
            raise CorpusFormatError(
                f"{path}: duplicate embedding for {instance_id}/{tag}", line=lineno
            )
        try:
            vec = np.array([float(v) for v in values.split(",")])
        except ValueError:
            raise CorpusFormatError(f"{path}: malformed vector", line=lineno)
        if vec.shape != (dim,):
            raise CorpusFormatError(
                f"{path}: vector has {vec.shape[0]} components, header says {dim}",
                line=lineno,
            )
        if not np.isfinite(vec).all():
            raise CorpusFormatError(f"{path}: non-finite vector component", line=lineno)
        vectors[key] = vec
    return EmbeddingSet(dim=dim, encoder=fields["encoder"], vectors=vectors)


def save_embeddings(embeddings: EmbeddingSet, path) -> None:
    lines = [f"h={embeddings.dim} encoder={embeddings.encoder}"]
    for (instance_id, alt), vec in sorted(
        embeddings.vectors.items(), key=lambda kv: (kv[0][0], kv[0][1])
    ):
        values = ",".join(format(v, ".17g") for v in vec)
        lines.append(f"{instance_id}\t{_TAG_OF[alt]}\t{values}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class FrozenModel:
    weights: np.ndarray
    bias: float
    c: float
    encoder: str

    def score(self, vec: np.ndarray) -> float:
        return float(self.weights @ vec + self.bias)


def _example_matrix(embeddings: EmbeddingSet, dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    missing = embeddings.covers(dataset)
    if missing:
        shown = ", ".join(str(i) for i in missing[:5])
        raise ValidationError(
            f"{len(missing)} instances lack embeddings (first: {shown})"
        )
    rows = []
    labels = []
    for instance in dataset:
        for alt in (ALT1, ALT2):
            rows.append(embeddings.vector(instance.id, alt))
            labels.append(1.0 if instance.gold == alt else -1.0)
    return np.array(rows), np.array(labels)


def _fit_hinge(z: np.ndarray, y: np.ndarray, c: float, epochs: int) -> tuple[np.ndarray, float]:
    """Full-batch subgradient descent on 0.5*||w||^2 + c * sum hinge.

    The bias carries no regularization. Steps shrink as 1/sqrt(t) and the
    best-objective iterate (the pocket) is returned, so the non-monotone
    subgradient path cannot worsen the result.
    """
    n, dim = z.shape
    w = np.zeros(dim)
    b = 0.0
    mean_sq = float((z * z).sum(axis=1).mean()) or 1.0
    step0 = 1.0 / (1.0 + c * mean_sq)

    def objective(w_: np.ndarray, b_: float) -> float:
        margins = y * (z @ w_ + b_)
        return 0.5 * float(w_ @ w_) + c * float(np.maximum(0.0, 1.0 - margins).sum())

    best = (objective(w, b), w.copy(), b)
    for t in range(epochs):
        margins = y * (z @ w + b)
        active = margins < 1.0
        grad_w = w - c * ((y[active, None] * z[active]).sum(axis=0) if active.any() else 0.0)
        grad_b = -c * float(y[active].sum())
        step = step0 / math.sqrt(t + 1.0)
        w = w - step * grad_w
        b = b - step * grad_b
        obj = objective(w, b)
        if obj < best[0]:
            best = (obj, w.copy(), b)
    return best[1], best[2]


def _pair_accuracy(weights: np.ndarray, bias: float, embeddings: EmbeddingSet, dataset: Dataset) -> float:
    correct = 0
    for instance in dataset:
        s1 = float(weights @ embeddings.vector(instance.id, ALT1) + bias)
        s2 = float(weights @ embeddings.vector(instance.id, ALT2) + bias)
        picked = ALT1 if s1 >= s2 else ALT2
        if picked == instance.gold:
            correct += 1
    return correct / len(dataset)


@dataclass(frozen=True)
class FrozenSelection:
    c: float
    validation_accuracy: dict[float, float]


def train_frozen(
    embeddings: EmbeddingSet,
    train: Dataset,
    valid: Dataset,
    c_grid: Iterable[float] = C_GRID,
    epochs: int = 500,
) -> tuple[FrozenModel, FrozenSelection]:
    """Fit one SVM per C on ``train``, pick the best validation pair
    accuracy, smaller C on ties."""
    if len(train) == 0 or len(valid) == 0:
        raise ValidationError("train and validation sets must be non-empty")
    grid = sorted(set(float(c) for c in c_grid))
    if not grid or any(c <= 0 for c in grid):
        raise ValidationError("C grid must contain positive values")
    missing = embeddings.covers(valid)
    if missing:
        raise ValidationError(f"{len(missing)} validation instances lack embeddings")
    z, y = _example_matrix(embeddings, train)
    scores: dict[float, float] = {}
    fits: dict[float, tuple[np.ndarray, float]] = {}
    for c in grid:
        w, b = _fit_hinge(z, y, c, epochs)
        fits[c] = (w, b)
        scores[c] = _pair_accuracy(w, b, embeddings, valid)
    best_c = max(grid, key=lambda c: (scores[c], -c))
    w, b = fits[best_c]
    model = FrozenModel(weights=w, bias=b, c=best_c, encoder=embeddings.encoder)
    return model, FrozenSelection(c=best_c, validation_accuracy=scores)


def predict_frozen(model: FrozenModel, embeddings: EmbeddingSet, instance: Instance) -> Choice:
    s1 = model.score(embeddings.vector(instance.id, ALT1))
    s2 = model.score(embeddings.vector(instance.id, ALT2))
    if s1 == s2:
        return Choice(ALT1, tie=True)
    return Choice(ALT1 if s1 > s2 else ALT2)


@dataclass(frozen=True)
class FrozenReport:
    accuracy: float
    tie_rate: float
    n: int
    easy_accuracy: Optional[float] = None
    hard_accuracy: Optional[float] = None
    easy_n: Optional[int] = None
    hard_n: Optional[int] = None


def evaluate_frozen(
    model: FrozenModel,
    embeddings: EmbeddingSet,
    test: Dataset,
    split: Optional[EasyHardSplit] = None,
) -> FrozenReport:
    """Pair accuracy on ``test``; with a split, also on its easy and hard
    subsets (every test id must be assigned to one of them)."""
    if len(test) == 0:
        raise ValidationError("test set is empty")
    missing = embeddings.covers(test)
    if missing:
        raise ValidationError(f"{len(missing)} test instances lack embeddings")
    correct: dict[int, bool] = {}
    ties = 0
    for instance in test:
        choice = predict_frozen(model, embeddings, instance)
        ties += 1 if choice.tie else 0
        correct[instance.id] = choice.choice == instance.gold
    accuracy = sum(correct.values()) / len(test)
    report = FrozenReport(accuracy=accuracy, tie_rate=ties / len(test), n=len(test))
    if split is None:
        return report
    unassigned = [i for i in correct if i not in split.easy_ids and i not in split.hard_ids]
    if unassigned:
        raise ValidationError(
            f"{len(unassigned)} test instances missing from the easy/hard split"
        )
    easy = [ok for i, ok in correct.items() if i in split.easy_ids]
    hard = [ok for i, ok in correct.items() if i in split.hard_ids]
    return FrozenReport(
        accuracy=accuracy,
        tie_rate=ties / len(test),
        n=len(test),
        easy_accuracy=sum(easy) / len(easy) if easy else None,
        hard_accuracy=sum(hard) / len(hard) if hard else None,
        easy_n=len(easy),
        hard_n=len(hard),
    )
