"""Small differentiable sequence scorer with exact input gradients.

The model embeds each token, adds a learned position vector, squashes with
tanh, mean-pools, and projects to a scalar plausibility score. The tanh is
what makes position matter: pooling the raw sums would give every position
the identical score gradient and no reordering could ever change a
sensitivity profile. With the squash, the gradient of the score with respect
to the input at position t is

    g_t = (w * (1 - tanh(x_t)^2)) / L

and the per-position sensitivity is the L2 share s_t = ||g_t|| / sum ||g_t'||,
which sums to one over the sequence. Aggregating the shares per token across
a dataset makes over-reliance on individual word types measurable, and
comparing the aggregate between a dataset and its mirrored counterpart shows
which reliance the mirroring removed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import ALT1, ALT2, Dataset, Instance
from .errors import TrainingDivergedError, ValidationError
from .solvers import Choice
from .tokenizer import DEFAULT_CONFIG, TokenizerConfig, tokenize

UNK = "<unk>"
MAX_LEN = 32

SENSITIVITY_TARGETS = ("gold", "predicted", "alt1", "alt2")


@dataclass(frozen=True)
class ScorerHyper:
    dim: int = 16
    max_len: int = MAX_LEN
    epochs: int = 150
    learning_rate: float = 0.2
    momentum: float = 0.9
    weight_decay: float = 1e-4
    init_scale: float = 0.1

    def __post_init__(self):
        if self.dim < 1 or self.max_len < 1 or self.epochs < 1:
            raise ValidationError("dim, max_len and epochs must be positive")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")


@dataclass
class ScorerModel:
    """Parameters plus the tokenizer they were trained under."""

    vocabulary: tuple[str, ...]
    embeddings: np.ndarray  # (V, dim)
    positions: np.ndarray  # (max_len, dim)
    weights: np.ndarray  # (dim,)
    bias: float
    config: TokenizerConfig
    seed: int

    def __post_init__(self):
        if self.vocabulary[0] != UNK:
            raise ValidationError(f"vocabulary must start with the {UNK} entry")
        if self.embeddings.shape != (len(self.vocabulary), self.dim):
            raise ValidationError("embedding matrix does not match vocabulary")

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def max_len(self) -> int:
        return self.positions.shape[0]

    def token_index(self, token: str) -> int:
        return self._index().get(token, 0)

    def _index(self) -> dict[str, int]:
        cached = getattr(self, "_index_cache", None)
        if cached is None:
            cached = {t: i for i, t in enumerate(self.vocabulary)}
            self._index_cache = cached
        return cached


@dataclass(frozen=True)
class BuiltSequence:
    """Token sequence fed to the scorer for one alternative.

    The parts are concatenated in causal order: for an effect question the
    premise states the cause and comes first; for a cause question the
    alternative states the cause and comes first. Sequences longer than the
    position table are truncated at the tail.
    """

    tokens: tuple[str, ...]
    parts: tuple[str, ...]  # "premise" / "alternative", aligned with tokens
    alternative: int
    truncated: bool


def build_sequence(
    instance: Instance,
    alternative: int,
    config: TokenizerConfig = DEFAULT_CONFIG,
    max_len: int = MAX_LEN,
) -> BuiltSequence:
    premise = tokenize(instance.premise, config)
    alt = tokenize(instance.alternative(alternative), config)
    if instance.question == "effect":
        tokens = premise + alt
        parts = ["premise"] * len(premise) + ["alternative"] * len(alt)
    else:
        tokens = alt + premise
        parts = ["alternative"] * len(alt) + ["premise"] * len(premise)
    truncated = len(tokens) > max_len
    tokens = tokens[:max_len]
    parts = parts[:max_len]
    if not tokens:
        raise ValidationError(f"instance {instance.id}: empty sequence")
    return BuiltSequence(tuple(tokens), tuple(parts), alternative, truncated)


def build_scorer_vocabulary(dataset: Dataset, config: TokenizerConfig = DEFAULT_CONFIG) -> tuple[str, ...]:
    seen: set[str] = set()
    for instance in dataset:
        seen.update(tokenize(instance.premise, config))
        seen.update(tokenize(instance.alt1, config))
        seen.update(tokenize(instance.alt2, config))
    seen.discard(UNK)
    return (UNK, *sorted(seen))


def init_model(
    vocabulary: Sequence[str],
    config: TokenizerConfig = DEFAULT_CONFIG,
    hyper: ScorerHyper = ScorerHyper(),
    seed: int = 0,
) -> ScorerModel:
    rng = np.random.default_rng(seed)
    scale = hyper.init_scale
    return ScorerModel(
        vocabulary=tuple(vocabulary),
        embeddings=rng.normal(0.0, scale, (len(vocabulary), hyper.dim)),
        positions=rng.normal(0.0, scale, (hyper.max_len, hyper.dim)),
        weights=rng.normal(0.0, scale, hyper.dim),
        bias=0.0,
        config=config,
        seed=seed,
    )


def _inputs(model: ScorerModel, sequence: BuiltSequence) -> np.ndarray:
    idx = [model.token_index(t) for t in sequence.tokens]
    return model.embeddings[idx] + model.positions[: len(idx)]


def score(model: ScorerModel, sequence: BuiltSequence) -> float:
    x = _inputs(model, sequence)
    z = np.tanh(x).mean(axis=0)
    return float(model.weights @ z + model.bias)


def score_instance(model: ScorerModel, instance: Instance) -> tuple[float, float]:
    return (
        score(model, build_sequence(instance, ALT1, model.config, model.max_len)),
        score(model, build_sequence(instance, ALT2, model.config, model.max_len)),
    )


def predict_scorer(model: ScorerModel, instance: Instance) -> Choice:
    s1, s2 = score_instance(model, instance)
    if s1 == s2:
        return Choice(ALT1, tie=True)
    return Choice(ALT1 if s1 > s2 else ALT2)


def input_gradients(model: ScorerModel, sequence: BuiltSequence) -> np.ndarray:
    """Exact d(score)/d(x_t) for every position: (w * (1 - tanh(x_t)^2)) / L."""
    x = _inputs(model, sequence)
    h = np.tanh(x)
    return (model.weights[None, :] * (1.0 - h * h)) / len(sequence.tokens)


def position_scores(model: ScorerModel, sequence: BuiltSequence) -> np.ndarray:
    """Per-position sensitivity shares (nonnegative, summing to 1).

    A fully saturated sequence has zero gradient everywhere; the shares then
    fall back to the uniform distribution.
    """
    norms = np.linalg.norm(input_gradients(model, sequence), axis=1)
    total = norms.sum()
    if total == 0.0:
        return np.full(len(norms), 1.0 / len(norms))
    return norms / total


def grad_check(
    model: ScorerModel,
    sequence: BuiltSequence,
    epsilon: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients
    of the score, over every input coordinate plus the projection weights
    and bias. Relative error uses max(|analytic|, |numeric|, 1e-4) in the
    denominator so near-zero coordinates do not blow up the ratio.
    """
    x0 = _inputs(model, sequence)
    length = len(sequence.tokens)

    def from_inputs(x: np.ndarray) -> float:
        z = np.tanh(x).mean(axis=0)
        return float(model.weights @ z + model.bias)

    analytic = input_gradients(model, sequence)
    worst = 0.0
    for t in range(length):
        for j in range(model.dim):
            bumped = x0.copy()
            bumped[t, j] += epsilon
            plus = from_inputs(bumped)
            bumped[t, j] -= 2 * epsilon
            minus = from_inputs(bumped)
            numeric = (plus - minus) / (2 * epsilon)
            a = analytic[t, j]
            worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-4))
    z0 = np.tanh(x0).mean(axis=0)
    for j in range(model.dim):
        w = model.weights.copy()
        w[j] += epsilon
        plus = float(w @ z0 + model.bias)
        w[j] -= 2 * epsilon
        minus = float(w @ z0 + model.bias)
        numeric = (plus - minus) / (2 * epsilon)
        a = z0[j]  # d(score)/d(w_j)
        worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-4))
    numeric_b = ((float(model.weights @ z0 + model.bias + epsilon))
                 - (float(model.weights @ z0 + model.bias - epsilon))) / (2 * epsilon)
    worst = max(worst, abs(1.0 - numeric_b) / max(1.0, abs(numeric_b), 1e-4))
    return worst


@dataclass
class ScorerLog:
    epochs: int
    losses: list[float]
    train_accuracy: float
    valid_accuracy: Optional[float]
    best_epoch: int


def _batch_arrays(
    dataset: Dataset, config: TokenizerConfig, max_len: int, index: dict[str, int]
):
    n = len(dataset)
    tok = np.zeros((2 * n, max_len), dtype=np.int64)
    mask = np.zeros((2 * n, max_len))
    lengths = np.zeros(2 * n)
    targets = np.zeros(n)  # +1 when alt1 is gold, -1 when alt2 is gold
    for i, instance in enumerate(dataset):
        for which, alt in enumerate((ALT1, ALT2)):
            seq = build_sequence(instance, alt, config, max_len)
            row = 2 * i + which
            for t, token in enumerate(seq.tokens):
                tok[row, t] = index.get(token, 0)
                mask[row, t] = 1.0
            lengths[row] = len(seq.tokens)
        targets[i] = 1.0 if instance.gold == ALT1 else -1.0
    return tok, mask, lengths, targets


def _batch_scores(E, P, w, b, tok, mask, lengths):
    x = E[tok] + P[None, : tok.shape[1], :]
    h = np.tanh(x)
    z = (h * mask[:, :, None]).sum(axis=1) / lengths[:, None]
    return z @ w + b, h, z


def train_scorer(
    train: Dataset,
    valid: Optional[Dataset] = None,
    config: TokenizerConfig = DEFAULT_CONFIG,
    hyper: ScorerHyper = ScorerHyper(),
    seed: int = 0,
) -> tuple[ScorerModel, ScorerLog]:
    """Full-batch gradient descent with momentum on the pairwise logistic
    loss log(1 + exp(-t * (y1 - y2))). When a validation set is given, the
    parameters from the best validation-accuracy epoch are returned rather
    than the last ones. Identical inputs and seed give identical models.
    """
    if len(train) == 0:
        raise ValidationError("training set is empty")
    vocabulary = build_scorer_vocabulary(train, config)
    model = init_model(vocabulary, config, hyper, seed)
    index = model._index()
    tok, mask, lengths, targets = _batch_arrays(train, config, hyper.max_len, index)
    if valid is not None and len(valid) > 0:
        vtok, vmask, vlengths, vtargets = _batch_arrays(valid, config, hyper.max_len, index)
    else:
        valid = None

    E, P = model.embeddings.copy(), model.positions.copy()
    w, b = model.weights.copy(), model.bias
    vE, vP = np.zeros_like(E), np.zeros_like(P)
    vw, vb = np.zeros_like(w), 0.0
    n = len(train)
    wd, lr, mom = hyper.weight_decay, hyper.learning_rate, hyper.momentum

    def accuracy(scores: np.ndarray, t: np.ndarray) -> float:
        diff = scores[0::2] - scores[1::2]
        # a tie scores as a first-alternative pick
        picked = np.where(diff >= 0, 1.0, -1.0)
        return float((picked == t).mean())

    losses: list[float] = []
    best = (-1.0, 0, E.copy(), P.copy(), w.copy(), b)
    for epoch in range(hyper.epochs):
        # overflow surfaces as a TrainingDivergedError, not a warning
        with np.errstate(over="ignore", invalid="ignore"):
            y, h, z = _batch_scores(E, P, w, b, tok, mask, lengths)
            diff = y[0::2] - y[1::2]
            margin = targets * diff
            loss = float(np.logaddexp(0.0, -margin).mean())
            loss += 0.5 * wd * float((E * E).sum() + (P * P).sum() + (w * w).sum())
            if not math.isfinite(loss):
                partial = ScorerModel(vocabulary, E, P, w, float(b), config, seed)
                raise TrainingDivergedError(
                    f"loss became non-finite at epoch {epoch}",
                    last_model=partial,
                    log=ScorerLog(epoch, losses, float("nan"), None, 0),
                )
            losses.append(loss)

            ddiff = -targets * _sigmoid(-margin) / n
            dy = np.zeros_like(y)
            dy[0::2] = ddiff
            dy[1::2] = -ddiff
            dz = dy[:, None] * w[None, :]
            dw = z.T @ dy + wd * w
            db = dy.sum()
            dh = dz[:, None, :] * (mask / lengths[:, None])[:, :, None]
            dx = dh * (1.0 - h * h)
            dE = np.zeros_like(E)
            np.add.at(dE, tok.ravel(), dx.reshape(-1, E.shape[1]))
            dE += wd * E
            dP = dx.sum(axis=0) + wd * P

            vE = mom * vE - lr * dE
            vP = mom * vP - lr * dP
            vw = mom * vw - lr * dw
            vb = mom * vb - lr * db
            E += vE
            P += vP
            w += vw
            b += vb
        if not (np.isfinite(E).all() and np.isfinite(P).all() and np.isfinite(w).all()):
            partial = ScorerModel(vocabulary, E, P, w, float(b), config, seed)
            raise TrainingDivergedError(
                f"parameters became non-finite at epoch {epoch}",
                last_model=partial,
                log=ScorerLog(epoch, losses, float("nan"), None, 0),
            )
        if valid is not None:
            vy, _, _ = _batch_scores(E, P, w, b, vtok, vmask, vlengths)
            vacc = accuracy(vy, vtargets)
            if vacc > best[0]:
                best = (vacc, epoch, E.copy(), P.copy(), w.copy(), float(b))

    if valid is not None:
        valid_accuracy, best_epoch, E, P, w, b = best
    else:
        valid_accuracy, best_epoch = None, hyper.epochs - 1
    final_y, _, _ = _batch_scores(E, P, w, b, tok, mask, lengths)
    log = ScorerLog(hyper.epochs, losses, accuracy(final_y, targets), valid_accuracy, best_epoch)
    return ScorerModel(tuple(vocabulary), E, P, w, float(b), config, seed), log


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(frozen=True)
class SensitivityResult:
    """Per-position sensitivity over the scored alternative's sequence."""

    instance_id: int
    alternative: int
    tokens: tuple[str, ...]
    parts: tuple[str, ...]
    scores: tuple[float, ...]


def _resolve_target(model: ScorerModel, instance: Instance, target: str) -> int:
    if target == "gold":
        return instance.gold
    if target == "predicted":
        return predict_scorer(model, instance).choice
    if target == "alt1":
        return ALT1
    if target == "alt2":
        return ALT2
    raise ValidationError(f"unknown sensitivity target {target!r}")


def sensitivity(model: ScorerModel, instance: Instance, target: str = "gold") -> SensitivityResult:
    alt = _resolve_target(model, instance, target)
    seq = build_sequence(instance, alt, model.config, model.max_len)
    scores = position_scores(model, seq)
    return SensitivityResult(
        instance_id=instance.id,
        alternative=alt,
        tokens=seq.tokens,
        parts=seq.parts,
        scores=tuple(float(s) for s in scores),
    )


@dataclass(frozen=True)
class TokenSensitivity:
    token: str
    mean_all: float  # averaged over every instance; absent counts as 0
    mean_present: float  # averaged over instances whose sequence has the token
    n_present: int


def cue_sensitivity(
    model: ScorerModel, dataset: Dataset, target: str = "gold"
) -> dict[str, TokenSensitivity]:
    """Aggregate per-token sensitivity S(k): for each instance, the shares of
    all positions holding token k are summed (zero when k is absent), then
    averaged over the whole dataset."""
    if len(dataset) == 0:
        raise ValidationError("dataset is empty")
    totals: dict[str, float] = {}
    present: dict[str, int] = {}
    for instance in dataset:
        result = sensitivity(model, instance, target)
        per_token: dict[str, float] = {}
        for token, share in zip(result.tokens, result.scores):
            per_token[token] = per_token.get(token, 0.0) + share
        for token, value in per_token.items():
            totals[token] = totals.get(token, 0.0) + value
            present[token] = present.get(token, 0) + 1
    m = len(dataset)
    return {
        token: TokenSensitivity(
            token=token,
            mean_all=totals[token] / m,
            mean_present=totals[token] / present[token],
            n_present=present[token],
        )
        for token in totals
    }


@dataclass(frozen=True)
class DeltaRow:
    token: str
    original: float
    mirrored: float

    @property
    def delta(self) -> float:
        return self.original - self.mirrored


@dataclass(frozen=True)
class SensitivityDelta:
    """Token-level sensitivity means on two datasets and their differences,
    sorted by absolute difference (largest shifts first)."""

    target: str
    rows: tuple[DeltaRow, ...]

    def top(self, k: int) -> tuple[DeltaRow, ...]:
        return self.rows[:k]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["token", "original", "mirrored", "delta"])
        for row in self.rows:
            writer.writerow(
                [row.token, f"{row.original:.6f}", f"{row.mirrored:.6f}", f"{row.delta:.6f}"]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "target": self.target,
                "rows": [
                    {
                        "token": r.token,
                        "original": r.original,
                        "mirrored": r.mirrored,
                        "delta": r.delta,
                    }
                    for r in self.rows
                ],
            },
            indent=2,
            sort_keys=True,
        )


def sensitivity_delta(
    model: ScorerModel,
    original: Dataset,
    mirrored: Dataset,
    target: str = "gold",
) -> SensitivityDelta:
    s_orig = cue_sensitivity(model, original, target)
    s_mirr = cue_sensitivity(model, mirrored, target)
    tokens = sorted(set(s_orig) | set(s_mirr))
    rows = [
        DeltaRow(
            token=token,
            original=s_orig[token].mean_all if token in s_orig else 0.0,
            mirrored=s_mirr[token].mean_all if token in s_mirr else 0.0,
        )
        for token in tokens
    ]
    rows.sort(key=lambda r: (-abs(r.delta), r.token))
    return SensitivityDelta(target=target, rows=tuple(rows))


_MAGIC = b"SCOR"
_VERSION = 1


def save_model(model: ScorerModel, path) -> None:
    out = bytearray()
    out += _MAGIC
    out += struct.pack(
        "<HIIi???",
        _VERSION,
        len(model.vocabulary),
        model.max_len,
        model.seed,
        model.config.lowercase,
        model.config.strip_punctuation,
        model.config.punctuation_as_tokens,
    )
    out += struct.pack("<I", model.dim)
    for token in model.vocabulary:
        raw = token.encode("utf-8")
        out += struct.pack("<H", len(raw))
        out += raw
    out += model.embeddings.astype("<f8").tobytes()
    out += model.positions.astype("<f8").tobytes()
    out += model.weights.astype("<f8").tobytes()
    out += struct.pack("<d", model.bias)
    Path(path).write_bytes(bytes(out))


def load_model(path) -> ScorerModel:
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ValidationError(f"{path}: not a scorer model file (bad magic)")
    offset = 4
    version, vocab_size, max_len, seed, lower, strip, punct = struct.unpack_from(
        "<HIIi???", data, offset
    )
    offset += struct.calcsize("<HIIi???")
    if version != _VERSION:
        raise ValidationError(f"{path}: unsupported model version {version}")
    (dim,) = struct.unpack_from("<I", data, offset)
    offset += 4
    vocabulary = []
    for _ in range(vocab_size):
        (length,) = struct.unpack_from("<H", data, offset)
        offset += 2
        vocabulary.append(data[offset : offset + length].decode("utf-8"))
        offset += length
    def take(count: int) -> np.ndarray:
        nonlocal offset
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).copy()
        offset += count * 8
        return arr
    embeddings = take(vocab_size * dim).reshape(vocab_size, dim)
    positions = take(max_len * dim).reshape(max_len, dim)
    weights = take(dim)
    (bias,) = struct.unpack_from("<d", data, offset)
    return ScorerModel(
        vocabulary=tuple(vocabulary),
        embeddings=embeddings,
        positions=positions,
        weights=weights,
        bias=float(bias),
        config=TokenizerConfig(
            lowercase=lower, strip_punctuation=strip, punctuation_as_tokens=punct
        ),
        seed=seed,
    )
