"""Shared fixtures: small hand-checkable datasets and synthetic mirrored
corpora whose statistics are known by construction."""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from cuecheck import ALT1, ALT2, Dataset, Instance


@pytest.fixture
def toy_dataset() -> Dataset:
    """Five small instances; includes shared tokens on both alternatives
    (never applicable) and one-sided tokens on gold and wrong sides."""
    return Dataset(
        "toy",
        (
            Instance(
                1,
                "the man broke his toe",
                "he got a hole in his sock",
                "he dropped a hammer on his foot",
                "cause",
                ALT2,
            ),
            Instance(2, "the sun was rising", "a bird sang", "the night fell", "effect", ALT1),
            Instance(
                3,
                "she poured water on the fire",
                "the fire grew",
                "the fire went out",
                "effect",
                ALT2,
            ),
            Instance(4, "my stomach hurt", "i ate a whole cake", "i took a nap", "cause", ALT1),
            Instance(5, "the glass fell", "it bounced", "it shattered", "effect", ALT2),
        ),
    )


def _mirror_pair(pair_id: int, mirror_id: int):
    """One original/mirror pair; both share alternatives verbatim with
    complementary gold labels and different premises."""
    alpha = f"group{pair_id} ended with alpha"
    beta = f"group{pair_id} ended with beta"
    if pair_id % 2 == 0:
        alt1, alt2, alpha_side = alpha, beta, ALT1
    else:
        alt1, alt2, alpha_side = beta, alpha, ALT2
    question = "cause" if pair_id % 3 == 0 else "effect"
    original = Instance(
        pair_id + 1,
        f"the sensor flagged alpha in run {pair_id}",
        alt1,
        alt2,
        question,
        alpha_side,
    )
    mirrored = Instance(
        mirror_id,
        f"the sensor flagged beta in run {pair_id}",
        alt1,
        alt2,
        question,
        ALT1 + ALT2 - alpha_side,
    )
    return original, mirrored


def make_balanced(n_pairs: int, mirror_offset: int = 1000) -> tuple[Dataset, Dataset, Dataset]:
    """(originals, mirrors, combined) with every pair balanced by
    construction: on the combined dataset every applicable token's
    productivity is exactly one half."""
    originals = []
    mirrors = []
    for j in range(n_pairs):
        orig, mirr = _mirror_pair(j, mirror_offset + j + 1)
        originals.append(orig)
        mirrors.append(mirr)
    return (
        Dataset("originals", tuple(originals)),
        Dataset("mirrors", tuple(mirrors)),
        Dataset("combined", tuple(originals) + tuple(mirrors)),
    )


@pytest.fixture
def balanced_small():
    """3 mirrored pairs: originals, mirrors, combined."""
    return make_balanced(3)


@pytest.fixture
def balanced_50():
    """50 mirrored pairs (100 instances), the synthetic balance fixture."""
    return make_balanced(50)


@pytest.fixture
def balanced_100():
    """100 mirrored pairs (200 instances) for training-scale checks."""
    return make_balanced(100)


def cued_dataset(n: int, start_id: int = 1) -> Dataset:
    """Unbalanced set where the token 'alpha' always sits on the gold side;
    a premise-oblivious learner can exploit it fully."""
    instances = []
    for j in range(n):
        orig, _ = _mirror_pair(j, 10_000 + j)
        instances.append(
            Instance(start_id + j, orig.premise, orig.alt1, orig.alt2, orig.question, orig.gold)
        )
    return Dataset("cued", tuple(instances))


def data_dir() -> Path:
    """Directory with optional real datasets; tests depending on them skip
    when the files are absent."""
    override = os.environ.get("CUECHECK_DATA")
    if override:
        return Path(override)
    return Path(__file__).resolve().parent.parent / "data"


def real_file(*names: str) -> Path | None:
    """First existing file among ``names`` inside the data directory."""
    base = data_dir()
    for name in names:
        candidate = base / name
        if candidate.exists():
            return candidate
    return None
