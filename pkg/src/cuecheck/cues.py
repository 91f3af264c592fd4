"""Superficial-cue statistics over the alternatives of a choice dataset.

A token is a *cue* when its distribution across correct and wrong
alternatives is lopsided enough that a classifier could exploit it without
reading the premise. Three measures quantify this per token k over a dataset
of n instances:

* applicability  alpha_k = number of instances where k occurs in exactly one
  of the two alternatives;
* productivity   pi_k    = fraction of those applicable instances where the
  alternative containing k is the gold answer (undefined when alpha_k = 0);
* coverage       xi_k    = alpha_k / n.

Premise text never enters these counts. On a perfectly mirrored dataset
(every instance paired with a premise-rewritten copy that shares both
alternatives verbatim and flips the gold label) each pair contributes 2 to
alpha_k and exactly one gold-side occurrence, so pi_k = 1/2 exactly for
every applicable token.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .corpus import ALT1, ALT2, Dataset, MirrorPairing
from .errors import ValidationError
from .tokenizer import DEFAULT_CONFIG, TokenizerConfig, token_set, tokenize

RANKING_KEYS = ("coverage", "productivity", "applicability")


@dataclass(frozen=True)
class TokenStats:
    """Cue measures of a single token; ``productivity`` is None when the
    token is never one-sided (applicability 0)."""

    token: str
    applicability: int
    productivity: Optional[float]
    coverage: float


@dataclass(frozen=True)
class CueAuditReport:
    """Ranked per-token cue statistics for one dataset and tokenizer."""

    dataset_name: str
    n: int
    tokenizer: str
    ranking_key: str
    stats: tuple[TokenStats, ...]

    def top(self, count: int) -> tuple[TokenStats, ...]:
        return self.stats[:count]

    def by_token(self) -> dict[str, TokenStats]:
        return {s.token: s for s in self.stats}

    def to_json(self, top: Optional[int] = None) -> str:
        rows = self.stats if top is None else self.stats[:top]
        payload = {
            "dataset": self.dataset_name,
            "n": self.n,
            "tokenizer": self.tokenizer,
            "ranking_key": self.ranking_key,
            "tokens": [
                {
                    "token": s.token,
                    "applicability": s.applicability,
                    "productivity": s.productivity,
                    "coverage": s.coverage,
                }
                for s in rows
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "CueAuditReport":
        payload = json.loads(text)
        stats = tuple(
            TokenStats(
                token=row["token"],
                applicability=row["applicability"],
                productivity=row["productivity"],
                coverage=row["coverage"],
            )
            for row in payload["tokens"]
        )
        return cls(
            dataset_name=payload["dataset"],
            n=payload["n"],
            tokenizer=payload["tokenizer"],
            ranking_key=payload["ranking_key"],
            stats=stats,
        )

    def to_markdown(self, top: Optional[int] = None) -> str:
        """Render as a table with applicability counts and productivity and
        coverage as percents (one decimal)."""
        rows = self.stats if top is None else self.stats[:top]
        lines = [
            "| Cue | App. | Prod. | Cov. |",
            "| --- | ---: | ---: | ---: |",
        ]
        for s in rows:
            prod = "-" if s.productivity is None else f"{100.0 * s.productivity:.1f}"
            lines.append(f"| {s.token} | {s.applicability} | {prod} | {100.0 * s.coverage:.1f} |")
        return "\n".join(lines) + "\n"


def _one_sided_counts(dataset: Dataset, config: TokenizerConfig):
    """Per token: (count of instances where it is one-sided, count of those
    where its side is gold)."""
    applicability: dict[str, int] = {}
    gold_side: dict[str, int] = {}
    for inst in dataset:
        set1 = token_set(inst.alt1, config)
        set2 = token_set(inst.alt2, config)
        for token in set1 - set2:
            applicability[token] = applicability.get(token, 0) + 1
            if inst.gold == ALT1:
                gold_side[token] = gold_side.get(token, 0) + 1
        for token in set2 - set1:
            applicability[token] = applicability.get(token, 0) + 1
            if inst.gold == ALT2:
                gold_side[token] = gold_side.get(token, 0) + 1
    return applicability, gold_side


def compute_cue_stats(
    dataset: Dataset,
    config: TokenizerConfig = DEFAULT_CONFIG,
    ranking_key: str = "coverage",
) -> CueAuditReport:
    """Compute applicability/productivity/coverage for every applicable
    token, ranked by ``ranking_key`` descending with lexicographic
    tie-breaks. Tokens that are never one-sided (including those appearing
    only in premises) carry no usable signal and are omitted.
    """
    if len(dataset) == 0:
        raise ValidationError("cue statistics need a non-empty dataset")
    if ranking_key not in RANKING_KEYS:
        raise ValidationError(f"ranking_key must be one of {RANKING_KEYS}")
    n = len(dataset)
    applicability, gold_side = _one_sided_counts(dataset, config)
    stats = []
    for token, alpha in applicability.items():
        stats.append(
            TokenStats(
                token=token,
                applicability=alpha,
                productivity=gold_side.get(token, 0) / alpha,
                coverage=alpha / n,
            )
        )

    def sort_key(s: TokenStats):
        value = getattr(s, ranking_key)
        if value is None:
            value = float("-inf")
        return (-value, s.token)

    stats.sort(key=sort_key)
    return CueAuditReport(
        dataset_name=dataset.name,
        n=n,
        tokenizer=config.fingerprint(),
        ranking_key=ranking_key,
        stats=tuple(stats),
    )


@dataclass(frozen=True)
class BalanceViolation:
    """A token whose productivity deviates from 1/2 on a supposedly
    mirrored dataset."""

    token: str
    applicability: int
    gold_side_count: int

    @property
    def productivity(self) -> float:
        return self.gold_side_count / self.applicability


@dataclass(frozen=True)
class AlternativeImbalance:
    """An alternative string whose counts as correct and as wrong answer
    differ across the dataset."""

    text: str
    correct_count: int
    wrong_count: int


@dataclass(frozen=True)
class BalanceReport:
    n: int
    n_pairs: int
    token_violations: tuple[BalanceViolation, ...]
    alternative_imbalances: tuple[AlternativeImbalance, ...]

    @property
    def ok(self) -> bool:
        return not self.token_violations and not self.alternative_imbalances


def verify_balance(
    dataset: Dataset,
    pairing: MirrorPairing,
    config: TokenizerConfig = DEFAULT_CONFIG,
) -> BalanceReport:
    """Check the mirror guarantees on a combined dataset.

    The pairing must cover every instance exactly once. Reports every token
    with positive applicability whose productivity is not exactly 1/2
    (integer-exact comparison, no float rounding) and every alternative
    string that does not occur equally often as correct and as wrong answer.
    Both lists are empty for a perfect mirror.
    """
    if not pairing.covers(dataset):
        raise ValidationError("pairing must place every instance in exactly one pair")
    applicability, gold_side = _one_sided_counts(dataset, config)
    violations = []
    for token in sorted(applicability):
        alpha = applicability[token]
        correct = gold_side.get(token, 0)
        if 2 * correct != alpha:
            violations.append(
                BalanceViolation(token=token, applicability=alpha, gold_side_count=correct)
            )
    correct_counts: dict[str, int] = {}
    wrong_counts: dict[str, int] = {}
    for inst in dataset:
        gold_text = inst.gold_text
        other = inst.alternative(ALT1 + ALT2 - inst.gold)
        correct_counts[gold_text] = correct_counts.get(gold_text, 0) + 1
        wrong_counts[other] = wrong_counts.get(other, 0) + 1
    imbalances = []
    for text in sorted(set(correct_counts) | set(wrong_counts)):
        c = correct_counts.get(text, 0)
        w = wrong_counts.get(text, 0)
        if c != w:
            imbalances.append(AlternativeImbalance(text=text, correct_count=c, wrong_count=w))
    return BalanceReport(
        n=len(dataset),
        n_pairs=len(pairing),
        token_violations=tuple(violations),
        alternative_imbalances=tuple(imbalances),
    )


@dataclass(frozen=True)
class GuidelineThresholds:
    """Configurable cutoffs for the mirrored-premise authoring checks."""

    min_premise_overlap: float = 0.2
    max_premise_alt_overlap: float = 0.5
    min_length_ratio: float = 0.5
    max_length_ratio: float = 2.0


@dataclass(frozen=True)
class PairGuidelineRecord:
    original_id: int
    mirrored_id: int
    premise_overlap: float
    premise_alt_overlap: float
    length_ratio: float
    violations: tuple[str, ...]


@dataclass(frozen=True)
class GuidelineReport:
    thresholds: GuidelineThresholds
    records: tuple[PairGuidelineRecord, ...]

    @property
    def ok(self) -> bool:
        return all(not r.violations for r in self.records)


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def guideline_check(
    pairing: MirrorPairing,
    original: Dataset,
    mirrored: Dataset,
    thresholds: GuidelineThresholds = GuidelineThresholds(),
    config: TokenizerConfig = DEFAULT_CONFIG,
) -> GuidelineReport:
    """Score each mirrored premise against the authoring guidelines.

    Per pair: Jaccard overlap between the new and the original premise
    (should be high), the maximum Jaccard overlap between the new premise
    and either alternative (should stay low; sharing a word that already
    occurs in the alternatives is explicitly acceptable, which the threshold
    encodes), and the token-length ratio new/original (should stay near 1).
    """
    orig_idx = original.index()
    mirr_idx = mirrored.index()
    records = []
    for orig_id, mirr_id in sorted(pairing.pairs.items()):
        try:
            orig = orig_idx[orig_id]
            mirr = mirr_idx[mirr_id]
        except KeyError as exc:
            raise ValidationError(f"pairing references unknown id {exc.args[0]}") from None
        new_premise = token_set(mirr.premise, config)
        old_premise = token_set(orig.premise, config)
        premise_overlap = _jaccard(new_premise, old_premise)
        premise_alt_overlap = max(
            _jaccard(new_premise, token_set(mirr.alt1, config)),
            _jaccard(new_premise, token_set(mirr.alt2, config)),
        )
        old_len = len(tokenize(orig.premise, config))
        new_len = len(tokenize(mirr.premise, config))
        length_ratio = new_len / old_len if old_len else float("inf")
        violations = []
        if premise_overlap < thresholds.min_premise_overlap:
            violations.append("premise-overlap")
        if premise_alt_overlap > thresholds.max_premise_alt_overlap:
            violations.append("premise-alt-overlap")
        if not thresholds.min_length_ratio <= length_ratio <= thresholds.max_length_ratio:
            violations.append("length-ratio")
        records.append(
            PairGuidelineRecord(
                original_id=orig_id,
                mirrored_id=mirr_id,
                premise_overlap=premise_overlap,
                premise_alt_overlap=premise_alt_overlap,
                length_ratio=length_ratio,
                violations=tuple(violations),
            )
        )
    return GuidelineReport(thresholds=thresholds, records=tuple(records))
