import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuecheck import (
    ALT1,
    ALT2,
    CueAuditReport,
    Dataset,
    GuidelineThresholds,
    Instance,
    MirrorPairing,
    TokenizerConfig,
    ValidationError,
    compute_cue_stats,
    guideline_check,
    infer_mirror_pairing,
    infer_self_pairing,
    verify_balance,
)



@pytest.fixture
def designed() -> Dataset:
    """Hand-computed statistics (alternatives only, default tokenizer):

    "the": one-sided in all 4 instances, gold side in 3 -> a=4, p=0.75, x=1.0
    "a":   one-sided in 2, gold side in 1             -> a=2, p=0.50, x=0.5
    "fell": one-sided in 2, gold side in 0            -> a=2, p=0.00, x=0.5
    """
    return Dataset(
        "designed",
        (
            Instance(1, "the premise", "the cat ran", "a dog slept", "cause", ALT1),
            Instance(2, "the premise", "a bird flew", "the fish swam", "cause", ALT1),
            Instance(3, "the premise", "the sun rose", "rain fell", "effect", ALT1),
            Instance(4, "the premise", "snow fell", "the wind blew", "effect", ALT2),
        ),
    )


def test_hand_computed_statistics(designed):
    report = compute_cue_stats(designed)
    stats = report.by_token()
    the = stats["the"]
    assert (the.applicability, the.productivity, the.coverage) == (4, 0.75, 1.0)
    a = stats["a"]
    assert (a.applicability, a.productivity, a.coverage) == (2, 0.5, 0.5)
    fell = stats["fell"]
    assert (fell.applicability, fell.productivity, fell.coverage) == (2, 0.0, 0.5)


def test_premise_tokens_are_ignored(designed):
    # every premise contains "the"; its statistics must come from the
    # alternatives alone
    loud_premises = Dataset(
        designed.name,
        tuple(
            Instance(i.id, "the the the unmistakable premise token xyzzy", i.alt1, i.alt2,
                     i.question, i.gold)
            for i in designed
        ),
    )
    original = compute_cue_stats(designed)
    modified = compute_cue_stats(loud_premises)
    assert original.stats == modified.stats
    assert "xyzzy" not in modified.by_token()


def test_token_in_both_alternatives_never_applicable():
    dataset = Dataset(
        "both",
        (Instance(1, "p", "it is shared here", "it is shared there", "cause", ALT1),),
    )
    stats = compute_cue_stats(dataset).by_token()
    for token in ("it", "is", "shared"):
        assert token not in stats
    assert stats["here"].applicability == 1
    assert stats["there"].applicability == 1


def test_zero_applicability_token_absent(designed):
    assert "premise" not in compute_cue_stats(designed).by_token()


def test_ranking_and_tie_break(designed):
    by_coverage = [s.token for s in compute_cue_stats(designed, ranking_key="coverage").stats]
    assert by_coverage[0] == "the"
    assert by_coverage.index("a") < by_coverage.index("fell")  # lexicographic tie-break
    by_prod = [s.token for s in compute_cue_stats(designed, ranking_key="productivity").stats]
    assert by_prod.index("the") < by_prod.index("a") < by_prod.index("fell")


def test_unknown_ranking_key(designed):
    with pytest.raises(ValidationError):
        compute_cue_stats(designed, ranking_key="frequency")


def test_report_json_roundtrip(designed):
    report = compute_cue_stats(designed)
    again = CueAuditReport.from_json(report.to_json())
    assert again == report


def test_report_markdown(designed):
    text = compute_cue_stats(designed).to_markdown(top=2)
    lines = text.strip().splitlines()
    assert lines[0] == "| Cue | App. | Prod. | Cov. |"
    assert len(lines) == 4  # header, rule, two rows
    assert "| the | 4 | 75.0 | 100.0 |" in lines


def test_report_top(designed):
    report = compute_cue_stats(designed)
    assert len(report.top(2)) == 2
    assert [s.token for s in report.top(2)] == ["the", "a"]


def test_tokenizer_config_changes_statistics():
    dataset = Dataset(
        "cased",
        (Instance(1, "p", "The end came", "an end loomed", "cause", ALT1),),
    )
    default = compute_cue_stats(dataset).by_token()
    assert "the" in default and "end" not in default
    cased = compute_cue_stats(dataset, TokenizerConfig(lowercase=False)).by_token()
    assert "The" in cased


# --- balance ---------------------------------------------------------------


def test_balanced_fixture_passes(balanced_50):
    _, _, combined = balanced_50
    pairing = infer_self_pairing(combined)
    report = verify_balance(combined, pairing)
    assert report.ok
    assert report.n == 100
    assert report.n_pairs == 50
    assert report.token_violations == ()
    assert report.alternative_imbalances == ()


def test_two_file_balance(balanced_small):
    originals, mirrors, combined = balanced_small
    pairing = infer_mirror_pairing(originals, mirrors)
    assert verify_balance(combined, pairing).ok


def test_unbalanced_pair_detected():
    # mirror whose gold was NOT flipped: "alpha" stays the gold side twice
    orig = Instance(1, "first premise alpha", "ended alpha", "ended beta", "cause", ALT1)
    mirr = Instance(2, "second premise beta", "ended alpha", "ended beta", "cause", ALT1)
    combined = Dataset("broken", (orig, mirr))
    pairing = MirrorPairing(pairs={1: 2})
    report = verify_balance(combined, pairing)
    assert not report.ok
    tokens = {v.token for v in report.token_violations}
    assert tokens == {"alpha", "beta"}
    alpha = next(v for v in report.token_violations if v.token == "alpha")
    assert alpha.applicability == 2
    assert alpha.productivity == 1.0
    texts = {a.text for a in report.alternative_imbalances}
    assert texts == {"ended alpha", "ended beta"}


def test_balance_requires_total_pairing(balanced_small):
    _, _, combined = balanced_small
    partial = MirrorPairing(pairs={1: 1001})
    with pytest.raises(ValidationError):
        verify_balance(combined, partial)


@settings(max_examples=25, deadline=None)
@given(
    n_pairs=st.integers(min_value=1, max_value=5),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_mirroring_always_balances(n_pairs, seed):
    """Any dataset closed under mirroring passes the balance check: shared
    alternatives with complementary gold force every productivity to 1/2."""
    import random

    rng = random.Random(seed)
    words = ["wind", "rain", "door", "light", "sound", "step"]
    originals = []
    mirrors = []
    for j in range(n_pairs):
        # salt with the pair index so groups cannot collide
        alt1 = f"{rng.choice(words)} pair{j} {rng.choice(words)}"
        alt2 = f"{rng.choice(words)} pair{j} other"
        gold = rng.choice((ALT1, ALT2))
        question = rng.choice(("cause", "effect"))
        originals.append(
            Instance(j + 1, f"premise one {rng.choice(words)}", alt1, alt2, question, gold)
        )
        mirrors.append(
            Instance(100 + j, f"premise two {rng.choice(words)}", alt1, alt2, question,
                     ALT1 + ALT2 - gold)
        )
    combined = Dataset("random", tuple(originals) + tuple(mirrors))
    pairing = MirrorPairing(pairs={o.id: m.id for o, m in zip(originals, mirrors)})
    assert verify_balance(combined, pairing).ok


# --- guidelines ------------------------------------------------------------


def test_guideline_oracle_values():
    orig = Instance(1, "the dog barked", "it was loud", "it was quiet", "cause", ALT1)
    mirr = Instance(2, "the cat barked", "it was loud", "it was quiet", "cause", ALT2)
    originals = Dataset("o", (orig,))
    mirrors = Dataset("m", (mirr,))
    pairing = infer_mirror_pairing(originals, mirrors)
    report = guideline_check(pairing, originals, mirrors)
    record = report.records[0]
    # {the, cat, barked} vs {the, dog, barked}: 2 shared of 4 total
    assert record.premise_overlap == 0.5
    assert record.premise_alt_overlap == 0.0
    assert record.length_ratio == 1.0
    assert record.violations == ()
    assert report.ok


def test_guideline_violations_flagged():
    orig = Instance(1, "the dog barked", "it was loud", "it was quiet", "cause", ALT1)
    mirr = Instance(
        2,
        "somebody entirely rewrote this premise text and made it very much longer than before",
        "it was loud",
        "it was quiet",
        "cause",
        ALT2,
    )
    pairing = infer_mirror_pairing(Dataset("o", (orig,)), Dataset("m", (mirr,)))
    report = guideline_check(pairing, Dataset("o", (orig,)), Dataset("m", (mirr,)))
    record = report.records[0]
    assert "premise-overlap" in record.violations
    assert "length-ratio" in record.violations
    assert not report.ok


def test_guideline_premise_alt_overlap():
    orig = Instance(1, "the dog barked", "it was loud", "it was quiet", "cause", ALT1)
    mirr = Instance(2, "it was loud dog", "it was loud", "it was quiet", "cause", ALT2)
    pairing = infer_mirror_pairing(Dataset("o", (orig,)), Dataset("m", (mirr,)))
    report = guideline_check(
        pairing, Dataset("o", (orig,)), Dataset("m", (mirr,)),
        GuidelineThresholds(min_premise_overlap=0.0),
    )
    record = report.records[0]
    # mirrored premise {it, was, loud, dog} vs alternative {it, was, loud}: 3/4
    assert record.premise_alt_overlap == 0.75
    assert record.violations == ("premise-alt-overlap",)


def test_guideline_thresholds_configurable():
    orig = Instance(1, "the dog barked", "it was loud", "it was quiet", "cause", ALT1)
    mirr = Instance(2, "the cat barked", "it was loud", "it was quiet", "cause", ALT2)
    pairing = infer_mirror_pairing(Dataset("o", (orig,)), Dataset("m", (mirr,)))
    strict = guideline_check(
        pairing, Dataset("o", (orig,)), Dataset("m", (mirr,)),
        GuidelineThresholds(min_premise_overlap=0.9),
    )
    assert not strict.ok
