import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuecheck import (
    ALT1,
    ALT2,
    Instance,
    ValidationError,
    build_cooccurrence,
    build_cooccurrence_sharded,
    default_stopwords,
    floor_value,
    load_stopwords,
    load_table,
    merge_tables,
    pmi,
    pmi_solve,
    save_table,
)
from cuecheck.pmi import CooccurrenceTable


def test_hand_counted_window_one():
    """Corpus 'a b a', window 1: positions pair with one predecessor each,
    so (a,b) fires at position 2 and (b,a)->(a,b) at position 3."""
    table = build_cooccurrence("a b a", window=1)
    assert table.unigrams == {"a": 2, "b": 1}
    assert table.pairs == {("a", "b"): 2}
    assert table.total_windows == 3


def test_hand_counted_window_two():
    table = build_cooccurrence("x y z", window=2)
    assert table.pairs == {("x", "y"): 1, ("x", "z"): 1, ("y", "z"): 1}
    assert table.total_windows == 3


def test_same_token_never_pairs_with_itself():
    table = build_cooccurrence("q q q q", window=3)
    assert table.pairs == {}
    assert table.unigrams == {"q": 4}


def test_unigram_counts_sum_to_total():
    table = build_cooccurrence("the cat sat on the mat near the cat", window=5)
    assert sum(table.unigrams.values()) == table.total_windows


def test_directional_keeps_order():
    table = build_cooccurrence("cold wind cold", window=1, directional=True)
    assert table.pairs == {("cold", "wind"): 1, ("wind", "cold"): 1}


def test_pmi_hand_value():
    table = build_cooccurrence("a b a", window=1)
    # log((2+0.5)*3 / ((2+0.5)*(1+0.5))) = log(2)
    assert pmi(table, "a", "b") == pytest.approx(math.log(2.0), abs=1e-12)


def test_pmi_symmetric_table_is_symmetric():
    table = build_cooccurrence("one two three two one three one", window=3)
    tokens = sorted(table.unigrams)
    for x in tokens:
        for y in tokens:
            assert pmi(table, x, y) == pmi(table, y, x)


def test_unseen_pair_gets_floor():
    table = build_cooccurrence("a b a", window=1)
    assert pmi(table, "zzz", "qqq") == floor_value(table)
    # floor is the most pessimistic value the formula can produce
    assert floor_value(table) < pmi(table, "a", "b")


def test_zero_smoothing_floors_zero_counts():
    table = build_cooccurrence("a b c d e", window=1)
    # 'a' and 'e' never share a window
    assert pmi(table, "a", "e", smoothing=0.0) == floor_value(table, smoothing=0.0)


def test_window_validation():
    with pytest.raises(ValidationError):
        build_cooccurrence("a b", window=0)


def test_chunked_input_equals_whole_string():
    text = "the quick brown fox jumps over the lazy dog " * 20
    whole = build_cooccurrence(text, window=4)
    # chunk boundaries cut tokens in half; the carry logic must reassemble
    chunks = [text[i : i + 17] for i in range(0, len(text), 17)]
    chunked = build_cooccurrence(chunks, window=4)
    assert chunked == whole


def test_shard_merge_equals_single_pass():
    text = ("alpha beta gamma delta epsilon zeta " * 50).strip()
    single = build_cooccurrence(text, window=5)
    shards = build_cooccurrence_sharded(text, window=5, shard_tokens=37)
    assert len(shards) > 1
    merged = merge_tables(shards)
    assert merged == single


def test_merge_disjoint_corpora_sums_counts():
    t1 = build_cooccurrence("a b", window=1)
    t2 = build_cooccurrence("b c", window=1)
    merged = merge_tables([t1, t2])
    assert merged.unigrams == {"a": 1, "b": 2, "c": 1}
    assert merged.total_windows == 4
    assert merged.pairs == {("a", "b"): 1, ("b", "c"): 1}
    # differing fingerprints combine by XOR: order independent
    assert merged.fingerprint == merge_tables([t2, t1]).fingerprint
    assert merged.fingerprint not in (t1.fingerprint, t2.fingerprint)


def test_merge_rejects_mixed_settings():
    t1 = build_cooccurrence("a b", window=1)
    t2 = build_cooccurrence("a b", window=2)
    with pytest.raises(ValidationError):
        merge_tables([t1, t2])


def test_persistence_roundtrip(tmp_path):
    table = build_cooccurrence("the cat sat on the mat", window=3, directional=True)
    path = tmp_path / "counts.cooc"
    save_table(table, path)
    again = load_table(path)
    assert again == table


def test_persistence_rejects_wrong_magic(tmp_path):
    path = tmp_path / "bogus.cooc"
    path.write_bytes(b"NOPE rest of file")
    with pytest.raises(ValidationError):
        load_table(path)


def test_save_is_deterministic(tmp_path):
    table = build_cooccurrence("b a c a b", window=2)
    p1, p2 = tmp_path / "one.cooc", tmp_path / "two.cooc"
    save_table(table, p1)
    save_table(table, p2)
    assert p1.read_bytes() == p2.read_bytes()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from("abcdef"), min_size=0, max_size=40), st.integers(1, 6))
def test_invariants_hold_for_random_corpora(tokens, window):
    table = build_cooccurrence(" ".join(tokens), window=window)
    assert sum(table.unigrams.values()) == table.total_windows == len(tokens)
    for (x, y), count in table.pairs.items():
        assert x < y  # symmetric tables keep sorted keys
        assert count >= 1
    merged = merge_tables(build_cooccurrence_sharded(" ".join(tokens), window=window,
                                                     shard_tokens=7))
    assert merged == table


# --- stopwords and the solver ----------------------------------------------


def test_default_stopwords_non_trivial():
    words = default_stopwords()
    assert {"the", "a", "was", "to", "in"} <= words
    assert "hammer" not in words


def test_load_stopwords(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# comment\nfoo\n\nbar\n")
    assert load_stopwords(path) == frozenset({"foo", "bar"})


def test_pmi_solver_prefers_associated_alternative():
    corpus = ("rain flood water storm damage . " * 40
              + "sunshine picnic park warm . " * 40)
    table = build_cooccurrence(corpus, window=5)
    inst = Instance(1, "the rain fell for days", "the flood came", "the picnic started",
                    "effect", ALT1)
    decision = pmi_solve(inst, table, default_stopwords())
    assert decision.choice == ALT1
    assert decision.score_alt1 > decision.score_alt2


def test_pmi_solver_flags_empty_alternative():
    table = build_cooccurrence("alpha beta gamma " * 10, window=3)
    stopwords = frozenset({"the", "only", "stopwords", "here"})
    inst = Instance(1, "alpha beta", "the only stopwords here", "alpha gamma", "cause", ALT2)
    decision = pmi_solve(inst, table, stopwords)
    assert ALT1 in decision.empty_alternatives
    assert decision.choice == ALT2


def test_pmi_solver_empty_table_rejected():
    table = CooccurrenceTable(window=5, directional=False, unigrams={}, pairs={},
                              total_windows=0, fingerprint="0" * 32)
    inst = Instance(1, "p", "a", "b", "cause", ALT1)
    with pytest.raises(ValidationError):
        pmi_solve(inst, table, frozenset())


def test_pmi_solver_directional_respects_question():
    """On a directional table, cause-side tokens precede effect-side tokens,
    so swapping the question type changes which count is consulted."""
    corpus = "spark fire pad " * 30  # 'spark' precedes 'fire'; 'pad' breaks wrap-around
    table = build_cooccurrence(corpus, window=1, directional=True)
    assert pmi(table, "spark", "fire") > pmi(table, "fire", "spark")
    effect_q = Instance(1, "the spark flew", "the fire started", "the rain stopped",
                        "effect", ALT1)
    cause_q = Instance(2, "the fire started", "the spark flew", "the rain fell",
                       "cause", ALT1)
    stop = frozenset({"the"})
    d_effect = pmi_solve(effect_q, table, stop)
    d_cause = pmi_solve(cause_q, table, stop)
    # premise 'spark' -> alternative 'fire' matches the corpus order
    assert d_effect.score_alt1 > d_effect.score_alt2
    # alternative 'spark' -> premise 'fire' likewise
    assert d_cause.score_alt1 > d_cause.score_alt2


def test_pmi_solver_tie_flagged():
    table = build_cooccurrence("x y " * 10, window=1)
    inst = Instance(1, "x", "same words", "same words", "cause", ALT1)
    decision = pmi_solve(inst, table, frozenset())
    assert decision.tie
    assert decision.choice == ALT1
