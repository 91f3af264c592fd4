import pytest

from cuecheck import (
    ALT1,
    ALT2,
    CorpusFormatError,
    Dataset,
    Instance,
    MirrorAmbiguityError,
    ValidationError,
    infer_mirror_pairing,
    infer_self_pairing,
    parse_copa_xml,
    parse_jsonl,
    serialize,
    split_train_valid,
    subsample_pairs,
)
from cuecheck.corpus import load_dataset

from conftest import make_balanced

XML_SAMPLE = """<?xml version="1.0" encoding="UTF-8"?>
<copa-corpus>
  <item id="7" asks-for="cause" most-plausible-alternative="1">
    <p>My body cast a shadow over the grass.</p>
    <a1>The sun was rising.</a1>
    <a2>The grass was cut.</a2>
  </item>
  <item id="8" asks-for="effect" most-plausible-alternative="2">
    <p>The woman repaired her faucet.</p>
    <a1>The faucet leaked.</a1>
    <a2>The faucet stopped leaking.</a2>
  </item>
</copa-corpus>
"""


def test_parse_copa_xml():
    dataset = parse_copa_xml(XML_SAMPLE, name="sample")
    assert len(dataset) == 2
    first = dataset.by_id(7)
    assert first.question == "cause"
    assert first.gold == ALT1
    assert first.alt2 == "The grass was cut."
    assert dataset.by_id(8).gold == ALT2


def test_xml_roundtrip():
    dataset = parse_copa_xml(XML_SAMPLE)
    again = parse_copa_xml(serialize(dataset, "xml"))
    assert again.instances == dataset.instances


def test_jsonl_roundtrip():
    dataset = parse_copa_xml(XML_SAMPLE)
    again = parse_jsonl(serialize(dataset, "jsonl"))
    assert again.instances == dataset.instances


def test_malformed_xml_reports_position():
    with pytest.raises(CorpusFormatError) as exc:
        parse_copa_xml("<copa-corpus><item></copa-corpus>")
    assert exc.value.line is not None


def test_bad_gold_attribute():
    bad = XML_SAMPLE.replace('most-plausible-alternative="1"', 'most-plausible-alternative="3"')
    with pytest.raises(CorpusFormatError) as exc:
        parse_copa_xml(bad)
    assert "7" in str(exc.value)


def test_jsonl_error_carries_line_number():
    good = '{"id": 1, "premise": "p", "choice1": "a", "choice2": "b", "question": "cause", "label": 0}'
    with pytest.raises(CorpusFormatError) as exc:
        parse_jsonl(good + "\n{not json}")
    assert exc.value.line == 2


def test_duplicate_ids_rejected():
    inst = Instance(1, "p", "a", "b", "cause", ALT1)
    with pytest.raises(ValidationError):
        Dataset("dup", (inst, inst))


def test_instance_validation():
    with pytest.raises(ValidationError):
        Instance(1, "  ", "a", "b", "cause", ALT1)
    with pytest.raises(ValidationError):
        Instance(1, "p", "a", "b", "why", ALT1)
    with pytest.raises(ValidationError):
        Instance(1, "p", "a", "b", "cause", 3)


def test_load_dataset_dispatches_on_suffix(tmp_path):
    xml_path = tmp_path / "set.xml"
    xml_path.write_text(XML_SAMPLE)
    assert len(load_dataset(xml_path)) == 2
    dataset = parse_copa_xml(XML_SAMPLE)
    jsonl_path = tmp_path / "set.jsonl"
    jsonl_path.write_bytes(serialize(dataset, "jsonl"))
    assert len(load_dataset(jsonl_path)) == 2
    with pytest.raises(CorpusFormatError):
        load_dataset(tmp_path / "set.csv")


def test_infer_mirror_pairing():
    originals, mirrors, _ = make_balanced(5)
    pairing = infer_mirror_pairing(originals, mirrors)
    assert len(pairing) == 5
    assert pairing.unmatched_original == ()
    assert pairing.unmatched_mirrored == ()
    assert pairing.pairs[1] == 1001


def test_mirror_pairing_reports_unmatched():
    originals, mirrors, _ = make_balanced(3)
    shorter = Dataset("m", mirrors.instances[:2])
    pairing = infer_mirror_pairing(originals, shorter)
    assert len(pairing) == 2
    assert len(pairing.unmatched_original) == 1


def test_mirror_pairing_ambiguity():
    originals, mirrors, _ = make_balanced(2)
    extra = Instance(99, "another premise entirely", mirrors.instances[0].alt1,
                     mirrors.instances[0].alt2, mirrors.instances[0].question,
                     mirrors.instances[0].gold)
    doubled = Dataset("m", tuple(mirrors.instances) + (extra,))
    with pytest.raises(MirrorAmbiguityError):
        infer_mirror_pairing(originals, doubled)


def test_self_pairing_on_combined():
    _, _, combined = make_balanced(4)
    pairing = infer_self_pairing(combined)
    assert len(pairing) == 4
    assert pairing.covers(combined)
    for orig, mirr in pairing.pairs.items():
        assert orig < mirr


def test_pairing_inverse():
    originals, mirrors, _ = make_balanced(3)
    pairing = infer_mirror_pairing(originals, mirrors)
    assert pairing.inverse().pairs == {m: o for o, m in pairing.pairs.items()}


def test_split_is_deterministic_and_pair_aware():
    _, _, combined = make_balanced(20)
    pairing = infer_self_pairing(combined)
    split1 = split_train_valid(combined, pairing, ratio=0.9, seed=3)
    split2 = split_train_valid(combined, pairing, ratio=0.9, seed=3)
    assert split1 == split2
    assert split1.train_ids | split1.valid_ids == set(combined.ids())
    # 20 units, 10% validation -> 2 pairs -> 4 instances
    assert len(split1.valid_ids) == 4
    for orig, mirr in pairing.pairs.items():
        side_o = orig in split1.train_ids
        side_m = mirr in split1.train_ids
        assert side_o == side_m


def test_split_changes_with_seed():
    _, _, combined = make_balanced(20)
    pairing = infer_self_pairing(combined)
    splits = {split_train_valid(combined, pairing, 0.9, s).valid_ids for s in range(6)}
    assert len(splits) > 1


def test_split_ratio_validation():
    _, _, combined = make_balanced(3)
    with pytest.raises(ValidationError):
        split_train_valid(combined, None, 1.5, 0)


def test_subsample_keeps_whole_pairs():
    _, _, combined = make_balanced(10)
    pairing = infer_self_pairing(combined)
    sampled = subsample_pairs(combined, pairing, fraction=0.5, seed=1)
    assert len(sampled) == 10  # 5 pairs
    kept = set(sampled.ids())
    for orig, mirr in pairing.pairs.items():
        assert (orig in kept) == (mirr in kept)


def test_subsample_full_fraction_is_identity():
    _, _, combined = make_balanced(4)
    pairing = infer_self_pairing(combined)
    sampled = subsample_pairs(combined, pairing, fraction=1.0, seed=0)
    assert set(sampled.ids()) == set(combined.ids())


def test_restrict_preserves_order():
    _, _, combined = make_balanced(5)
    sub = combined.restrict([1003, 2])
    assert [i.id for i in sub] == [2, 1003]
