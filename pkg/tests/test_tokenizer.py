import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuecheck import TokenizerConfig, tokenize, token_set
from cuecheck.tokenizer import DEFAULT_CONFIG


def test_default_lowercases_and_strips_punctuation():
    assert tokenize("The man's dog barked!") == ["the", "mans", "dog", "barked"]


def test_cased_config():
    config = TokenizerConfig(lowercase=False)
    assert tokenize("The Dog", config) == ["The", "Dog"]


def test_punctuation_kept():
    config = TokenizerConfig(strip_punctuation=False)
    assert tokenize("wait, stop!", config) == ["wait,", "stop!"]


def test_punctuation_as_tokens():
    config = TokenizerConfig(strip_punctuation=False, punctuation_as_tokens=True)
    assert tokenize("wait, stop!", config) == ["wait", ",", "stop", "!"]


def test_punctuation_only_token_dropped():
    assert tokenize("yes - no") == ["yes", "no"]


def test_mutually_exclusive_flags():
    with pytest.raises(ValueError):
        TokenizerConfig(strip_punctuation=True, punctuation_as_tokens=True)


def test_empty_and_whitespace():
    assert tokenize("") == []
    assert tokenize("   \t\n ") == []


def test_token_set_deduplicates():
    assert token_set("the cat the hat") == frozenset({"the", "cat", "hat"})


def test_fingerprints_distinct():
    prints = {
        DEFAULT_CONFIG.fingerprint(),
        TokenizerConfig(lowercase=False).fingerprint(),
        TokenizerConfig(strip_punctuation=False).fingerprint(),
        TokenizerConfig(strip_punctuation=False, punctuation_as_tokens=True).fingerprint(),
    }
    assert len(prints) == 4


@given(st.text())
def test_tokenize_idempotent(text):
    once = tokenize(text)
    again = tokenize(" ".join(once))
    assert once == again


@given(st.text())
def test_tokens_never_empty_or_spaced(text):
    for token in tokenize(text):
        assert token
        assert not any(ch.isspace() for ch in token)
