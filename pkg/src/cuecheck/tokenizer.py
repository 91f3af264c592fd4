"""Deterministic whitespace tokenization feeding every statistic in the toolkit.

Tokenization is always an explicit parameter of the operations that consume
it, never hidden global state, so cue statistics can be re-run under variant
configurations and compared.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class TokenizerConfig:
    """Switches for the whitespace tokenizer.

    ``strip_punctuation`` removes punctuation characters from tokens;
    ``punctuation_as_tokens`` instead splits punctuation runs out into tokens
    of their own. At most one of the two may be enabled.
    """

    lowercase: bool = True
    strip_punctuation: bool = True
    punctuation_as_tokens: bool = False

    def __post_init__(self):
        if self.strip_punctuation and self.punctuation_as_tokens:
            raise ValueError(
                "strip_punctuation and punctuation_as_tokens are mutually exclusive"
            )

    def fingerprint(self) -> str:
        """Short stable identifier used in report headers."""
        if self.strip_punctuation:
            punct = "strip"
        elif self.punctuation_as_tokens:
            punct = "tokens"
        else:
            punct = "keep"
        case = "lower" if self.lowercase else "cased"
        return f"ws/{case}/punct-{punct}"


DEFAULT_CONFIG = TokenizerConfig()


def tokenize(text: str, config: TokenizerConfig = DEFAULT_CONFIG) -> list[str]:
    """Split ``text`` into tokens on Unicode whitespace.

    Case folding and punctuation handling follow ``config``. Tokens that
    become empty after punctuation stripping are dropped. Empty input yields
    an empty list. Re-tokenizing the space-joined output is a no-op.
    """
    if config.lowercase:
        text = text.lower()
    tokens: list[str] = []
    for raw in text.split():
        if config.strip_punctuation:
            cleaned = "".join(ch for ch in raw if not _is_punct(ch))
            if cleaned:
                tokens.append(cleaned)
        elif config.punctuation_as_tokens:
            run: list[str] = []
            run_is_punct = False
            for ch in raw:
                p = _is_punct(ch)
                if run and p != run_is_punct:
                    tokens.append("".join(run))
                    run = []
                run.append(ch)
                run_is_punct = p
            if run:
                tokens.append("".join(run))
        else:
            tokens.append(raw)
    return tokens


def token_set(text: str, config: TokenizerConfig = DEFAULT_CONFIG) -> frozenset[str]:
    """Deduplicated tokens of ``text`` (never contains empty strings)."""
    return frozenset(tokenize(text, config))
