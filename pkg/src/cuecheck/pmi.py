"""Windowed co-occurrence counting over a background corpus and the
associated pointwise-mutual-information solver.

The corpus is treated as one token stream (newlines count as whitespace).
Every token position opens a window: the token at position i is paired with
each distinct earlier token at positions i-window .. i-1. ``total_windows``
is therefore the number of tokens consumed, and the sum of unigram counts
equals it exactly. Counting can be sharded by position ranges and merged;
a shard primes its context from the tokens just before its range, so the
merged table is identical to a single pass.
"""

from __future__ import annotations

import hashlib
import math
import struct
from collections import deque
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .corpus import ALT1, ALT2, Instance
from .errors import ValidationError
from .tokenizer import DEFAULT_CONFIG, TokenizerConfig, token_set, tokenize

DEFAULT_WINDOW = 5
DEFAULT_SMOOTHING = 0.5


@dataclass
class CooccurrenceTable:
    """Unigram and token-pair counts from one corpus pass.

    Symmetric tables key pairs as sorted tuples; directional tables keep the
    order (first element precedes the second in the text). The fingerprint
    hashes the consumed text so reports can state which corpus produced the
    table.
    """

    window: int
    directional: bool
    unigrams: dict[str, int]
    pairs: dict[tuple[str, str], int]
    total_windows: int
    fingerprint: str

    def pair_count(self, x: str, y: str) -> int:
        key = (x, y) if self.directional else (min(x, y), max(x, y))
        return self.pairs.get(key, 0)

    def unigram_count(self, token: str) -> int:
        return self.unigrams.get(token, 0)


def _hash_text(chunks: Iterable[str]) -> str:
    digest = hashlib.sha256()
    for chunk in chunks:
        digest.update(chunk.encode("utf-8"))
    return digest.hexdigest()[:32]


def _iter_text(corpus) -> Iterable[str]:
    if isinstance(corpus, str):
        yield corpus
    elif isinstance(corpus, Path):
        yield corpus.read_text(encoding="utf-8")
    else:
        for chunk in corpus:
            yield chunk


def _count_range(
    tokens: list[str],
    start: int,
    end: int,
    window: int,
    directional: bool,
    unigrams: dict[str, int],
    pairs: dict[tuple[str, str], int],
) -> None:
    """Count tokens in [start, end) as window-closing positions; earlier
    context comes from the ``window`` tokens preceding ``start``."""
    context: deque[str] = deque(tokens[max(0, start - window) : start], maxlen=window)
    for pos in range(start, end):
        token = tokens[pos]
        unigrams[token] = unigrams.get(token, 0) + 1
        for prev in context:
            if prev == token:
                continue
            key = (prev, token) if directional else (min(prev, token), max(prev, token))
            pairs[key] = pairs.get(key, 0) + 1
        context.append(token)


def build_cooccurrence(
    corpus,
    window: int = DEFAULT_WINDOW,
    config: TokenizerConfig = DEFAULT_CONFIG,
    directional: bool = False,
) -> CooccurrenceTable:
    """Single-pass co-occurrence table over ``corpus`` (a string, a path, or
    an iterable of text chunks)."""
    if window < 1:
        raise ValidationError(f"window must be >= 1, got {window}")
    digest = hashlib.sha256()
    unigrams: dict[str, int] = {}
    pairs: dict[tuple[str, str], int] = {}
    context: deque[str] = deque(maxlen=window)
    total = 0
    carry = ""
    for chunk in _iter_text(corpus):
        digest.update(chunk.encode("utf-8"))
        text = carry + chunk
        # hold back a possibly split trailing token
        if text and not text[-1].isspace():
            cut = len(text)
            while cut > 0 and not text[cut - 1].isspace():
                cut -= 1
            carry = text[cut:]
            text = text[:cut]
        else:
            carry = ""
        for token in tokenize(text, config):
            unigrams[token] = unigrams.get(token, 0) + 1
            total += 1
            for prev in context:
                if prev == token:
                    continue
                key = (prev, token) if directional else (min(prev, token), max(prev, token))
                pairs[key] = pairs.get(key, 0) + 1
            context.append(token)
    for token in tokenize(carry, config):
        unigrams[token] = unigrams.get(token, 0) + 1
        total += 1
        for prev in context:
            if prev == token:
                continue
            key = (prev, token) if directional else (min(prev, token), max(prev, token))
            pairs[key] = pairs.get(key, 0) + 1
        context.append(token)
    return CooccurrenceTable(
        window=window,
        directional=directional,
        unigrams=unigrams,
        pairs=pairs,
        total_windows=total,
        fingerprint=digest.hexdigest()[:32],
    )


def build_cooccurrence_sharded(
    corpus,
    window: int = DEFAULT_WINDOW,
    config: TokenizerConfig = DEFAULT_CONFIG,
    directional: bool = False,
    shard_tokens: int = 10_000,
) -> list[CooccurrenceTable]:
    """Split the token stream into position ranges of ``shard_tokens`` and
    count each independently (with window-length context carried across the
    boundary). Merging the shards reproduces the single-pass table exactly.
    """
    if window < 1:
        raise ValidationError(f"window must be >= 1, got {window}")
    if shard_tokens < 1:
        raise ValidationError("shard_tokens must be >= 1")
    chunks = list(_iter_text(corpus))
    fingerprint = _hash_text(chunks)
    tokens = tokenize("".join(chunks), config)
    shards = []
    for start in range(0, len(tokens), shard_tokens):
        end = min(start + shard_tokens, len(tokens))
        unigrams: dict[str, int] = {}
        pairs: dict[tuple[str, str], int] = {}
        _count_range(tokens, start, end, window, directional, unigrams, pairs)
        shards.append(
            CooccurrenceTable(
                window=window,
                directional=directional,
                unigrams=unigrams,
                pairs=pairs,
                total_windows=end - start,
                fingerprint=fingerprint,
            )
        )
    if not shards:
        shards.append(
            CooccurrenceTable(
                window=window,
                directional=directional,
                unigrams={},
                pairs={},
                total_windows=0,
                fingerprint=fingerprint,
            )
        )
    return shards


def merge_tables(tables: Iterable[CooccurrenceTable]) -> CooccurrenceTable:
    """Sum counts across shards. Associative and order-independent: counts
    add, and differing fingerprints combine by XOR of their digests."""
    tables = list(tables)
    if not tables:
        raise ValidationError("nothing to merge")
    first = tables[0]
    unigrams: dict[str, int] = {}
    pairs: dict[tuple[str, str], int] = {}
    total = 0
    fingerprints = {t.fingerprint for t in tables}
    for table in tables:
        if table.window != first.window or table.directional != first.directional:
            raise ValidationError("cannot merge tables with different window/directional settings")
        total += table.total_windows
        for token, count in table.unigrams.items():
            unigrams[token] = unigrams.get(token, 0) + count
        for key, count in table.pairs.items():
            pairs[key] = pairs.get(key, 0) + count
    if len(fingerprints) == 1:
        fingerprint = first.fingerprint
    else:
        acc = 0
        for fp in fingerprints:
            acc ^= int(fp, 16)
        fingerprint = format(acc, "032x")
    return CooccurrenceTable(
        window=first.window,
        directional=first.directional,
        unigrams=unigrams,
        pairs=pairs,
        total_windows=total,
        fingerprint=fingerprint,
    )


def floor_value(table: CooccurrenceTable, smoothing: float = DEFAULT_SMOOTHING) -> float:
    """Most pessimistic association the smoothed formula can report: a
    never-co-occurring pair of saturated-count tokens."""
    n = max(table.total_windows, 1)
    lam = smoothing if smoothing > 0 else 1.0
    return math.log(lam * n / ((n + lam) * (n + lam)))


def pmi(
    table: CooccurrenceTable,
    x: str,
    y: str,
    smoothing: float = DEFAULT_SMOOTHING,
) -> float:
    """Smoothed pointwise mutual information
    log((c(x,y)+s) * N / ((c(x)+s) * (c(y)+s))) with N = total windows.

    Symmetric tables give pmi(x, y) == pmi(y, x). Queries where both tokens
    are unseen (and, with zero smoothing, any zero count) return the floor
    value instead of a singularity.
    """
    cx = table.unigram_count(x)
    cy = table.unigram_count(y)
    cxy = table.pair_count(x, y)
    n = max(table.total_windows, 1)
    if cx == 0 and cy == 0:
        return floor_value(table, smoothing)
    if smoothing <= 0 and (cx == 0 or cy == 0 or cxy == 0):
        return floor_value(table, smoothing)
    return math.log((cxy + smoothing) * n / ((cx + smoothing) * (cy + smoothing)))


def load_stopwords(path) -> frozenset[str]:
    """One token per line; blank lines and # comments ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    """English function-word list shipped with the package."""
    text = resources.files("cuecheck").joinpath("data/stopwords_en.txt").read_text("utf-8")
    words = {line.strip() for line in text.splitlines()}
    return frozenset(w for w in words if w and not w.startswith("#"))


@dataclass(frozen=True)
class PmiDecision:
    """Outcome of the PMI solver with its per-alternative mean scores."""

    choice: int
    tie: bool
    score_alt1: float
    score_alt2: float
    empty_alternatives: tuple[int, ...] = ()


def _content_words(text: str, stopwords: frozenset[str], config: TokenizerConfig) -> list[str]:
    return sorted(t for t in token_set(text, config) if t not in stopwords)


def pmi_solve(
    instance: Instance,
    table: CooccurrenceTable,
    stopwords: frozenset[str],
    config: TokenizerConfig = DEFAULT_CONFIG,
    smoothing: float = DEFAULT_SMOOTHING,
) -> PmiDecision:
    """Score each alternative by the mean PMI between premise content words
    and alternative content words; pick the higher mean.

    On a directional table the pair order follows the question type (the
    cause side precedes the effect side); symmetric tables ignore it. An
    alternative without content words scores the floor value and is flagged.
    """
    if table.total_windows == 0:
        raise ValidationError("co-occurrence table is empty")
    premise_words = _content_words(instance.premise, stopwords, config)
    floor = floor_value(table, smoothing)
    scores = []
    empties = []
    for index in (ALT1, ALT2):
        alt_words = _content_words(instance.alternative(index), stopwords, config)
        if not alt_words or not premise_words:
            scores.append(floor)
            empties.append(index)
            continue
        total = 0.0
        count = 0
        for p_word in premise_words:
            for a_word in alt_words:
                if table.directional and instance.question == "cause":
                    total += pmi(table, a_word, p_word, smoothing)
                else:
                    total += pmi(table, p_word, a_word, smoothing)
                count += 1
        scores.append(total / count)
    s1, s2 = scores
    if s1 == s2:
        return PmiDecision(ALT1, True, s1, s2, tuple(empties))
    return PmiDecision(ALT1 if s1 > s2 else ALT2, False, s1, s2, tuple(empties))


_MAGIC = b"COOC"
_VERSION = 1


def save_table(table: CooccurrenceTable, path) -> None:
    """Persist to the versioned binary format (deterministic byte layout:
    entries are sorted)."""
    out = bytearray()
    out += _MAGIC
    out += struct.pack("<HBI Q", _VERSION, 1 if table.directional else 0, table.window,
                       table.total_windows)
    fp = table.fingerprint.encode("ascii")
    out += struct.pack("<B", len(fp))
    out += fp
    out += struct.pack("<Q", len(table.unigrams))
    for token in sorted(table.unigrams):
        raw = token.encode("utf-8")
        out += struct.pack("<H", len(raw))
        out += raw
        out += struct.pack("<Q", table.unigrams[token])
    out += struct.pack("<Q", len(table.pairs))
    for key in sorted(table.pairs):
        for part in key:
            raw = part.encode("utf-8")
            out += struct.pack("<H", len(raw))
            out += raw
        out += struct.pack("<Q", table.pairs[key])
    Path(path).write_bytes(bytes(out))


def load_table(path) -> CooccurrenceTable:
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ValidationError(f"{path}: not a co-occurrence table (bad magic)")
    offset = 4
    version, directional, window, total = struct.unpack_from("<HBI Q", data, offset)
    offset += struct.calcsize("<HBI Q")
    if version != _VERSION:
        raise ValidationError(f"{path}: unsupported table version {version}")
    (fp_len,) = struct.unpack_from("<B", data, offset)
    offset += 1
    fingerprint = data[offset : offset + fp_len].decode("ascii")
    offset += fp_len

    def read_token(at: int) -> tuple[str, int]:
        (length,) = struct.unpack_from("<H", data, at)
        token = data[at + 2 : at + 2 + length].decode("utf-8")
        return token, at + 2 + length

    (n_unigrams,) = struct.unpack_from("<Q", data, offset)
    offset += 8
    unigrams: dict[str, int] = {}
    for _ in range(n_unigrams):
        token, offset = read_token(offset)
        (count,) = struct.unpack_from("<Q", data, offset)
        offset += 8
        unigrams[token] = count
    (n_pairs,) = struct.unpack_from("<Q", data, offset)
    offset += 8
    pairs: dict[tuple[str, str], int] = {}
    for _ in range(n_pairs):
        left, offset = read_token(offset)
        right, offset = read_token(offset)
        (count,) = struct.unpack_from("<Q", data, offset)
        offset += 8
        pairs[(left, right)] = count
    return CooccurrenceTable(
        window=window,
        directional=bool(directional),
        unigrams=unigrams,
        pairs=pairs,
        total_windows=total,
        fingerprint=fingerprint,
    )
