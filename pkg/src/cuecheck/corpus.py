"""Data model for two-alternative choice datasets.

Covers parsing and serialization of the two interchange formats (the public
XML distribution format and a JSONL conversion), bookkeeping for mirrored
instance pairs, and deterministic pair-aware train/validation splitting.
All types are immutable after construction.
"""

from __future__ import annotations

import io
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import CorpusFormatError, MirrorAmbiguityError, ValidationError

ALT1 = 1
ALT2 = 2
QUESTIONS = ("cause", "effect")


@dataclass(frozen=True)
class Instance:
    """One choice problem: a premise, two alternatives, a question type
    (``cause`` or ``effect``) and the gold choice (1 or 2).

    Text fields are whitespace-trimmed on construction and must be non-empty.
    """

    id: int
    premise: str
    alt1: str
    alt2: str
    question: str
    gold: int

    def __post_init__(self):
        for name in ("premise", "alt1", "alt2"):
            value = getattr(self, name).strip()
            if not value:
                raise ValidationError(f"instance {self.id}: empty {name}")
            object.__setattr__(self, name, value)
        if self.question not in QUESTIONS:
            raise ValidationError(
                f"instance {self.id}: question must be one of {QUESTIONS}, "
                f"got {self.question!r}"
            )
        if self.gold not in (ALT1, ALT2):
            raise ValidationError(f"instance {self.id}: gold must be 1 or 2")

    def alternative(self, index: int) -> str:
        if index == ALT1:
            return self.alt1
        if index == ALT2:
            return self.alt2
        raise ValueError(f"alternative index must be 1 or 2, got {index}")

    @property
    def gold_text(self) -> str:
        return self.alternative(self.gold)


@dataclass(frozen=True)
class Dataset:
    """Order-stable sequence of instances with unique ids."""

    name: str
    instances: tuple[Instance, ...]

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        seen = set()
        for inst in self.instances:
            if inst.id in seen:
                raise ValidationError(f"duplicate instance id {inst.id}")
            seen.add(inst.id)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def ids(self) -> tuple[int, ...]:
        return tuple(inst.id for inst in self.instances)

    def by_id(self, instance_id: int) -> Instance:
        for inst in self.instances:
            if inst.id == instance_id:
                return inst
        raise KeyError(instance_id)

    def index(self) -> dict[int, Instance]:
        return {inst.id: inst for inst in self.instances}

    def restrict(self, ids: Iterable[int], name: Optional[str] = None) -> "Dataset":
        """Sub-dataset with the given ids, original order preserved."""
        wanted = set(ids)
        return Dataset(
            name=name or self.name,
            instances=tuple(i for i in self.instances if i.id in wanted),
        )


@dataclass(frozen=True)
class MirrorPairing:
    """Mapping from original instance ids to their mirrored counterparts.

    A valid pair shares both alternatives verbatim, has complementary gold
    labels, and differs in the premise. Instances that could not be matched
    are reported rather than silently dropped.
    """

    pairs: Mapping[int, int]
    unmatched_original: tuple[int, ...] = ()
    unmatched_mirrored: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", dict(self.pairs))
        if set(self.pairs) & set(self.pairs.values()):
            raise ValidationError("pairing maps an id onto both sides")

    def __len__(self) -> int:
        return len(self.pairs)

    def inverse(self) -> "MirrorPairing":
        return MirrorPairing(
            pairs={m: o for o, m in self.pairs.items()},
            unmatched_original=self.unmatched_mirrored,
            unmatched_mirrored=self.unmatched_original,
        )

    def covers(self, dataset: Dataset) -> bool:
        """True when every instance of ``dataset`` sits in exactly one pair."""
        ids = set(dataset.ids())
        left = set(self.pairs)
        right = set(self.pairs.values())
        return left | right == ids and len(left) + len(right) == len(ids)


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint train/validation id sets produced by ``split_train_valid``."""

    train_ids: frozenset[int]
    valid_ids: frozenset[int]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "train_ids", frozenset(self.train_ids))
        object.__setattr__(self, "valid_ids", frozenset(self.valid_ids))
        if self.train_ids & self.valid_ids:
            raise ValidationError("train and valid id sets overlap")


def _instance_from_item(elem: ET.Element) -> Instance:
    item_id = elem.get("id")
    if item_id is None:
        raise CorpusFormatError("item element missing id attribute")
    missing = [
        attr for attr in ("asks-for", "most-plausible-alternative") if elem.get(attr) is None
    ]
    if missing:
        raise CorpusFormatError(f"item {item_id}: missing attribute {missing[0]!r}")
    children = {}
    for tag in ("p", "a1", "a2"):
        child = elem.find(tag)
        if child is None or child.text is None:
            raise CorpusFormatError(f"item {item_id}: missing <{tag}> element")
        children[tag] = child.text
    try:
        numeric_id = int(item_id)
    except ValueError:
        raise CorpusFormatError(f"item id {item_id!r} is not an integer") from None
    question = elem.get("asks-for")
    gold_raw = elem.get("most-plausible-alternative")
    if gold_raw not in ("1", "2"):
        raise CorpusFormatError(
            f"item {item_id}: most-plausible-alternative must be 1 or 2, got {gold_raw!r}"
        )
    return Instance(
        id=numeric_id,
        premise=children["p"],
        alt1=children["a1"],
        alt2=children["a2"],
        question=question,
        gold=int(gold_raw),
    )


def parse_copa_xml(data: bytes | str, name: Optional[str] = None) -> Dataset:
    """Parse the public XML distribution format.

    Items carry ``id``, ``asks-for`` and ``most-plausible-alternative``
    attributes and ``p``/``a1``/``a2`` children. Malformed XML raises
    :class:`CorpusFormatError` with line/column; schema problems name the
    offending item.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, column = exc.position
        raise CorpusFormatError(f"malformed XML: {exc.msg}", line=line, column=column) from None
    instances = tuple(_instance_from_item(item) for item in root.iter("item"))
    return Dataset(name=name or root.get("name") or "corpus", instances=instances)


def parse_jsonl(data: bytes | str, name: str = "corpus") -> Dataset:
    """Parse one JSON object per line with keys ``id``, ``premise``,
    ``choice1``, ``choice2``, ``question`` and ``label`` (0 selects the first
    choice, 1 the second). Blank lines are ignored.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    instances = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"malformed JSON: {exc.msg}", line=lineno) from None
        try:
            label = obj["label"]
            if label not in (0, 1):
                raise CorpusFormatError(f"label must be 0 or 1, got {label!r}", line=lineno)
            instances.append(
                Instance(
                    id=int(obj["id"]),
                    premise=obj["premise"],
                    alt1=obj["choice1"],
                    alt2=obj["choice2"],
                    question=obj["question"],
                    gold=ALT1 if label == 0 else ALT2,
                )
            )
        except KeyError as exc:
            raise CorpusFormatError(f"missing key {exc.args[0]!r}", line=lineno) from None
    return Dataset(name=name, instances=tuple(instances))


def serialize(dataset: Dataset, fmt: str = "xml") -> bytes:
    """Serialize to ``xml`` or ``jsonl`` bytes; re-parsing yields an equal
    Dataset (given the same name)."""
    if fmt == "xml":
        root = ET.Element("copa-corpus", attrib={"name": dataset.name})
        for inst in dataset:
            item = ET.SubElement(
                root,
                "item",
                attrib={
                    "id": str(inst.id),
                    "asks-for": inst.question,
                    "most-plausible-alternative": str(inst.gold),
                },
            )
            ET.SubElement(item, "p").text = inst.premise
            ET.SubElement(item, "a1").text = inst.alt1
            ET.SubElement(item, "a2").text = inst.alt2
        ET.indent(root)
        buf = io.BytesIO()
        ET.ElementTree(root).write(buf, encoding="utf-8", xml_declaration=True)
        return buf.getvalue()
    if fmt == "jsonl":
        lines = []
        for inst in dataset:
            lines.append(
                json.dumps(
                    {
                        "id": inst.id,
                        "premise": inst.premise,
                        "choice1": inst.alt1,
                        "choice2": inst.alt2,
                        "question": inst.question,
                        "label": 0 if inst.gold == ALT1 else 1,
                    },
                    ensure_ascii=False,
                )
            )
        return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
    raise CorpusFormatError(f"unsupported format {fmt!r} (expected 'xml' or 'jsonl')")


def load_dataset(path, name: Optional[str] = None) -> Dataset:
    """Load a dataset file, picking the parser from the file suffix
    (``.xml`` or ``.jsonl``/``.json``)."""
    from pathlib import Path

    p = Path(path)
    if p.suffix.lower() == ".xml":
        return parse_copa_xml(p.read_bytes(), name=name or p.stem)
    if p.suffix.lower() in (".jsonl", ".json"):
        return parse_jsonl(p.read_bytes(), name=name or p.stem)
    raise CorpusFormatError(f"cannot infer format from suffix of {p.name!r}")


def _pair_groups(instances: Iterable[Instance]):
    groups: dict[tuple[str, str, int], list[Instance]] = {}
    for inst in instances:
        groups.setdefault((inst.alt1, inst.alt2, inst.gold), []).append(inst)
    return groups


def infer_mirror_pairing(original: Dataset, mirrored: Dataset) -> MirrorPairing:
    """Match each original instance to its mirrored counterpart.

    Candidates must share both alternatives verbatim, carry the complementary
    gold label, and differ in the premise. When several candidates share the
    same alternatives the pairing is ambiguous and an error is raised listing
    the ids involved; instances with no candidate are reported unmatched.
    """
    if len(original) == 0 or len(mirrored) == 0:
        raise ValidationError("both datasets must be non-empty")
    orig_groups = _pair_groups(original)
    mirr_groups = _pair_groups(mirrored)
    pairs: dict[int, int] = {}
    unmatched_orig: list[int] = []
    unmatched_mirr: set[int] = {inst.id for inst in mirrored}
    for (a1, a2, gold), origs in orig_groups.items():
        candidates = mirr_groups.get((a1, a2, ALT1 + ALT2 - gold), [])
        if not candidates:
            unmatched_orig.extend(inst.id for inst in origs)
            continue
        if len(origs) > 1 or len(candidates) > 1:
            ids = [i.id for i in origs] + [i.id for i in candidates]
            raise MirrorAmbiguityError(
                "several instances share identical alternatives; cannot pair "
                f"ids {sorted(ids)}",
                ids=sorted(ids),
            )
        orig, cand = origs[0], candidates[0]
        if cand.premise == orig.premise:
            unmatched_orig.append(orig.id)
            continue
        pairs[orig.id] = cand.id
        unmatched_mirr.discard(cand.id)
    return MirrorPairing(
        pairs=pairs,
        unmatched_original=tuple(sorted(unmatched_orig)),
        unmatched_mirrored=tuple(sorted(unmatched_mirr)),
    )


def infer_self_pairing(dataset: Dataset) -> MirrorPairing:
    """Infer mirror pairs inside a single combined dataset (originals plus
    mirrors in one file), keyed lower id -> higher id.

    Each group of instances sharing both alternatives must contain exactly
    one instance per gold label with differing premises; larger groups are
    ambiguous.
    """
    groups: dict[tuple[str, str], list[Instance]] = {}
    for inst in dataset:
        groups.setdefault((inst.alt1, inst.alt2), []).append(inst)
    pairs: dict[int, int] = {}
    unmatched: list[int] = []
    for key, members in groups.items():
        if len(members) == 1:
            unmatched.append(members[0].id)
            continue
        if len(members) > 2:
            ids = sorted(i.id for i in members)
            raise MirrorAmbiguityError(
                f"{len(members)} instances share identical alternatives; "
                f"cannot pair ids {ids}",
                ids=ids,
            )
        a, b = members
        if a.gold == b.gold or a.premise == b.premise:
            unmatched.extend([a.id, b.id])
            continue
        lo, hi = sorted((a.id, b.id))
        pairs[lo] = hi
    return MirrorPairing(
        pairs=pairs,
        unmatched_original=tuple(sorted(unmatched)),
        unmatched_mirrored=(),
    )


def split_train_valid(
    dataset: Dataset,
    pairing: Optional[MirrorPairing],
    ratio: float,
    seed: int,
) -> SplitAssignment:
    """Deterministic train/validation split.

    ``ratio`` is the train fraction. Mirror pairs always land on the same
    side; sizes are measured in pair-units (a pair counts once) and the
    validation side gets ``round(units * (1 - ratio))`` units.
    """
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"ratio must be in (0, 1), got {ratio}")
    ids = set(dataset.ids())
    units: list[tuple[int, ...]] = []
    if pairing is not None:
        referenced = set(pairing.pairs) | set(pairing.pairs.values())
        unknown = referenced - ids
        if unknown:
            raise ValidationError(f"pairing references unknown ids {sorted(unknown)}")
        paired = referenced
        units.extend((o, m) for o, m in pairing.pairs.items())
    else:
        paired = set()
    units.extend((i,) for i in sorted(ids - paired))
    units.sort(key=min)
    n_valid_units = int(round(len(units) * (1.0 - ratio)))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(units))
    valid_ids: set[int] = set()
    for idx in order[:n_valid_units]:
        valid_ids.update(units[idx])
    return SplitAssignment(
        train_ids=frozenset(ids - valid_ids),
        valid_ids=frozenset(valid_ids),
        seed=seed,
    )


def subsample_pairs(
    dataset: Dataset,
    pairing: MirrorPairing,
    fraction: float,
    seed: int,
    name: Optional[str] = None,
) -> Dataset:
    """Keep a deterministic ``fraction`` of mirror pairs as whole units
    (both members or neither); unpaired instances are sampled individually.
    Used for size-matched training controls on balanced datasets.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    ids = set(dataset.ids())
    units: list[tuple[int, ...]] = [(o, m) for o, m in pairing.pairs.items()]
    paired = set(pairing.pairs) | set(pairing.pairs.values())
    units.extend((i,) for i in sorted(ids - paired))
    units.sort(key=min)
    n_keep = int(round(len(units) * fraction))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(units))
    keep: set[int] = set()
    for idx in sorted(order[:n_keep]):
        keep.update(units[idx])
    return dataset.restrict(keep, name=name or f"{dataset.name}[pairs:{fraction}]")
