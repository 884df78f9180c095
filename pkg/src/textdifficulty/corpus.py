"""Dataset ingestion, text normalisation and count distributions.

Text is lowercased, stripped of every character whose Unicode general
category is punctuation (P*) or symbol (S*), and split on whitespace runs.
Digits survive.  Items are capped at ``DEFAULT_WORD_CAP`` words unless the
cap is disabled.
"""
from __future__ import annotations

import csv
import enum
import json
import math
import os
import random
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, EmptyDatasetError, EmptyDistributionError, ParseError

DEFAULT_WORD_CAP = 100
FORMATS = ("csv", "tsv", "jsonl")


class _StripTable(dict):
    """``str.translate`` table that deletes P* and S* code points.

    Entries are filled lazily so only characters actually seen are looked up.
    """

    def __missing__(self, codepoint):
        cat = unicodedata.category(chr(codepoint))
        value = None if cat[0] in "PS" else codepoint
        self[codepoint] = value
        return value


_STRIP = _StripTable()


def normalize_text(raw: str, cap: int | None = DEFAULT_WORD_CAP) -> list[str]:
    """Lowercase, drop punctuation/symbols, split on whitespace, cap length.

    >>> normalize_text("It's GOOD, really!")
    ['its', 'good', 'really']
    """
    tokens = raw.lower().translate(_STRIP).split()
    if cap is not None and len(tokens) > cap:
        del tokens[cap:]
    return tokens


@dataclass(frozen=True, slots=True)
class DataItem:
    text: str
    tokens: tuple
    label: str


class Split(str, enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"
    ALL = "all"


@dataclass(frozen=True)
class Dataset:
    name: str
    train: tuple
    validation: tuple = ()
    test: tuple = ()
    classes: tuple = field(default=())

    def __post_init__(self):
        if not self.train:
            raise EmptyDatasetError(f"dataset {self.name!r} has an empty training split")
        observed = sorted({it.label for part in (self.train, self.validation, self.test) for it in part})
        if not self.classes:
            object.__setattr__(self, "classes", tuple(observed))
        elif not set(observed) <= set(self.classes):
            unknown = sorted(set(observed) - set(self.classes))
            raise ValueError(f"labels not in classes: {unknown}")

    def items(self, split: Split | str = Split.TRAIN) -> tuple:
        split = Split(split)
        if split is Split.ALL:
            return self.train + self.validation + self.test
        return getattr(self, split.value)

    def __len__(self):
        return len(self.train) + len(self.validation) + len(self.test)


class CountDistribution:
    """Immutable count-based probability distribution over string keys."""

    __slots__ = ("_counts", "total")

    def __init__(self, counts: Mapping[str, int | float]):
        clean = {k: v for k, v in counts.items() if v}
        if any(v < 0 for v in clean.values()):
            raise ValueError("counts must be non-negative")
        total = sum(clean.values())
        if total <= 0:
            raise EmptyDistributionError("distribution has no mass")
        self._counts = MappingProxyType(clean)
        self.total = total

    @property
    def counts(self) -> Mapping[str, int | float]:
        return self._counts

    @property
    def richness(self) -> int:
        return len(self._counts)

    def probability(self, key: str) -> float:
        return self._counts.get(key, 0) / self.total

    def probabilities(self) -> dict[str, float]:
        t = self.total
        return {k: v / t for k, v in self._counts.items()}

    def __len__(self):
        return len(self._counts)

    def __eq__(self, other):
        if not isinstance(other, CountDistribution):
            return NotImplemented
        return dict(self._counts) == dict(other._counts)

    def __repr__(self):
        head = dict(list(self._counts.items())[:5])
        more = "..." if len(self._counts) > 5 else ""
        return f"CountDistribution({head}{more}, total={self.total})"


@dataclass(frozen=True)
class ClassDistributions:
    """Per-class distributions plus the labels whose subset produced nothing."""

    distributions: Mapping[str, CountDistribution]
    degenerate: frozenset = frozenset()

    @property
    def usable(self) -> int:
        return len(self.distributions)


def _tokens_of(item) -> Sequence[str]:
    return item.tokens if isinstance(item, DataItem) else item


def ngram_counts(token_seqs: Iterable[tuple[Sequence[str], int]], n: int) -> Counter:
    """Count space-joined n-grams over weighted token sequences."""
    if n < 1:
        raise ValueError("n must be >= 1")
    counts: Counter = Counter()
    for tokens, weight in token_seqs:
        if len(tokens) < n:
            continue
        if n == 1:
            grams = tokens
        else:
            grams = [" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]
        if weight == 1:
            counts.update(grams)
        else:
            local = Counter(grams)
            for g, c in local.items():
                counts[g] += c * weight
    return counts


def ngram_distribution(items: Iterable, n: int) -> CountDistribution:
    """n-grams drawn within each item; items shorter than ``n`` add nothing."""
    counts = ngram_counts(((_tokens_of(it), 1) for it in items), n)
    if not counts:
        raise EmptyDistributionError(f"no {n}-grams in corpus")
    return CountDistribution(counts)


def class_distribution(dataset: Dataset, split: Split | str = Split.TRAIN) -> CountDistribution:
    items = dataset.items(split)
    if not items:
        raise EmptyDistributionError(f"split {Split(split).value!r} is empty")
    return CountDistribution(Counter(it.label for it in items))


def per_class_ngram_distributions(dataset: Dataset, n: int,
                                  split: Split | str = Split.TRAIN) -> ClassDistributions:
    by_class: dict[str, list] = {}
    for it in dataset.items(split):
        by_class.setdefault(it.label, []).append(it)
    dists, degenerate = {}, set()
    for label in sorted(by_class):
        try:
            dists[label] = ngram_distribution(by_class[label], n)
        except EmptyDistributionError:
            degenerate.add(label)
    return ClassDistributions(dists, frozenset(degenerate))


def char_distribution(dataset: Dataset, split: Split | str = Split.TRAIN) -> CountDistribution:
    """Characters of normalised tokens; whitespace is not counted."""
    counts: Counter = Counter()
    for it in dataset.items(split):
        for tok in it.tokens:
            counts.update(tok)
    if not counts:
        raise EmptyDistributionError("corpus has no characters")
    return CountDistribution(counts)


# -- ingestion ---------------------------------------------------------------

@dataclass(frozen=True)
class IngestOptions:
    format: str | None = None
    cap_words: int | None = DEFAULT_WORD_CAP
    split_validation: float | None = None
    split_test: float | None = None
    seed: int = 0
    validation_path: str | os.PathLike | None = None
    test_path: str | os.PathLike | None = None
    name: str | None = None

    def __post_init__(self):
        if self.format is not None and self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected one of {FORMATS}")
        for frac in (self.split_validation, self.split_test):
            if frac is not None and not 0 <= frac < 1:
                raise ConfigError(f"split fraction must be in [0, 1), got {frac}")
        if self.cap_words is not None and self.cap_words < 1:
            raise ConfigError("cap_words must be positive or None")


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix == "json" or suffix == "ndjson":
        suffix = "jsonl"
    if suffix not in FORMATS:
        raise ConfigError(f"cannot infer format from {str(path)!r}; pass --format")
    return suffix


def read_records(path, fmt: str) -> list[tuple[str, str]]:
    """Return (text, label) records; raise ParseError with the line number."""
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"invalid JSON ({exc.msg})", path, lineno) from None
                if not isinstance(obj, dict):
                    raise ParseError("record is not an object", path, lineno)
                for key in ("text", "label"):
                    if key not in obj:
                        raise ParseError(f"record missing {key!r}", path, lineno)
                    if not isinstance(obj[key], str):
                        raise ParseError(f"field {key!r} is not a string", path, lineno)
                records.append((obj["text"], obj["label"]))
        else:
            reader = csv.reader(fh, delimiter="," if fmt == "csv" else "\t")
            try:
                header = next(reader, None)
                if header is None:
                    raise EmptyDatasetError(f"{path}: file is empty")
                header = [h.strip().lower() for h in header]
                if "text" not in header or "label" not in header:
                    raise ParseError("header must name columns 'text' and 'label'", path, 1)
                ti, li, width = header.index("text"), header.index("label"), len(header)
                for row in reader:
                    if not row:
                        continue
                    if len(row) != width:
                        raise ParseError(f"expected {width} fields, got {len(row)}", path, reader.line_num)
                    records.append((row[ti], row[li]))
            except csv.Error as exc:
                raise ParseError(str(exc), path, reader.line_num) from None
    if not records:
        raise EmptyDatasetError(f"{path}: no records")
    return records


def _build_items(records, cap) -> list[DataItem]:
    cache: dict[str, tuple] = {}
    items = []
    for text, label in records:
        tokens = cache.get(text)
        if tokens is None:
            tokens = cache[text] = tuple(normalize_text(text, cap))
        items.append(DataItem(text, tokens, label))
    return items


def _sample_out(items: list, fraction: float, rng: random.Random) -> tuple[list, list]:
    k = int(math.floor(fraction * len(items) + 0.5))
    chosen = set(rng.sample(range(len(items)), k))
    kept = [it for i, it in enumerate(items) if i not in chosen]
    taken = [it for i, it in enumerate(items) if i in chosen]
    return kept, taken


def load_dataset(path, format: str | None = None, options: IngestOptions | None = None) -> Dataset:
    """Load a labelled dataset from CSV/TSV/JSONL.

    With ``options.validation_path``/``test_path`` the three-file layout is
    used; otherwise the single file is the training split and
    ``split_test``/``split_validation`` carve seeded random samples out of it
    (test first, then validation from what remains).
    """
    options = options or IngestOptions()
    fmt = format or options.format or infer_format(path)
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    cap = options.cap_words
    train = _build_items(read_records(path, fmt), cap)
    validation: list = []
    test: list = []
    if options.test_path is not None:
        test = _build_items(read_records(options.test_path, fmt), cap)
    if options.validation_path is not None:
        validation = _build_items(read_records(options.validation_path, fmt), cap)
    rng = random.Random(options.seed)
    if options.test_path is None and options.split_test:
        train, test = _sample_out(train, options.split_test, rng)
    if options.validation_path is None and options.split_validation:
        train, validation = _sample_out(train, options.split_validation, rng)
    name = options.name or Path(path).stem
    return Dataset(name, tuple(train), tuple(validation), tuple(test))


def write_dataset(path, rows: Iterable[tuple[str, str]], fmt: str = "csv") -> None:
    """Write (text, label) rows with a ``text,label`` header (or JSONL)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for text, label in rows:
                fh.write(json.dumps({"text": text, "label": label}, ensure_ascii=False) + "\n")
            return
        writer = csv.writer(fh, delimiter="," if fmt == "csv" else "\t", lineterminator="\n")
        writer.writerow(["text", "label"])
        writer.writerows(rows)
