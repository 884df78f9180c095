"""The 48 count-based dataset statistics.

Twelve base statistics are evaluated for n-gram sizes 1-5 (plus their mean
over n) or once per dataset, giving the canonical 48-entry vector.  All logs
are natural logs.  A statistic whose inputs are degenerate (an empty
distribution, fewer than two usable classes, ...) evaluates to 0 and is
listed in ``StatisticVector.degenerate``; inverse Flesch reading ease
instead saturates at ``1 / fre_epsilon``.
"""
from __future__ import annotations

import csv
import enum
import heapq
import io
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from . import kernels
from .corpus import ClassDistributions, CountDistribution, Dataset, Split, ngram_counts
from .errors import EmptyDatasetError, ParseError
from .stopwords import StopwordList, english

NGRAM_SIZES = (1, 2, 3, 4, 5)
MEAN = "mean"
_NGRAM_WORD = {1: "Unigram", 2: "Bigram", 3: "Trigram", 4: "4-gram", 5: "5-gram"}


class Group(str, enum.Enum):
    CLASS_DIVERSITY = "ClassDiversity"
    CLASS_BALANCE = "ClassBalance"
    CLASS_INTERFERENCE = "ClassInterference"
    DATA_COMPLEXITY = "DataComplexity"


@dataclass(frozen=True)
class StatisticId:
    name: str
    group: Group
    base: str
    ngram: int | str | None = None


def _per_n(base: str, group: Group, fmt, mean_name: str) -> list[StatisticId]:
    ids = [StatisticId(fmt(n), group, base, n) for n in NGRAM_SIZES]
    ids.append(StatisticId(mean_name, group, base, MEAN))
    return ids


def _distinct_name(n: int) -> str:
    if n == 1:
        return "Distinct Unigrams (Vocab) : Total Unigrams"
    plural = _NGRAM_WORD[n] + "s"
    return f"Distinct {plural} : Total {plural}"


_D, _B, _I, _C = Group
STATISTICS: tuple[StatisticId, ...] = tuple(
    [
        StatisticId("Shannon Class Diversity", _D, "class_diversity"),
        StatisticId("Shannon Class Equitability", _D, "class_equitability"),
        StatisticId("Class Imbalance", _B, "class_imbalance"),
    ]
    + _per_n("max_hellinger", _I, lambda n: f"Maximum {_NGRAM_WORD[n]} Hellinger Similarity",
             "Mean Maximum Hellinger Similarity")
    + _per_n("avg_hellinger", _I, lambda n: f"Average {_NGRAM_WORD[n]} Hellinger Similarity",
             "Mean Average Hellinger Similarity")
    + _per_n("top_interference", _I, lambda n: f"Top {_NGRAM_WORD[n]} Interference",
             "Mean Top n-gram Interference")
    + _per_n("top_mutual_info", _I, lambda n: f"Top {_NGRAM_WORD[n]} Mutual Information",
             "Mean Top n-gram Mutual Information")
    + _per_n("distinct_total", _C, _distinct_name, "Mean Distinct n-grams : Total n-grams")
    + _per_n("ngram_diversity", _C, lambda n: f"{_NGRAM_WORD[n]} Shannon Diversity",
             "Mean n-gram Shannon Diversity")
    + _per_n("ngram_equitability", _C, lambda n: f"{_NGRAM_WORD[n]} Shannon Equitability",
             "Mean n-gram Shannon Equitability")
    + [
        StatisticId("Shannon Character Diversity", _C, "char_diversity"),
        StatisticId("Shannon Character Equitability", _C, "char_equitability"),
        StatisticId("Inverse Flesch Reading Ease", _C, "inverse_fre"),
    ]
)
NAMES: tuple[str, ...] = tuple(s.name for s in STATISTICS)
INDEX: dict[str, int] = {name: i for i, name in enumerate(NAMES)}
BY_NAME: dict[str, StatisticId] = {s.name: s for s in STATISTICS}
assert len(STATISTICS) == 48 and len(INDEX) == 48


def stat_name(base: str, ngram=None) -> str:
    for s in STATISTICS:
        if s.base == base and s.ngram == ngram:
            return s.name
    raise KeyError((base, ngram))


def ids_in_group(group: Group | str) -> list[str]:
    group = Group(group)
    return [s.name for s in STATISTICS if s.group is group]


def resolve_name(name: str) -> str:
    """Map a user-supplied statistic name onto its canonical spelling."""
    if name in INDEX:
        return name
    folded = {n.casefold(): n for n in NAMES}
    key = " ".join(name.split()).casefold()
    if key in folded:
        return folded[key]
    raise KeyError(f"unknown statistic {name!r}")


# -- base formulas -----------------------------------------------------------

def shannon_diversity(dist: CountDistribution) -> float:
    """H = -sum p ln p."""
    t = dist.total
    return -math.fsum((c / t) * math.log(c / t) for c in dist.counts.values())


def shannon_equitability(dist: CountDistribution) -> float:
    """H / ln R in [0, 1]; a single-key distribution gives 0."""
    r = dist.richness
    if r < 2:
        return 0.0
    return min(shannon_diversity(dist) / math.log(r), 1.0)


def class_imbalance(class_dist: CountDistribution, num_classes: int | None = None) -> float:
    """Sum over classes of |1/C - n_c/T|.

    ``num_classes`` covers classes absent from ``class_dist`` (they count with
    n_c = 0); it defaults to the distribution's richness.
    """
    c = num_classes if num_classes is not None else class_dist.richness
    if c < class_dist.richness:
        raise ValueError("num_classes is smaller than the number of observed classes")
    t = class_dist.total
    inv = 1.0 / c
    terms = [abs(inv - n / t) for n in class_dist.counts.values()]
    terms.extend([inv] * (c - class_dist.richness))
    return math.fsum(terms)


def hellinger_similarity(p: CountDistribution, q: CountDistribution) -> float:
    """1 - (1/sqrt 2) * ||sqrt p - sqrt q||_2 over the union of supports."""
    pp, qp = p.probabilities(), q.probabilities()
    s = math.fsum((math.sqrt(pp.get(key, 0.0)) - math.sqrt(qp.get(key, 0.0))) ** 2
                  for key in pp.keys() | qp.keys())
    return min(max(1.0 - math.sqrt(0.5 * s), 0.0), 1.0)


def distinct_total_ratio(dist: CountDistribution) -> float:
    return dist.richness / dist.total


def top_k_ngrams(dist: CountDistribution, k: int = 10, stopwords: StopwordList | None = None) -> list[str]:
    """The ``k`` most frequent n-grams that are not made only of stopwords.

    Ties break by count (descending) then key (ascending).
    """
    return _top_k(dist.counts, k, stopwords)


def _top_k(counts: Mapping[str, float], k: int, stopwords: StopwordList | None) -> list[str]:
    order = lambda kv: (-kv[1], kv[0])  # noqa: E731
    if stopwords is None:
        return [g for g, _ in heapq.nsmallest(k, counts.items(), key=order)]
    # most candidates survive the filter, so a limited head usually suffices
    head = max(4 * k, 64)
    if head < len(counts):
        picked = [g for g, _ in heapq.nsmallest(head, counts.items(), key=order)
                  if not stopwords.all_stopwords(g)]
        if len(picked) >= k:
            return picked[:k]
    kept = ((g, c) for g, c in counts.items() if not stopwords.all_stopwords(g))
    return [g for g, _ in heapq.nsmallest(k, kept, key=order)]


def _as_mapping(per_class) -> Mapping[str, CountDistribution]:
    if isinstance(per_class, ClassDistributions):
        return per_class.distributions
    return per_class


def _pairwise_hellinger(dists: Sequence[CountDistribution]) -> np.ndarray:
    vocab: dict[str, int] = {}
    rows = []
    for d in dists:
        t = d.total
        for key in d.counts:
            vocab.setdefault(key, len(vocab))
        rows.append({key: math.sqrt(c / t) for key, c in d.counts.items()})
    indptr, indices, roots = kernels.pack_rows(rows, vocab)
    return kernels.hellinger_condensed(indptr, indices, roots)


def class_interference_hellinger(per_class, mode: str = "average") -> float:
    """Average or maximum pairwise Hellinger similarity between classes.

    Fewer than two classes gives 0.
    """
    if mode not in ("average", "maximum"):
        raise ValueError(f"mode must be 'average' or 'maximum', not {mode!r}")
    dists = [d for _, d in sorted(_as_mapping(per_class).items())]
    if len(dists) < 2:
        return 0.0
    sims = _pairwise_hellinger(dists)
    return float(sims.max()) if mode == "maximum" else math.fsum(sims) / len(sims)


def _pairwise_jaccard(tops: Sequence[Sequence[str]]) -> np.ndarray:
    """Condensed Jaccard similarities; NaN marks pairs with two empty sets."""
    n = len(tops)
    vocab: dict[str, int] = {}
    indptr = [0]
    indices = []
    for top in tops:
        for g in top:
            indices.append(vocab.setdefault(g, len(vocab)))
        indptr.append(len(indices))
    mat = sparse.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, max(len(vocab), 1)))
    inter = (mat @ mat.T).toarray()
    sizes = np.array([len(t) for t in tops], dtype=np.float64)
    iu, ju = np.triu_indices(n, 1)
    both = inter[iu, ju]
    union = sizes[iu] + sizes[ju] - both
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(union > 0, both / np.where(union > 0, union, 1.0), np.nan)


def top_ngram_interference(per_class, stopwords: StopwordList | None = None, k: int = 10) -> float:
    """Mean pairwise Jaccard similarity of per-class top-k n-gram sets."""
    stopwords = stopwords if stopwords is not None else english()
    dists = [d for _, d in sorted(_as_mapping(per_class).items())]
    if len(dists) < 2:
        return 0.0
    jac = _pairwise_jaccard([top_k_ngrams(d, k, stopwords) for d in dists])
    jac = jac[~np.isnan(jac)]
    return math.fsum(jac) / len(jac) if len(jac) else 0.0


def _pairwise_top_mi(dists: Sequence[CountDistribution], tops: Sequence[Sequence[str]]) -> np.ndarray:
    vocab: dict[str, int] = {}
    for top in tops:
        for g in top:
            vocab.setdefault(g, len(vocab))
    rows = [{g: d.counts[g] for g in d.counts.keys() & vocab.keys()} for d in dists]
    indptr, indices, counts = kernels.pack_rows(rows, vocab)
    tindptr, tindices, _ = kernels.pack_rows([dict.fromkeys(t, 1.0) for t in tops], vocab)
    totals = np.array([float(d.total) for d in dists])
    return kernels.top_mi_condensed(indptr, indices, counts, tindptr, tindices, totals)


def top_ngram_mutual_information(per_class, stopwords: StopwordList | None = None, k: int = 10) -> float:
    """Mean over class pairs of the mutual information of their top n-grams.

    For classes X, Y and each n-gram w in the union of their top-k sets that
    occurs in both: p(w) ln(p(w) / (p_X(w) p_Y(w))) with
    p(w) = (c_X(w) + c_Y(w)) / (T_X + T_Y).
    """
    stopwords = stopwords if stopwords is not None else english()
    dists = [d for _, d in sorted(_as_mapping(per_class).items())]
    if len(dists) < 2:
        return 0.0
    mi = _pairwise_top_mi(dists, [top_k_ngrams(d, k, stopwords) for d in dists])
    return math.fsum(mi) / len(mi)


# -- readability -------------------------------------------------------------

_VOWEL_GROUPS = re.compile(r"[aeiouy]+")


@lru_cache(maxsize=65536)
def syllable_count(word: str) -> int:
    """Vowel-group heuristic: count [aeiouy]+ runs, drop a silent final 'e'.

    A final 'e' is silent unless preceded by 'l' or another 'e'.  Every word
    has at least one syllable.
    """
    w = "".join(ch for ch in word.lower() if ch.isalpha())
    n = len(_VOWEL_GROUPS.findall(w))
    if n > 1 and w.endswith("e") and not w.endswith(("le", "ee")):
        n -= 1
    return max(n, 1)


def flesch_reading_ease(token_seqs: Iterable[Sequence[str]]) -> float:
    """Corpus-wide FRE; each non-empty item counts as one sentence."""
    words = sentences = syllables = 0
    for tokens in token_seqs:
        if not tokens:
            continue
        sentences += 1
        words += len(tokens)
        syllables += sum(syllable_count(t) for t in tokens)
    if words == 0:
        raise EmptyDatasetError("no words to score")
    return 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words)


def inverse_flesch_reading_ease(dataset: Dataset, split: Split | str = Split.TRAIN, epsilon: float = 1e-6) -> float:
    """1 / max(FRE, epsilon); FRE <= 0 saturates at 1 / epsilon."""
    fre = flesch_reading_ease(it.tokens for it in dataset.items(split))
    return 1.0 / max(fre, epsilon)


# -- statistic vectors -------------------------------------------------------

@dataclass(frozen=True)
class StatisticVector:
    dataset_name: str
    values: tuple
    degenerate: frozenset = frozenset()
    num_classes: int | None = None
    num_items: int | None = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != 48:
            raise ValueError(f"expected 48 values, got {len(vals)}")
        bad = [NAMES[i] for i, v in enumerate(vals) if not math.isfinite(v) or v < 0]
        if bad:
            raise ValueError(f"statistics must be finite and non-negative: {bad}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "degenerate", frozenset(self.degenerate))

    def __getitem__(self, name: str) -> float:
        return self.values[INDEX[name]]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(NAMES, self.values))

    def class_count(self) -> int | None:
        """Number of classes, recovered from class diversity if not stored."""
        if self.num_classes is not None:
            return self.num_classes
        h, e = self["Shannon Class Diversity"], self["Shannon Class Equitability"]
        if h == 0:
            return 1
        # H / E = ln R; values that are not a plausible class count mean the pair is inconsistent
        if e <= 0 or e > 1 or h / e > 700:
            return None
        return int(round(math.exp(h / e)))

    def replace(self, **values: float) -> "StatisticVector":
        """Copy with some statistics overridden (keys are canonical names)."""
        vals = list(self.values)
        for name, v in values.items():
            vals[INDEX[name]] = v
        return StatisticVector(self.dataset_name, tuple(vals), self.degenerate,
                               self.num_classes, self.num_items)

    def to_json_obj(self) -> dict:
        return {
            "dataset": self.dataset_name,
            "statistics": self.as_dict(),
            "degenerate": sorted(self.degenerate, key=INDEX.__getitem__),
            "num_classes": self.num_classes,
            "num_items": self.num_items,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "StatisticVector":
        stats = obj["statistics"]
        missing = [n for n in NAMES if n not in stats]
        if missing:
            raise ParseError(f"statistics missing: {missing}")
        return cls(obj.get("dataset", ""), tuple(stats[n] for n in NAMES),
                   frozenset(obj.get("degenerate", ())), obj.get("num_classes"), obj.get("num_items"))

    @classmethod
    def from_mapping(cls, name: str, values: Mapping[str, float], **kw) -> "StatisticVector":
        return cls(name, tuple(values[n] for n in NAMES), **kw)


CSV_HEADER = ("dataset",) + NAMES


def write_stat_csv(fh, vectors: Iterable[StatisticVector]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for v in vectors:
        writer.writerow([v.dataset_name] + [repr(x) for x in v.values])


def stat_csv_string(vectors: Iterable[StatisticVector]) -> str:
    buf = io.StringIO()
    write_stat_csv(buf, vectors)
    return buf.getvalue()


def read_stat_csv(path) -> list[StatisticVector]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty stat matrix", path, 1)
        if header[0] != "dataset":
            raise ParseError("first column must be 'dataset'", path, 1)
        try:
            cols = [resolve_name(h) for h in header[1:]]
        except KeyError as exc:
            raise ParseError(str(exc), path, 1) from None
        if sorted(cols) != sorted(NAMES):
            missing = sorted(set(NAMES) - set(cols))
            raise ParseError(f"stat matrix must have all 48 statistics; missing {missing}", path, 1)
        out = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, reader.line_num)
            try:
                vals = dict(zip(cols, map(float, row[1:])))
                out.append(StatisticVector.from_mapping(row[0], vals))
            except ValueError as exc:
                raise ParseError(str(exc), path, reader.line_num) from None
    return out


# -- full computation --------------------------------------------------------

@dataclass(frozen=True)
class StatsConfig:
    split: Split = Split.TRAIN
    stopwords: StopwordList = field(default_factory=english)
    top_k: int = 10
    fre_epsilon: float = 1e-6


@dataclass
class _Acc:
    values: dict = field(default_factory=dict)
    degenerate: set = field(default_factory=set)

    def put(self, name: str, value: float, degenerate: bool = False):
        self.values[name] = float(value)
        if degenerate:
            self.degenerate.add(name)


def _per_class_counts(weighted: Counter, labels: Sequence[str], n: int) -> dict[str, Counter]:
    seqs: dict[str, list] = {lab: [] for lab in labels}
    for (label, tokens), w in weighted.items():
        seqs[label].append((tokens, w))
    return {lab: ngram_counts(seqs[lab], n) for lab in labels}


def _interference(acc: _Acc, n: int, per_class: dict[str, Counter], cfg: StatsConfig):
    dists = [CountDistribution(c) for _, c in sorted(per_class.items()) if c]
    names = {b: stat_name(b, n) for b in ("max_hellinger", "avg_hellinger", "top_interference", "top_mutual_info")}
    if len(dists) < 2:
        for name in names.values():
            acc.put(name, 0.0, degenerate=True)
        return
    sims = _pairwise_hellinger(dists)
    acc.put(names["max_hellinger"], float(sims.max()))
    acc.put(names["avg_hellinger"], math.fsum(sims) / len(sims))
    tops = [_top_k(d.counts, cfg.top_k, cfg.stopwords) for d in dists]
    jac = _pairwise_jaccard(tops)
    jac = jac[~np.isnan(jac)]
    if len(jac):
        acc.put(names["top_interference"], math.fsum(jac) / len(jac))
    else:
        acc.put(names["top_interference"], 0.0, degenerate=True)
    mi = _pairwise_top_mi(dists, tops)
    acc.put(names["top_mutual_info"], math.fsum(mi) / len(mi), degenerate=not mi.any())


def compute_all(dataset: Dataset, config: StatsConfig | None = None) -> StatisticVector:
    """Compute the 48-entry statistic vector of ``dataset``.

    Identical (label, tokens) items are collapsed into weights first, so
    heavily duplicated corpora cost no more than their distinct items.
    """
    cfg = config or StatsConfig()
    items = dataset.items(cfg.split)
    if not items:
        raise EmptyDatasetError(f"{dataset.name}: split {Split(cfg.split).value!r} is empty")
    weighted = Counter((it.label, it.tokens) for it in items)
    acc = _Acc()

    class_counts: Counter = Counter()
    for (label, _), w in weighted.items():
        class_counts[label] += w
    class_dist = CountDistribution(class_counts)
    num_classes = max(len(dataset.classes), class_dist.richness)
    acc.put("Shannon Class Diversity", shannon_diversity(class_dist), degenerate=class_dist.richness < 2)
    acc.put("Shannon Class Equitability", shannon_equitability(class_dist), degenerate=class_dist.richness < 2)
    acc.put("Class Imbalance", class_imbalance(class_dist, num_classes))

    labels = sorted(class_counts)
    for n in NGRAM_SIZES:
        per_class = _per_class_counts(weighted, labels, n)
        _interference(acc, n, per_class, cfg)
        total: Counter = Counter()
        for c in per_class.values():
            total.update(c)
        dnames = [stat_name(b, n) for b in ("distinct_total", "ngram_diversity", "ngram_equitability")]
        if total:
            dist = CountDistribution(total)
            acc.put(dnames[0], distinct_total_ratio(dist))
            acc.put(dnames[1], shannon_diversity(dist))
            acc.put(dnames[2], shannon_equitability(dist), degenerate=dist.richness < 2)
        else:
            for name in dnames:
                acc.put(name, 0.0, degenerate=True)

    for base in ("max_hellinger", "avg_hellinger", "top_interference", "top_mutual_info",
                 "distinct_total", "ngram_diversity", "ngram_equitability"):
        parts = [stat_name(base, n) for n in NGRAM_SIZES]
        acc.put(stat_name(base, MEAN), math.fsum(acc.values[p] for p in parts) / len(parts),
                degenerate=any(p in acc.degenerate for p in parts))

    chars: Counter = Counter()
    for (_, tokens), w in weighted.items():
        for tok in tokens:
            for ch, c in Counter(tok).items():
                chars[ch] += c * w
    if chars:
        cd = CountDistribution(chars)
        acc.put("Shannon Character Diversity", shannon_diversity(cd))
        acc.put("Shannon Character Equitability", shannon_equitability(cd), degenerate=cd.richness < 2)
    else:
        acc.put("Shannon Character Diversity", 0.0, degenerate=True)
        acc.put("Shannon Character Equitability", 0.0, degenerate=True)

    acc.put(*_inverse_fre(weighted, cfg.fre_epsilon))
    return StatisticVector(
        dataset.name,
        tuple(acc.values[n] for n in NAMES),
        frozenset(acc.degenerate),
        num_classes=num_classes,
        num_items=len(items),
    )


def _inverse_fre(weighted: Counter, epsilon: float):
    name = "Inverse Flesch Reading Ease"
    words = sentences = syllables = 0
    for (_, tokens), w in weighted.items():
        if tokens:
            sentences += w
            words += w * len(tokens)
            syllables += w * sum(syllable_count(t) for t in tokens)
    if words == 0:
        return name, 1.0 / epsilon, True
    fre = 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words)
    return name, 1.0 / max(fre, epsilon), fre <= epsilon


def vectors_to_json(vectors: Iterable[StatisticVector]) -> str:
    return json.dumps([v.to_json_obj() for v in vectors], indent=2)
