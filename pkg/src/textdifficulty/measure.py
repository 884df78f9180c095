"""Difficulty measures: unweighted sums of selected statistics, and reports.

A measure is a 48-bit genome over the canonical statistic order.  Its value
on a dataset is the plain sum of the selected statistics; reports break that
sum into rows and compare each row with a baseline mean and sigma.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, ParseError
from .stats import INDEX, NAMES, StatisticVector, resolve_name


@dataclass(frozen=True)
class MeasureGenome:
    bits: tuple
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        bits = tuple(bool(b) for b in self.bits)
        if len(bits) != 48:
            raise ValueError(f"genome needs 48 bits, got {len(bits)}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_names(cls, names: Iterable[str], name: str | None = None) -> "MeasureGenome":
        bits = [False] * 48
        for n in names:
            bits[INDEX[resolve_name(n)]] = True
        return cls(tuple(bits), name)

    @classmethod
    def from_array(cls, arr, name: str | None = None) -> "MeasureGenome":
        return cls(tuple(np.asarray(arr, dtype=bool).tolist()), name)

    @property
    def names(self) -> list[str]:
        return [n for n, b in zip(NAMES, self.bits) if b]

    def to_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=bool)

    def __len__(self):
        return sum(self.bits)

    def __or__(self, other: "MeasureGenome") -> "MeasureGenome":
        return MeasureGenome(tuple(a or b for a, b in zip(self.bits, other.bits)))

    def __and__(self, other: "MeasureGenome") -> "MeasureGenome":
        return MeasureGenome(tuple(a and b for a, b in zip(self.bits, other.bits)))

    def __sub__(self, other: "MeasureGenome") -> "MeasureGenome":
        return MeasureGenome(tuple(a and not b for a, b in zip(self.bits, other.bits)))

    def label(self) -> str:
        return self.name or " + ".join(self.names)


D2 = MeasureGenome.from_names(
    [
        "Distinct Unigrams (Vocab) : Total Unigrams",
        "Class Imbalance",
        "Shannon Class Diversity",
        "Maximum Unigram Hellinger Similarity",
        "Top Unigram Mutual Information",
    ],
    name="D2",
)
D1 = MeasureGenome((D2 | MeasureGenome.from_names(["Top 5-gram Interference"])).bits, name="D1")
PRESETS = {"d1": D1, "d2": D2}


def load_genome(path) -> MeasureGenome:
    """Read a custom measure.

    Accepts a JSON list of statistic names, ``{"name":..., "statistics": [...]}``
    or an evolution result (its ``best_genome`` is used).
    """
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", path, exc.lineno) from None
    name = None
    if isinstance(obj, dict):
        name = obj.get("name")
        obj = obj.get("statistics", obj.get("best_genome"))
    if not isinstance(obj, list) or not obj:
        raise ParseError("measure file needs a non-empty list of statistic names", path)
    try:
        return MeasureGenome.from_names(obj, name=name)
    except KeyError as exc:
        raise ParseError(str(exc.args[0]), path) from None


def resolve_measure(choice: str) -> MeasureGenome:
    """``d1``, ``d2`` or a path to a measure file."""
    preset = PRESETS.get(choice.lower())
    if preset is not None:
        return preset
    try:
        return load_genome(choice)
    except FileNotFoundError:
        raise ConfigError(f"unknown measure {choice!r} (expected d1, d2 or a measure file)") from None


def evaluate(genome: MeasureGenome, stats: StatisticVector, exact: bool = False):
    """Unweighted sum of the statistics selected by ``genome``.

    The float result is the correctly rounded sum.  ``exact=True`` returns the
    sum as a :class:`~fractions.Fraction` of the stored float values.
    """
    if not any(genome.bits):
        raise ValueError("genome selects no statistics")
    vals = [v for v, b in zip(stats.values, genome.bits) if b]
    if exact:
        return sum((Fraction(v) for v in vals), Fraction(0))
    return math.fsum(vals)


class Band(str, enum.Enum):
    STANDARD = "standard"
    HARD = "hard"


DEFAULT_BAND_THRESHOLD = 4.0


def band(difficulty: float, threshold: float = DEFAULT_BAND_THRESHOLD) -> Band:
    """``hard`` strictly above the threshold, ``standard`` otherwise."""
    return Band.HARD if difficulty > threshold else Band.STANDARD


# -- baselines ---------------------------------------------------------------

@dataclass(frozen=True)
class BaselineTable:
    entries: Mapping[str, tuple]
    source: str = "embedded"

    def __post_init__(self):
        for name, (mean, sigma) in self.entries.items():
            if name not in INDEX:
                raise ValueError(f"unknown statistic in baseline: {name!r}")
            if not sigma > 0:
                raise ValueError(f"baseline sigma for {name!r} must be positive")

    def get(self, name: str):
        return self.entries.get(name)

    @classmethod
    def from_json_obj(cls, obj: Mapping, source: str = "file") -> "BaselineTable":
        entries = {}
        for name, row in obj.items():
            try:
                entries[resolve_name(name)] = (float(row["mean"]), float(row["sigma"]))
            except (KeyError, TypeError) as exc:
                raise ParseError(f"bad baseline entry {name!r}: {exc}") from None
        return cls(entries, source)

    def to_json_obj(self) -> dict:
        return {n: {"mean": m, "sigma": s} for n, (m, s) in self.entries.items()}


def _data_json(filename: str):
    return json.loads(resources.files("textdifficulty").joinpath("data", filename).read_text("utf-8"))


def load_baseline(path=None) -> BaselineTable:
    """The embedded published baseline, or one read from ``path``."""
    if path is None:
        return BaselineTable.from_json_obj(_data_json("baseline.json"), source="embedded")
    try:
        with open(path, encoding="utf-8") as fh:
            return BaselineTable.from_json_obj(json.load(fh), source=str(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", path, exc.lineno) from None


def reference_context() -> dict:
    """Published discovered measures and per-statistic correlations."""
    return {
        "discovered_measures": _data_json("discovered_measures.json")["measures"],
        "statistic_correlations": _data_json("statistic_correlations.json")["rows"],
    }


# -- reports -----------------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    statistic: str
    value: float
    mean: float | None = None
    sigma: float | None = None
    z: float | None = None
    notable: bool = False
    degenerate: bool = False

    @property
    def has_baseline(self) -> bool:
        return self.mean is not None


@dataclass
class AnalysisReport:
    dataset: str
    measure: str
    difficulty: float
    band: Band
    rows: list
    num_classes: int | None = None
    diversity_domination: bool = False
    warnings: list = field(default_factory=list)
    context: dict | None = None

    @property
    def notable(self) -> list[ReportRow]:
        return [r for r in self.rows if r.notable]

    def to_json_obj(self) -> dict:
        obj = {
            "dataset": self.dataset,
            "measure": self.measure,
            "difficulty": self.difficulty,
            "band": self.band.value,
            "num_classes": self.num_classes,
            "diversity_domination": self.diversity_domination,
            "warnings": list(self.warnings),
            "constituents": [
                {
                    "statistic": r.statistic,
                    "value": r.value,
                    "baseline_mean": r.mean,
                    "baseline_sigma": r.sigma,
                    "z": r.z,
                    "notable": r.notable,
                    "degenerate": r.degenerate,
                    "baseline": "ok" if r.has_baseline else "no baseline",
                }
                for r in self.rows
            ],
        }
        if self.context is not None:
            obj["context"] = self.context
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)

    def to_markdown(self, width: int = 30) -> str:
        return _render_markdown(self, width)


def report(stats: StatisticVector, genome: MeasureGenome, baseline: BaselineTable | None = None, *,
           notable_z: float = 1.0, band_threshold: float = DEFAULT_BAND_THRESHOLD,
           domination_classes: int = 25, balanced_imbalance: float = 0.1,
           context: bool = False) -> AnalysisReport:
    """Break a measure into its constituents and compare them to a baseline.

    Rows with |z| > ``notable_z`` are notable.  Diversity domination is
    flagged when the dataset has at least ``domination_classes`` classes and
    class imbalance is at most ``balanced_imbalance``.
    """
    baseline = baseline if baseline is not None else load_baseline()
    rows = []
    for name in genome.names:
        value = stats[name]
        entry = baseline.get(name)
        degenerate = name in stats.degenerate
        if entry is None:
            rows.append(ReportRow(name, value, degenerate=degenerate))
            continue
        mean, sigma = entry
        z = (value - mean) / sigma
        rows.append(ReportRow(name, value, mean, sigma, z, abs(z) > notable_z, degenerate))
    difficulty = math.fsum(r.value for r in rows)

    warnings = []
    n_classes = stats.class_count()
    dominated = (n_classes is not None and n_classes >= domination_classes
                 and stats["Class Imbalance"] <= balanced_imbalance)
    if dominated:
        warnings.append(
            f"{n_classes} near-balanced classes: class diversity dominates the measure, "
            "so the difficulty value overstates how hard the data is; read the constituents instead"
        )
    missing = [r.statistic for r in rows if not r.has_baseline]
    if missing:
        warnings.append("no baseline for: " + ", ".join(missing))
    flagged = [r.statistic for r in rows if r.degenerate]
    if flagged:
        warnings.append("degenerate (defaulted) statistics: " + ", ".join(flagged))

    ctx = None
    if context:
        ref = reference_context()
        chosen = set(genome.names)
        ctx = {
            "statistic_correlations": [r for r in ref["statistic_correlations"] if r["statistic"] in chosen],
            "discovered_measures_containing": {
                n: sum(n in m["statistics"] for m in ref["discovered_measures"]) for n in genome.names
            },
            "discovered_measures_total": len(ref["discovered_measures"]),
        }
    return AnalysisReport(
        dataset=stats.dataset_name,
        measure=genome.label(),
        difficulty=difficulty,
        band=band(difficulty, band_threshold),
        rows=rows,
        num_classes=n_classes,
        diversity_domination=dominated,
        warnings=warnings,
        context=ctx,
    )


def _bar(value: float, scale: float, width: int, ch: str = "#") -> str:
    n = 0 if scale <= 0 else int(round(width * min(max(value, 0.0), scale) / scale))
    return ch * n + " " * (width - n)


def _render_markdown(rep: AnalysisReport, width: int) -> str:
    lines = [f"# Difficulty report: {rep.dataset}", ""]
    lines.append(f"- measure: {rep.measure}")
    lines.append(f"- difficulty: **{rep.difficulty:.4f}** ({rep.band.value})")
    if rep.num_classes is not None:
        lines.append(f"- classes: {rep.num_classes}")
    lines.append("")
    lines.append("| Statistic | Value | Baseline mean | Sigma | z | |")
    lines.append("|---|---:|---:|---:|---:|---|")
    for r in rep.rows:
        if r.has_baseline:
            cells = [f"{r.mean:.4g}", f"{r.sigma:.4g}", f"{r.z:+.2f}"]
        else:
            cells = ["no baseline", "", ""]
        marks = []
        if r.notable:
            marks.append("notable")
        if r.degenerate:
            marks.append("degenerate")
        lines.append(f"| {r.statistic} | {r.value:.4g} | " + " | ".join(cells) + f" | {', '.join(marks)} |")
    lines += ["", "```"]
    label_w = max(len(r.statistic) for r in rep.rows)
    for r in rep.rows:
        scale = max(r.value, (r.mean or 0) + (r.sigma or 0)) or 1.0
        lines.append(f"{r.statistic:<{label_w}}  value |{_bar(r.value, scale, width)}| {r.value:.4g}")
        if r.has_baseline:
            lo, hi = r.mean - r.sigma, r.mean + r.sigma
            mean_bar = _bar(r.mean, scale, width)
            # sigma band drawn as '~' past the mean bar
            hi_n = int(round(width * min(hi, scale) / scale))
            mean_n = len(mean_bar.rstrip())
            mean_bar = mean_bar[:mean_n] + "~" * max(hi_n - mean_n, 0) + " " * (width - max(hi_n, mean_n))
            lines.append(f"{'':<{label_w}}  mean  |{mean_bar}| {r.mean:.4g} (+/- {r.sigma:.4g}, low {lo:.4g})")
    lines.append("```")
    if rep.warnings:
        lines += ["", "## Warnings", ""] + [f"- {w}" for w in rep.warnings]
    if rep.context:
        lines += ["", "## Reference context", ""]
        total = rep.context["discovered_measures_total"]
        for name, count in rep.context["discovered_measures_containing"].items():
            lines.append(f"- {name}: selected in {count} of {total} published high-correlation measures")
        for row in rep.context["statistic_correlations"]:
            lines.append(f"- {row['statistic']}: |correlation with model score| = {row['correlation']:.3f}")
    return "\n".join(lines) + "\n"
