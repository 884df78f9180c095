"""Synthetic datasets and planted score matrices.

``identical`` datasets repeat one random string per class, which models fit
perfectly while class diversity grows as ln(classes).  Planted matrices
make model scores a noisy negative linear function of a known statistic
subset; evolution should recover that subset.
"""
from __future__ import annotations

import random
import string
from typing import Iterator, Sequence

import numpy as np

from .evolve import ScoreMatrix, StatMatrix
from .stats import INDEX, NAMES, resolve_name

MODES = ("identical", "random")


def _random_string(rng: random.Random, words: int) -> str:
    return " ".join(
        "".join(rng.choices(string.ascii_lowercase, k=rng.randint(3, 8))) for _ in range(words)
    )


def synthetic_rows(classes: int, items_per_class: int, mode: str = "identical",
                   seed: int = 0, words: int = 5) -> Iterator[tuple[str, str]]:
    """Yield (text, label) rows, class by class."""
    if classes < 1 or items_per_class < 1 or words < 1:
        raise ValueError("classes, items_per_class and words must be >= 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rng = random.Random(seed)
    width = len(str(classes - 1))
    for c in range(classes):
        label = f"class_{c:0{width}d}"
        if mode == "identical":
            text = _random_string(rng, words)
            for _ in range(items_per_class):
                yield text, label
        else:
            for _ in range(items_per_class):
                yield _random_string(rng, words), label


DEFAULT_PLANTED = (
    "Class Imbalance",
    "Shannon Class Diversity",
    "Maximum Unigram Hellinger Similarity",
)


def planted_matrices(planted: Sequence[str] = DEFAULT_PLANTED, datasets: int = 60, models: int = 5,
                     noise: float = 0.02, slope: float = 0.25, seed: int = 0) -> tuple[StatMatrix, ScoreMatrix]:
    """Statistics ~ U(0, 1); score_m = c_m - slope * sum(planted) + N(0, noise).

    ``c_m`` is drawn from U(0.85, 0.95) and scores are clipped into [0, 1].
    """
    rng = np.random.default_rng(seed)
    planted = [resolve_name(p) for p in planted]
    values = rng.random((datasets, len(NAMES)))
    signal = values[:, [INDEX[p] for p in planted]].sum(axis=1)
    offsets = rng.uniform(0.85, 0.95, size=models)
    scores = offsets[:, None] - slope * signal[None, :] + rng.normal(0.0, noise, size=(models, datasets))
    names = tuple(f"ds{i:03d}" for i in range(datasets))
    return (
        StatMatrix(names, values),
        ScoreMatrix(tuple(f"model_{m}" for m in range(models)), names, np.clip(scores, 0.0, 1.0)),
    )
