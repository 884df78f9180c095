"""Genetic search for difficulty measures.

Genomes are 48-bit masks over the canonical statistics.  Fitness is the
harmonic mean, over models, of the *negated* Pearson correlation between
measure values and model scores across datasets, so a measure that rises as
every model's score falls gets fitness near 1.  A model with negated
correlation at or below ``FITNESS_EPS`` forces fitness 0.

Each generation samples ``parent_pairs`` fitness-proportional parent pairs,
makes one child per pair (uniform crossover, then bit-flip mutation), keeps
the ``population_size`` fittest children and re-inserts the best genome seen
so far if it dropped out.  A run stops after ``stagnation_limit``
generations without improving the best fitness.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlignmentError, ConfigError, ParseError, ZeroVarianceError
from .measure import MeasureGenome
from .stats import INDEX, NAMES, Group, StatisticVector, ids_in_group, read_stat_csv, resolve_name

FITNESS_EPS = 1e-9
IMPROVEMENT_TOL = 1e-12


# -- data containers ---------------------------------------------------------

@dataclass(frozen=True)
class ScoreMatrix:
    """Model x dataset macro-F1 scores."""

    models: tuple
    datasets: tuple
    scores: np.ndarray
    holdout: frozenset = frozenset()

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "holdout", frozenset(self.holdout))
        if scores.shape != (len(self.models), len(self.datasets)):
            raise ValueError(f"scores shape {scores.shape} does not match models x datasets")
        unknown = self.holdout - set(self.models)
        if unknown:
            raise ConfigError(f"holdout models not in score matrix: {sorted(unknown)}")
        if len(self.datasets) < 3:
            raise ConfigError("need at least 3 datasets for correlation")
        if len(set(self.datasets)) != len(self.datasets):
            raise ConfigError("duplicate dataset names in score matrix")
        active = self.active_scores
        if active.shape[0] == 0:
            raise ConfigError("every model is held out")
        if np.isnan(active).any():
            raise ConfigError("missing scores for non-holdout models")
        finite = scores[~np.isnan(scores)]
        if ((finite < 0) | (finite > 1)).any():
            raise ConfigError("scores must lie in [0, 1]")

    @property
    def active_models(self) -> list[str]:
        return [m for m in self.models if m not in self.holdout]

    @property
    def active_scores(self) -> np.ndarray:
        keep = [i for i, m in enumerate(self.models) if m not in self.holdout]
        return self.scores[keep]

    def with_holdout(self, names: Iterable[str]) -> "ScoreMatrix":
        return replace(self, holdout=self.holdout | frozenset(names))

    def reorder(self, datasets: Sequence[str]) -> "ScoreMatrix":
        pos = [self.datasets.index(d) for d in datasets]
        return replace(self, datasets=tuple(datasets), scores=self.scores[:, pos])


def read_score_csv(path, holdout: Iterable[str] = ()) -> ScoreMatrix:
    """``dataset`` column then one column per model; blank cells are missing."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "dataset" or len(header) < 2:
            raise ParseError("header must be 'dataset' followed by model names", path, 1)
        datasets, rows = [], []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, reader.line_num)
            try:
                rows.append([float(c) if c.strip() else math.nan for c in row[1:]])
            except ValueError as exc:
                raise ParseError(str(exc), path, reader.line_num) from None
            datasets.append(row[0])
    scores = np.array(rows, dtype=np.float64).T if rows else np.zeros((len(header) - 1, 0))
    return ScoreMatrix(tuple(header[1:]), tuple(datasets), scores, frozenset(holdout))


def write_score_csv(fh, scores: ScoreMatrix) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["dataset", *scores.models])
    for j, d in enumerate(scores.datasets):
        writer.writerow([d] + ["" if math.isnan(x) else repr(float(x)) for x in scores.scores[:, j]])


@dataclass(frozen=True)
class StatMatrix:
    datasets: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "datasets", tuple(self.datasets))
        if values.shape != (len(self.datasets), 48):
            raise ValueError(f"stat matrix shape {values.shape} is not datasets x 48")
        if len(set(self.datasets)) != len(self.datasets):
            raise ConfigError("duplicate dataset names in stat matrix")

    @classmethod
    def from_vectors(cls, vectors: Sequence[StatisticVector]) -> "StatMatrix":
        return cls(tuple(v.dataset_name for v in vectors), np.array([v.values for v in vectors]))

    @classmethod
    def read_csv(cls, path) -> "StatMatrix":
        return cls.from_vectors(read_stat_csv(path))

    def reorder(self, datasets: Sequence[str]) -> "StatMatrix":
        pos = {d: i for i, d in enumerate(self.datasets)}
        return StatMatrix(tuple(datasets), self.values[[pos[d] for d in datasets]])


def align(stats: StatMatrix, scores: ScoreMatrix) -> tuple[StatMatrix, ScoreMatrix]:
    """Order the stat rows like the score columns; both must name the same datasets."""
    a, b = set(stats.datasets), set(scores.datasets)
    if a != b:
        raise AlignmentError(missing_in_stats=b - a, missing_in_scores=a - b)
    return stats.reorder(scores.datasets), scores


@dataclass(frozen=True)
class EvolutionConfig:
    parent_pairs: int = 400
    population_size: int = 200
    mutation_rate: float = 0.01
    stagnation_limit: int = 15
    restarts: int = 50
    seed: int = 0
    excluded_statistics: frozenset = frozenset()
    max_generations: int = 10_000
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "excluded_statistics",
                           frozenset(resolve_name(n) for n in self.excluded_statistics))
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutation_rate must be in [0, 1]")
        for name in ("parent_pairs", "population_size", "restarts", "n_jobs", "max_generations"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.stagnation_limit < 0:
            raise ConfigError("stagnation_limit must be >= 0")
        if len(self.excluded_statistics) >= 48:
            raise ConfigError("every statistic is excluded; nothing left to evolve")

    def allowed_mask(self) -> np.ndarray:
        mask = np.ones(48, dtype=bool)
        for n in self.excluded_statistics:
            mask[INDEX[n]] = False
        return mask


# -- fitness -----------------------------------------------------------------

def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two 1-D sequences of equal length")
    if len(x) < 3:
        raise ValueError("pearson needs at least 3 points")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ZeroVarianceError("correlation undefined for constant input")
    xc, yc = x - x.mean(), y - y.mean()
    r = float(np.dot(xc, yc) / math.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))
    return min(max(r, -1.0), 1.0)


def harmonic_fitness(neg_corr: Sequence[float]) -> float:
    """Harmonic mean of negated correlations; 0 if any is <= FITNESS_EPS."""
    vals = list(neg_corr)
    if not vals or min(vals) <= FITNESS_EPS:
        return 0.0
    return len(vals) / math.fsum(1.0 / v for v in vals)


def fitness(genome: MeasureGenome, stats: StatMatrix, scores: ScoreMatrix) -> float:
    """Scalar reference fitness built directly on :func:`pearson`."""
    from .measure import evaluate

    stats, scores = align(stats, scores)
    vectors = [StatisticVector(d, tuple(row)) for d, row in zip(stats.datasets, stats.values)]
    measure = [evaluate(genome, v) for v in vectors]
    neg = []
    for row in scores.active_scores:
        try:
            neg.append(-pearson(measure, row))
        except ZeroVarianceError:
            return 0.0
    return harmonic_fitness(neg)


class _Evaluator:
    """Vectorised fitness for a whole population."""

    def __init__(self, stat_values: np.ndarray, model_scores: np.ndarray):
        self.x = np.ascontiguousarray(stat_values.T)  # 48 x D
        yc = model_scores - model_scores.mean(axis=1, keepdims=True)
        ynorm = np.sqrt((yc * yc).sum(axis=1))
        self.valid_models = bool((np.ptp(model_scores, axis=1) > 0).all())
        self.yc = yc
        self.ynorm = ynorm
        self.models = model_scores.shape[0]

    def correlations(self, genomes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v = genomes.astype(np.float64) @ self.x  # P x D
        ok = np.ptp(v, axis=1) > 0
        vc = v - v.mean(axis=1, keepdims=True)
        vnorm = np.sqrt((vc * vc).sum(axis=1))
        with np.errstate(invalid="ignore", divide="ignore"):
            r = (vc @ self.yc.T) / (vnorm[:, None] * self.ynorm[None, :])
        return np.clip(r, -1.0, 1.0), ok

    def __call__(self, genomes: np.ndarray) -> np.ndarray:
        if not self.valid_models:
            return np.zeros(len(genomes))
        r, ok = self.correlations(genomes)
        neg = -r
        good = ok & (neg > FITNESS_EPS).all(axis=1) & genomes.any(axis=1)
        out = np.zeros(len(genomes))
        if good.any():
            out[good] = self.models / (1.0 / neg[good]).sum(axis=1)
        return out


def population_fitness(genomes, stats: StatMatrix, scores: ScoreMatrix) -> np.ndarray:
    stats, scores = align(stats, scores)
    return _Evaluator(stats.values, scores.active_scores)(np.atleast_2d(np.asarray(genomes, dtype=bool)))


# -- operators ---------------------------------------------------------------

def select_parents(population, fitnesses, pairs: int, rng: np.random.Generator) -> np.ndarray:
    """Index pairs ``(pairs, 2)`` drawn with replacement, p_i = f_i / sum f.

    All-zero fitness falls back to uniform sampling.
    """
    f = np.asarray(fitnesses, dtype=np.float64)
    if len(f) != len(population) or len(f) == 0:
        raise ValueError("fitnesses must match a non-empty population")
    if (f < 0).any():
        raise ValueError("fitnesses must be non-negative")
    total = f.sum()
    p = None if total <= 0 else f / total
    return rng.choice(len(f), size=(pairs, 2), p=p)


def _as_bits(g):
    if isinstance(g, MeasureGenome):
        return g.to_array(), True
    return np.asarray(g, dtype=bool), False


def crossover(a, b, rng: np.random.Generator):
    """Each child bit comes from a uniformly chosen parent (row-wise for batches)."""
    aa, wrap = _as_bits(a)
    bb, _ = _as_bits(b)
    child = np.where(rng.random(aa.shape) < 0.5, aa, bb)
    return MeasureGenome.from_array(child) if wrap else child


def mutate(g, rate: float, rng: np.random.Generator, allowed: np.ndarray | None = None,
           max_retries: int = 100):
    """Flip each allowed bit with probability ``rate``.

    A genome left empty is mutated again; after ``max_retries`` failures (or
    with ``rate == 0``) one random allowed bit is switched on instead.
    """
    bits, wrap = _as_bits(g)
    allowed = np.ones(bits.shape[-1], dtype=bool) if allowed is None else np.asarray(allowed, dtype=bool)
    out = np.atleast_2d(bits).copy()
    out ^= (rng.random(out.shape) < rate) & allowed
    empty = ~out.any(axis=1)
    tries = 0
    while empty.any() and rate > 0 and tries < max_retries:
        idx = np.flatnonzero(empty)
        out[idx] ^= (rng.random((len(idx), out.shape[1])) < rate) & allowed
        empty = ~out.any(axis=1)
        tries += 1
    if empty.any():
        choices = np.flatnonzero(allowed)
        for i in np.flatnonzero(empty):
            out[i, rng.choice(choices)] = True
    out = out.reshape(bits.shape)
    return MeasureGenome.from_array(out) if wrap else out


# -- evolution ---------------------------------------------------------------

@dataclass
class RestartResult:
    genome: np.ndarray
    fitness: float
    history: list
    generations: int


@dataclass
class EvolutionResult:
    best_genome: MeasureGenome
    best_fitness: float
    history: list
    restart_bests: list
    restart_histories: list
    selection_frequency: dict
    model_correlations: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "best_genome": self.best_genome.names,
            "best_fitness": self.best_fitness,
            "history": self.history,
            "restarts": [
                {"genome": g.names, "fitness": f, "generations": len(h) - 1}
                for (g, f), h in zip(self.restart_bests, self.restart_histories)
            ],
            "restart_histories": self.restart_histories,
            "selection_frequency": self.selection_frequency,
            "model_correlations": self.model_correlations,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


def _run_once(cfg: EvolutionConfig, evaluator: _Evaluator, allowed: np.ndarray,
              rng: np.random.Generator) -> RestartResult:
    pop = np.eye(48, dtype=bool)[allowed]
    fit = evaluator(pop)
    i = int(np.argmax(fit))
    best, best_fit = pop[i].copy(), float(fit[i])
    history = [best_fit]
    stagnant = generations = 0
    while stagnant < cfg.stagnation_limit and generations < cfg.max_generations:
        pairs = select_parents(pop, fit, cfg.parent_pairs, rng)
        children = crossover(pop[pairs[:, 0]], pop[pairs[:, 1]], rng)
        children = mutate(children, cfg.mutation_rate, rng, allowed)
        cfit = evaluator(children)
        keep = np.argsort(-cfit, kind="stable")[: cfg.population_size]
        pop, fit = children[keep], cfit[keep]
        top = float(fit[0])
        if top > best_fit + IMPROVEMENT_TOL:
            best, best_fit = pop[0].copy(), top
            stagnant = 0
        else:
            stagnant += 1
            if not (pop == best).all(axis=1).any():
                if len(pop) >= cfg.population_size:
                    pop[-1], fit[-1] = best, best_fit
                else:
                    pop, fit = np.vstack([pop, best]), np.append(fit, best_fit)
        generations += 1
        history.append(best_fit)
    return RestartResult(best, best_fit, history, generations)


def _restart_job(args):
    cfg, stat_values, model_scores, seed_seq = args
    evaluator = _Evaluator(stat_values, model_scores)
    return _run_once(cfg, evaluator, cfg.allowed_mask(), np.random.default_rng(seed_seq))


def evolve(config: EvolutionConfig, stats: StatMatrix, scores: ScoreMatrix) -> EvolutionResult:
    """Run ``config.restarts`` independent evolutions and collect the best.

    Restart ``k`` draws from the ``k``-th child of ``SeedSequence(seed)``, so
    results do not depend on ``n_jobs``.
    """
    stats, scores = align(stats, scores)
    active = scores.active_scores
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    jobs = [(config, stats.values, active, s) for s in seeds]
    if config.n_jobs > 1 and config.restarts > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as ex:
            runs = list(ex.map(_restart_job, jobs))
    else:
        runs = [_restart_job(j) for j in jobs]

    best_k = max(range(len(runs)), key=lambda k: (runs[k].fitness, -k))
    best = runs[best_k]
    freq = dict.fromkeys(NAMES, 0)
    for run in runs:
        for name, bit in zip(NAMES, run.genome):
            freq[name] += int(bit)
    genome = MeasureGenome.from_array(best.genome)
    return EvolutionResult(
        best_genome=genome,
        best_fitness=best.fitness,
        history=best.history,
        restart_bests=[(MeasureGenome.from_array(r.genome), r.fitness) for r in runs],
        restart_histories=[r.history for r in runs],
        selection_frequency=freq,
        model_correlations=_model_correlations(genome, stats, scores),
        config=_config_json(config),
    )


def _model_correlations(genome: MeasureGenome, stats: StatMatrix, scores: ScoreMatrix) -> dict:
    measure = stats.values @ genome.to_array().astype(np.float64)
    out = {}
    for m, row in zip(scores.models, scores.scores):
        ok = ~np.isnan(row)
        try:
            out[m] = pearson(measure[ok], row[ok])
        except (ZeroVarianceError, ValueError):
            out[m] = None
    return out


def _config_json(cfg: EvolutionConfig) -> dict:
    return {
        "parent_pairs": cfg.parent_pairs,
        "population_size": cfg.population_size,
        "mutation_rate": cfg.mutation_rate,
        "stagnation_limit": cfg.stagnation_limit,
        "restarts": cfg.restarts,
        "seed": cfg.seed,
        "excluded_statistics": sorted(cfg.excluded_statistics, key=INDEX.__getitem__),
    }


# -- ablations ---------------------------------------------------------------

def expand_statistics(entries: Iterable[str]) -> frozenset:
    """Statistic names, with group names (e.g. ``ClassInterference``) expanded."""
    out = set()
    groups = {g.value.casefold(): g for g in Group}
    for e in entries:
        g = groups.get(e.replace(" ", "").casefold())
        if g is not None:
            out.update(ids_in_group(g))
        else:
            out.add(resolve_name(e))
    return frozenset(out)


def standard_ablations() -> dict[str, frozenset]:
    return {
        "all_statistics": frozenset(),
        "no_class_diversity": frozenset({"Shannon Class Diversity"}),
        "no_diversity_or_balance": frozenset(ids_in_group(Group.CLASS_DIVERSITY) + ids_in_group(Group.CLASS_BALANCE)),
        "no_interference": frozenset(ids_in_group(Group.CLASS_INTERFERENCE)),
        "no_complexity": frozenset(ids_in_group(Group.DATA_COMPLEXITY)),
    }


def load_ablation_file(path) -> dict[str, frozenset]:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", path, exc.lineno) from None
    if not isinstance(obj, dict) or not all(isinstance(v, list) for v in obj.values()):
        raise ParseError("ablation file must map names to lists of statistics", path)
    try:
        return {name: expand_statistics(v) for name, v in obj.items()}
    except KeyError as exc:
        raise ParseError(str(exc.args[0]), path) from None


def run_ablations(config: EvolutionConfig, stats: StatMatrix, scores: ScoreMatrix,
                  masks: Mapping[str, Iterable[str]]) -> dict[str, EvolutionResult]:
    """One evolution per named exclusion mask, all from the same seed."""
    results = {}
    for name, mask in masks.items():
        excluded = config.excluded_statistics | expand_statistics(mask)
        cfg = replace(config, excluded_statistics=excluded)
        results[name] = evolve(cfg, stats, scores)
    return results


def aggregate_selection_frequency(results: Mapping[str, EvolutionResult]) -> dict[str, int]:
    total = dict.fromkeys(NAMES, 0)
    for res in results.values():
        for name, c in res.selection_frequency.items():
            total[name] += c
    return total
