"""Genetic algorithm over MLP initial-weight genomes.

Each individual is a flat weight vector; its fitness is the test-set error
of an MLP trained from exactly those initial weights with the same
configuration as the conventional network being compared against.  Blend
crossover from a random cut point, single-gene additive mutation with
clamping to [0, 1], truncation selection topped up by rank-scaled sampling,
and elitism.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .evaluation import ConfusionMatrix, confusion, test_error
from .mlp import (
    Topology,
    TrainedModel,
    TrainingConfig,
    TrainingDivergedError,
    init_weights,
    one_hot,
    predict_batch,
    train_scg,
)

__all__ = [
    "Individual",
    "GaConfig",
    "CycleStats",
    "GaRun",
    "ComparisonReport",
    "PreparedSplits",
    "prepare_splits",
    "init_population",
    "crossover",
    "apply_mutation",
    "mutate",
    "evaluate_fitness",
    "select",
    "run_ga",
    "compare",
]

log = logging.getLogger(__name__)


@dataclass
class Individual:
    genome: np.ndarray
    fitness: float | None = None


@dataclass(frozen=True)
class GaConfig:
    cycles: int = 20
    population_size: int = 15
    crossover_alpha: float = 0.3
    mutation_rate: float = 0.1
    selection_rate: float = 0.7
    goal: float = 0.0
    seed: int = 0
    fitness_metric: str = "overall"  # or "per_class_mean"
    workers: int = 1

    def __post_init__(self):
        if self.cycles < 1 or self.population_size < 1:
            raise ValueError("cycles and population_size must be >= 1")
        for name in ("crossover_alpha", "mutation_rate", "selection_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.fitness_metric not in ("overall", "per_class_mean"):
            raise ValueError(f"unknown fitness_metric {self.fitness_metric!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class CycleStats:
    cycle: int
    best_fitness: float
    mean_fitness: float


@dataclass
class GaRun:
    cycles: list
    best: Individual
    best_model: TrainedModel
    stop_reason: str  # "cycles" or "goal"
    evaluations: int = 0


@dataclass(frozen=True)
class PreparedSplits:
    """Frozen arrays all individuals are scored against."""

    x_train: np.ndarray
    t_train: np.ndarray
    x_val: np.ndarray
    t_val: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    num_classes: int


def prepare_splits(train: Dataset, val: Dataset, test: Dataset,
                   num_classes: int) -> PreparedSplits:
    """One-hot the training/validation targets, keep test targets as ids."""
    def ids(ds):
        key = ds.labels if ds.labels is not None else ds.class_ids
        if key is None:
            raise ValueError("split has neither anomaly labels nor class ids")
        return np.asarray(key, dtype=np.int64)

    return PreparedSplits(
        x_train=train.features, t_train=one_hot(ids(train), num_classes),
        x_val=val.features, t_val=one_hot(ids(val), num_classes),
        x_test=test.features, y_test=ids(test),
        num_classes=num_classes,
    )


def init_population(cfg: GaConfig, topology: Topology,
                    rng=None) -> list:
    """Uniform [0, 1] genomes; conceptually a matrix with one row per
    individual and one column per weight/bias."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return [Individual(init_weights(topology, rng))
            for _ in range(cfg.population_size)]


def crossover(parent1, parent2, k: int, alpha: float):
    """Single-cut blend crossover.

    Genes before the cut (1-based positions 1..k-1) are copied from each
    infant's own parent; genes from the cut onward are blended
    own*alpha + other*(1-alpha).  The cut must satisfy 2 <= k <= n-1.
    """
    p1 = np.asarray(parent1, dtype=np.float64)
    p2 = np.asarray(parent2, dtype=np.float64)
    if p1.shape != p2.shape or p1.ndim != 1:
        raise ValueError("parents must be equal-length vectors")
    n = p1.size
    if not 2 <= k <= n - 1:
        raise ValueError(f"cut index {k} outside [2, {n - 1}]")
    infant1 = p1.copy()
    infant2 = p2.copy()
    infant1[k - 1:] = p1[k - 1:] * alpha + p2[k - 1:] * (1.0 - alpha)
    infant2[k - 1:] = p2[k - 1:] * alpha + p1[k - 1:] * (1.0 - alpha)
    return infant1, infant2


def apply_mutation(genome, j: int, magnitude: float,
                   direction_draw: float) -> np.ndarray:
    """Shift gene j by +-magnitude (sign from the direction draw) and clamp
    the result into [0, 1]."""
    out = np.array(genome, dtype=np.float64)
    step = -magnitude if direction_draw < 0.5 else magnitude
    out[j] = min(1.0, max(0.0, out[j] + step))
    return out


def mutate(genome: np.ndarray, cfg: GaConfig, rng) -> np.ndarray:
    """With probability ``mutation_rate`` mutate one uniformly chosen gene,
    otherwise return the genome unchanged."""
    if rng.random() >= cfg.mutation_rate:
        return genome
    j = int(rng.integers(genome.size))
    magnitude = rng.random()
    direction_draw = rng.random()
    return apply_mutation(genome, j, magnitude, direction_draw)


def _test_error_rate(pred, y_test, num_classes, metric):
    if metric == "per_class_mean":
        rates = []
        for c in np.unique(y_test):
            mask = y_test == c
            rates.append(float((pred[mask] != c).mean()))
        return float(np.mean(rates))
    return float((pred != y_test).mean())


def evaluate_fitness(individual: Individual, topology: Topology,
                     splits: PreparedSplits, tcfg: TrainingConfig,
                     metric: str = "overall") -> float:
    """Train from the genome and score the test split; cached on the
    individual.  A diverged training counts as the worst fitness, 1.0."""
    if individual.fitness is not None:
        return individual.fitness
    try:
        model = train_scg(individual.genome, topology,
                          splits.x_train, splits.t_train,
                          splits.x_val, splits.t_val, tcfg)
        pred = predict_batch(model, splits.x_test)
        fitness = _test_error_rate(pred, splits.y_test,
                                   splits.num_classes, metric)
    except TrainingDivergedError as exc:
        log.warning("training diverged during fitness evaluation: %s", exc)
        fitness = 1.0
    individual.fitness = fitness
    return fitness


def select(population: list, cfg: GaConfig, rng) -> list:
    """Parent pool: the best floor(rate*size) individuals deterministically,
    the remaining slots filled from the rest with probability proportional
    to 1/sqrt(rank) (rank 1 = best of the rest), without replacement."""
    order = sorted(range(len(population)),
                   key=lambda i: (population[i].fitness, i))
    ranked = [population[i] for i in order]
    n_keep = int(cfg.selection_rate * len(ranked))
    pool = ranked[:n_keep]
    rest = ranked[n_keep:]
    need = len(ranked) - n_keep
    if need and rest:
        weights = 1.0 / np.sqrt(np.arange(1, len(rest) + 1))
        weights /= weights.sum()
        chosen = rng.choice(len(rest), size=need, replace=False, p=weights)
        pool.extend(rest[int(i)] for i in chosen)
    return pool


def _pairs(pool):
    out = [(pool[i], pool[i + 1]) for i in range(0, len(pool) - 1, 2)]
    if len(pool) % 2:
        out.append((pool[-1], pool[0]))
    return out


def run_ga(cfg: GaConfig, topology: Topology, splits: PreparedSplits,
           tcfg: TrainingConfig) -> GaRun:
    """Evolve initial weights for up to ``cycles`` generations.

    Per cycle: evaluate everyone, stop if the goal error is reached, select
    a parent pool, pair adjacent pool members (an odd pool pairs its last
    member with the first), crossover at a random cut, mutate, and carry
    the best individual over unmodified.  Trained-fitness results are
    cached by genome so elites are not retrained.
    """
    rng = np.random.default_rng(cfg.seed)
    population = init_population(cfg, topology, rng)
    cache: dict[bytes, float] = {}
    evaluations = 0
    stats: list[CycleStats] = []
    stop = "cycles"

    def evaluate_all(pop):
        nonlocal evaluations
        todo = []
        for ind in pop:
            if ind.fitness is None:
                key = ind.genome.tobytes()
                if key in cache:
                    ind.fitness = cache[key]
                else:
                    todo.append((key, ind))
        if cfg.workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                futures = [pool.submit(evaluate_fitness, ind, topology,
                                       splits, tcfg, cfg.fitness_metric)
                           for _, ind in todo]
                for fut in futures:
                    fut.result()
        else:
            for _, ind in todo:
                evaluate_fitness(ind, topology, splits, tcfg,
                                 cfg.fitness_metric)
        for key, ind in todo:
            cache[key] = ind.fitness
        evaluations += len(todo)

    for cycle in range(1, cfg.cycles + 1):
        evaluate_all(population)
        fits = [ind.fitness for ind in population]
        best_idx = min(range(len(fits)), key=lambda i: (fits[i], i))
        best = population[best_idx]
        stats.append(CycleStats(cycle, best.fitness,
                                float(np.mean(fits))))
        log.info("cycle %d: best %.4f mean %.4f", cycle, best.fitness,
                 stats[-1].mean_fitness)
        if best.fitness <= cfg.goal:
            stop = "goal"
            break
        if cycle == cfg.cycles:
            break
        pool = select(population, cfg, rng)
        infants = []
        n = topology.genome_length
        for parent_a, parent_b in _pairs(pool):
            k = int(rng.integers(2, n))
            child_a, child_b = crossover(parent_a.genome, parent_b.genome,
                                         k, cfg.crossover_alpha)
            infants.append(Individual(mutate(child_a, cfg, rng)))
            infants.append(Individual(mutate(child_b, cfg, rng)))
        elite = Individual(best.genome.copy(), best.fitness)
        population = [elite] + infants[:cfg.population_size - 1]

    fits = [ind.fitness for ind in population]
    best_idx = min(range(len(fits)), key=lambda i: (fits[i], i))
    best = population[best_idx]
    best_model = train_scg(best.genome, topology, splits.x_train,
                           splits.t_train, splits.x_val, splits.t_val, tcfg)
    return GaRun(stats, best, best_model, stop, evaluations)


@dataclass
class ComparisonReport:
    nn_model: TrainedModel
    nn_confusion: ConfusionMatrix
    nn_error: float
    ga_run: GaRun
    ga_confusion: ConfusionMatrix
    ga_error: float


def compare(splits: PreparedSplits, topology: Topology,
            tcfg: TrainingConfig, ga_cfg: GaConfig,
            class_names=None) -> ComparisonReport:
    """Train a conventionally initialized MLP and a GA-enhanced one on the
    same frozen splits and report both confusion matrices and test errors.

    The conventional network draws its uniform [0, 1] initial weights from
    a substream of the GA seed so the two runs are independent but the
    whole comparison is reproducible from one seed.
    """
    nn_rng = np.random.default_rng([ga_cfg.seed, 1])
    nn_model = train_scg(init_weights(topology, nn_rng), topology,
                         splits.x_train, splits.t_train,
                         splits.x_val, splits.t_val, tcfg)
    nn_pred = predict_batch(nn_model, splits.x_test)
    nn_conf = confusion(splits.y_test, nn_pred, splits.num_classes,
                        class_names)

    ga_run = run_ga(ga_cfg, topology, splits, tcfg)
    ga_pred = predict_batch(ga_run.best_model, splits.x_test)
    ga_conf = confusion(splits.y_test, ga_pred, splits.num_classes,
                        class_names)

    return ComparisonReport(
        nn_model=nn_model, nn_confusion=nn_conf,
        nn_error=test_error(nn_conf),
        ga_run=ga_run, ga_confusion=ga_conf,
        ga_error=test_error(ga_conf),
    )
