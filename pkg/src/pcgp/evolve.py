"""Evolution loops: an elitist 1+lambda EA and a generational GA.

Both are deterministic given (params, seed), including under parallel
fitness evaluation: every child gets its own random stream derived from
(seed, generation, slot), so results never depend on scheduling order.
Budgets count fitness evaluations, not generations; copied individuals
(elites, unmodified tournament winners) are never re-evaluated.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .crossover import OPERATORS as CROSSOVER_OPERATORS
from .crossover import POSITIONAL_ONLY, apply_crossover
from .decode import DecodeSettings, decode
from .errors import ConfigError
from .functions import FunctionSet, default_functions
from .genome import Genome, GenomeMode, random_genome
from .mutate import MutationParams, apply_mutation

ALGORITHMS = ("one_plus_lambda", "ga")
FAILED_FITNESS = float("-inf")


@dataclass(frozen=True)
class EvoParams:
    mode: GenomeMode
    n_in: int
    n_out: int
    n_nodes: int                  # initial genome size
    mutation: MutationParams
    settings: DecodeSettings = DecodeSettings()
    functions: FunctionSet = field(default_factory=default_functions)
    algorithm: str = "one_plus_lambda"
    lambda_: int = 5              # offspring per 1+lambda generation
    population: int = 50
    elitism: float = 0.1
    crossover_fraction: float = 0.5
    mutation_fraction: float = 0.5
    crossover: str | None = None
    budget: int = 20000
    seed: int = 0
    workers: int = 1
    tournament_size: int = 3

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.lambda_ < 1:
            raise ConfigError("lambda must be at least 1")
        if self.population < 2:
            raise ConfigError("population must be at least 2")
        if self.budget < 1:
            raise ConfigError("budget must be positive")
        if self.n_nodes < 0 or self.n_in < 1 or self.n_out < 1:
            raise ConfigError("invalid genome shape")
        for name in ("elitism", "crossover_fraction", "mutation_fraction"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.crossover is not None and self.crossover not in CROSSOVER_OPERATORS:
            raise ConfigError(f"unknown crossover operator {self.crossover!r}")
        if self.mode is GenomeMode.CGP:
            if self.crossover in POSITIONAL_ONLY:
                raise ConfigError(
                    f"crossover {self.crossover!r} requires positional genomes")
            if self.mutation.operator == "mixed_subgraph":
                raise ConfigError("mixed_subgraph mutation requires positional genomes")
        if self.algorithm == "ga" and self.crossover is None and self.crossover_fraction > 0:
            raise ConfigError("GA with a crossover share needs a crossover operator")


@dataclass(frozen=True)
class RunRecord:
    generation: int
    evaluations: int
    best_fitness: float
    mean_fitness: float
    best_active_nodes: int


def evaluate_population(genomes, fit, workers: int = 1, isolate: bool = True):
    """Fitness of each genome, order preserved.

    With isolate, an individual's failure becomes a worst-fitness
    sentinel plus a warning instead of aborting the whole batch.
    """
    genomes = list(genomes)
    if not genomes:
        return []

    def call(g):
        if not isolate:
            return float(fit(g))
        try:
            return float(fit(g))
        except Exception as e:  # noqa: BLE001 - isolation is the contract
            warnings.warn(f"fitness evaluation failed ({e!r}); using sentinel")
            return FAILED_FITNESS

    if workers <= 1:
        return [call(g) for g in genomes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(call, genomes))


def _stream(seed: int, generation: int, slot: int) -> np.random.Generator:
    return np.random.default_rng([seed, generation, slot])


def _base_seed(params: EvoParams, rng) -> int:
    if rng is None:
        return params.seed
    return int(rng.integers(0, 2**63 - 1))


def _evaluate(genomes, fit, params, generation, evaluations):
    try:
        return evaluate_population(genomes, fit, params.workers, isolate=False)
    except Exception as e:
        raise RuntimeError(
            f"fitness evaluation failed in generation {generation} "
            f"after {evaluations} evaluations") from e


def _active_count(g: Genome, params: EvoParams) -> int:
    return int(decode(g, params.settings, params.functions).active.sum())


def one_plus_lambda(fit, params: EvoParams, rng=None, on_record=None):
    """Elitist single-parent EA with neutral drift.

    Offspring replace the parent when at least as fit.  Returns the
    final parent and one RunRecord per generation.
    """
    if params.budget < params.lambda_ + 1:
        raise ConfigError("budget must cover the initial parent plus one generation")
    base = _base_seed(params, rng)
    parent = random_genome(params.mode, params.n_in, params.n_out, params.n_nodes,
                           _stream(base, 0, 0))
    parent_fit = _evaluate([parent], fit, params, 0, 0)[0]
    evaluations = 1
    generation = 0
    active = _active_count(parent, params)
    log = []
    while evaluations < params.budget:
        generation += 1
        children = [
            apply_mutation(parent, params.mutation, params.settings, params.functions,
                           _stream(base, generation, slot))
            for slot in range(params.lambda_)
        ]
        fits = _evaluate(children, fit, params, generation, evaluations)
        evaluations += params.lambda_
        best = int(np.argmax(fits))
        mean = float(np.mean(fits + [parent_fit]))
        if fits[best] >= parent_fit:
            parent, parent_fit = children[best], fits[best]
            active = _active_count(parent, params)
        record = RunRecord(generation, evaluations, parent_fit, mean, active)
        log.append(record)
        if on_record is not None:
            on_record(record)
    return parent, log


def _tournament(fits: np.ndarray, size: int, rng) -> int:
    idx = rng.integers(0, fits.shape[0], size)
    vals = fits[idx]
    tied = np.unique(idx[vals == vals.max()])
    return int(rng.choice(tied))


def _channel_sizes(params: EvoParams):
    """Elite/crossover/mutation/copy slot counts for one GA generation.

    Rounded shares can overshoot the population; mutation gives way
    first, then crossover.  Whatever remains is filled with unmodified
    tournament winners.
    """
    pop = params.population
    elites = min(pop, round(params.elitism * pop))
    crossed = round(params.crossover_fraction * pop)
    mutated = round(params.mutation_fraction * pop)
    if elites + crossed + mutated > pop:
        mutated = max(0, pop - elites - crossed)
    if elites + crossed > pop:
        crossed = max(0, pop - elites)
    return elites, crossed, mutated, pop - elites - crossed - mutated


def ga(fit, params: EvoParams, rng=None, on_record=None):
    """Generational GA with elitism, crossover and mutation shares.

    Slots are filled elites first, then crossover children from pairs of
    distinct tournament winners, then mutants of tournament winners,
    then plain copies; only newly created individuals cost evaluations.
    """
    if params.budget < params.population:
        raise ConfigError("budget must cover the initial population")
    base = _base_seed(params, rng)
    pop = [
        random_genome(params.mode, params.n_in, params.n_out, params.n_nodes,
                      _stream(base, 0, slot))
        for slot in range(params.population)
    ]
    fits = np.array(_evaluate(pop, fit, params, 0, 0), dtype=float)
    evaluations = params.population
    best_idx = int(np.argmax(fits))
    best, best_fit = pop[best_idx], float(fits[best_idx])
    best_active = _active_count(best, params)
    generation = 0
    log = []
    bounds = params.mutation.bounds
    while evaluations < params.budget:
        generation += 1
        elites, crossed, mutated, copied = _channel_sizes(params)
        order = np.argsort(-fits, kind="stable")
        next_pop = [pop[i] for i in order[:elites]]
        next_fits = [float(fits[i]) for i in order[:elites]]
        fresh = []
        for k in range(crossed):
            slot_rng = _stream(base, generation, elites + k)
            first = _tournament(fits, params.tournament_size, slot_rng)
            second = first
            for _ in range(100):
                second = _tournament(fits, params.tournament_size, slot_rng)
                if second != first:
                    break
            fresh.append(apply_crossover(pop[first], pop[second], params.crossover,
                                         params.settings, params.functions,
                                         slot_rng, bounds))
        for k in range(mutated):
            slot_rng = _stream(base, generation, elites + crossed + k)
            winner = _tournament(fits, params.tournament_size, slot_rng)
            fresh.append(apply_mutation(pop[winner], params.mutation, params.settings,
                                        params.functions, slot_rng))
        fresh_fits = _evaluate(fresh, fit, params, generation, evaluations)
        evaluations += len(fresh)
        next_pop += fresh
        next_fits += fresh_fits
        for k in range(copied):
            slot_rng = _stream(base, generation, elites + crossed + mutated + k)
            winner = _tournament(fits, params.tournament_size, slot_rng)
            next_pop.append(pop[winner])
            next_fits.append(float(fits[winner]))
        pop, fits = next_pop, np.array(next_fits, dtype=float)
        gen_best = int(np.argmax(fits))
        if fits[gen_best] >= best_fit:
            best, best_fit = pop[gen_best], float(fits[gen_best])
            best_active = _active_count(best, params)
        record = RunRecord(generation, evaluations, best_fit,
                           float(fits.mean()), best_active)
        log.append(record)
        if on_record is not None:
            on_record(record)
    return best, log


def run_evolution(fit, params: EvoParams, rng=None, on_record=None):
    """Dispatch to the configured algorithm."""
    if params.algorithm == "ga":
        return ga(fit, params, rng, on_record)
    return one_plus_lambda(fit, params, rng, on_record)
