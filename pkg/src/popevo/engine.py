"""Generation loop: rank, decay, cull, reproduce.

A population is a set of genomes each holding a share ("population ratio")
of one unit of total mass. Each generation:

  1. the world's per-generation hook fires (landscape shuffle, goal change),
  2. every genome is evaluated and given a fractional fitness rank,
  3. each ratio is multiplied by (1 - decay_ratio) * rank; the destroyed
     mass is what funds this generation's offspring,
  4. genomes whose share of the decayed mass falls below the extinction
     cutoff are removed (the top-ranked genome is always kept),
  5. each survivor gets floor(share * offspring_count) offspring; children
     join at ratio 1/offspring_count and the whole collection is
     renormalized to sum 1.

Selection strategies:
  * ``population_based``: the full loop above.
  * ``single_genome``: only the argmax-fitness genome survives, at ratio
    1.0, and receives the entire offspring budget.
  * ``random_drift``: every genome is ranked 1.0; otherwise identical to
    ``population_based``.

Mutation draws come from per-parent streams keyed by
(master_seed, generation, parent id), so results are independent of
evaluation order and worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import rankdata

from . import rng as streams
from .metrics import MetricsRow, lineage_entropy, weighted_mean

STRATEGIES = ("population_based", "single_genome", "random_drift")


class EvaluationError(RuntimeError):
    """A world failed to produce a finite fitness for a genome."""

    def __init__(self, genome_id: int, value: float):
        self.genome_id = genome_id
        self.value = value
        super().__init__(
            f"non-finite fitness {value!r} for genome id {genome_id}; "
            "the world's fitness function is broken"
        )


@dataclass
class EngineConfig:
    decay_ratio: float = 0.25
    offspring_count: int = 1000
    extinction_cutoff: float = None  # default 1/offspring_count
    strategy: str = "population_based"
    generations: int = 500
    master_seed: int = 0
    eval_workers: int = 1

    def __post_init__(self):
        if self.extinction_cutoff is None:
            self.extinction_cutoff = 1.0 / self.offspring_count
        if not 0.0 <= self.decay_ratio < 1.0:
            raise ValueError(f"decay_ratio must be in [0, 1), got {self.decay_ratio}")
        if self.offspring_count < 1:
            raise ValueError(f"offspring_count must be >= 1, got {self.offspring_count}")
        if not 0.0 < self.extinction_cutoff < 1.0:
            raise ValueError(
                f"extinction_cutoff must be in (0, 1), got {self.extinction_cutoff}"
            )
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")
        if self.eval_workers < 1:
            raise ValueError(f"eval_workers must be >= 1, got {self.eval_workers}")


@dataclass
class GenomeRecord:
    params: np.ndarray
    population: float
    id: int
    parent_id: int = None
    birth_generation: int = 0


@dataclass
class PopulationState:
    genomes: list
    generation: int = 0
    next_id: int = None

    def __post_init__(self):
        if self.next_id is None:
            self.next_id = max((g.id for g in self.genomes), default=-1) + 1

    def ratios(self) -> np.ndarray:
        return np.array([g.population for g in self.genomes], dtype=float)

    def params_matrix(self) -> np.ndarray:
        return np.stack([g.params for g in self.genomes])


def initial_state(world) -> PopulationState:
    """One founder genome at ratio 1.0."""
    founder = GenomeRecord(params=world.initial_params(), population=1.0, id=0)
    return PopulationState(genomes=[founder], generation=0, next_id=1)


def rank_fitness(fitnesses) -> np.ndarray:
    """Fractional ranks in (0, 1]: ascending (position+1)/n, ties averaged."""
    f = np.asarray(fitnesses, dtype=float)
    if f.size == 0:
        raise ValueError("cannot rank an empty fitness list")
    if not np.all(np.isfinite(f)):
        bad = int(np.flatnonzero(~np.isfinite(f))[0])
        raise ValueError(f"non-finite fitness at position {bad}: {f[bad]!r}")
    return rankdata(f, method="average") / f.size


def _decay_cull(ratios, ranks, decay_ratio, cutoff):
    """Shared decay/cull arithmetic.

    Returns (kept indices, raw decayed mass of survivors, normalized
    post-cull shares). The cutoff is applied to each genome's share of the
    decayed mass; the top-ranked genome is never removed.
    """
    raw = ratios * (1.0 - decay_ratio) * ranks
    total = raw.sum()
    if total <= 0.0:
        # all ranks zero cannot happen (ranks > 0); guard anyway
        raise ValueError("population mass vanished during decay")
    share = raw / total
    keep = share >= cutoff
    keep[int(np.argmax(ranks))] = True
    idx = np.flatnonzero(keep)
    survivors = share[idx]
    return idx, raw[idx], survivors / survivors.sum()


def apply_decay(state: PopulationState, ranks, decay_ratio: float,
                cutoff: float) -> PopulationState:
    """Decay each ratio by (1-D)*rank, cull below-cutoff genomes, renormalize."""
    ranks = np.asarray(ranks, dtype=float)
    if len(ranks) != len(state.genomes):
        raise ValueError("ranks not aligned with genomes")
    idx, _, shares = _decay_cull(state.ratios(), ranks, decay_ratio, cutoff)
    genomes = [
        replace(state.genomes[i], population=float(s))
        for i, s in zip(idx, shares)
    ]
    return PopulationState(genomes=genomes, generation=state.generation,
                           next_id=state.next_id)


def allocate_offspring(state: PopulationState, offspring_count: int) -> list[int]:
    """floor(ratio * C) per genome; the total never exceeds C."""
    ratios = state.ratios()
    return [int(np.floor(r * offspring_count)) for r in ratios]


def _evaluate(world, params, workers: int) -> np.ndarray:
    if workers <= 1 or len(params) < 2 * workers:
        return np.asarray(world.evaluate(params), dtype=float)
    chunks = np.array_split(params, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(world.evaluate, chunks))
    return np.concatenate([np.asarray(r, dtype=float) for r in results])


def _metrics_row(world, config, state, ratios, fitnesses) -> MetricsRow:
    extras = world.metrics_extras(state.params_matrix(), ratios)
    return MetricsRow(
        generation=state.generation,
        strategy=config.strategy,
        seed=config.master_seed,
        num_genomes=len(state.genomes),
        weighted_mean_fitness=weighted_mean(fitnesses, ratios),
        max_fitness=float(np.max(fitnesses)),
        lineage_entropy=lineage_entropy(ratios),
        extras=extras,
    )


def step_generation(state: PopulationState, world, config: EngineConfig):
    """Advance one generation; returns (next state, metrics row)."""
    gen = state.generation
    world.pre_generation(gen, streams.stream(config.master_seed, streams.WORLD_HOOK, gen))

    ratios = state.ratios()
    ratios = ratios / ratios.sum()
    fitnesses = _evaluate(world, state.params_matrix(), config.eval_workers)
    for i, f in enumerate(fitnesses):
        if not np.isfinite(f):
            raise EvaluationError(state.genomes[i].id, float(f))
    row = _metrics_row(world, config, state, ratios, fitnesses)

    if config.strategy == "single_genome":
        best = int(np.argmax(fitnesses))
        survivors = [replace(state.genomes[best], population=1.0)]
        raw_mass = np.array([1.0])
        counts = np.array([config.offspring_count])
    else:
        if config.strategy == "random_drift":
            ranks = np.ones(len(fitnesses))
        else:
            ranks = rank_fitness(fitnesses)
        idx, raw_mass, shares = _decay_cull(
            ratios, ranks, config.decay_ratio, config.extinction_cutoff
        )
        survivors = [state.genomes[i] for i in idx]
        counts = np.floor(shares * config.offspring_count).astype(int)
        if counts.sum() == 0:
            # a generation always produces at least one offspring, else a
            # fully tied population below 1/C would freeze forever
            counts[int(np.argmax(shares))] = 1

    child_ratio = 1.0 / config.offspring_count
    next_id = state.next_id
    genomes = list(survivors)
    masses = [raw_mass]
    for parent, n in zip(survivors, counts):
        if n == 0:
            continue
        mut_rng = streams.stream(config.master_seed, streams.MUTATE, gen, parent.id)
        children = world.mutate_batch(parent.params, int(n), mut_rng)
        for k in range(int(n)):
            genomes.append(
                GenomeRecord(
                    params=children[k],
                    population=child_ratio,
                    id=next_id,
                    parent_id=parent.id,
                    birth_generation=gen + 1,
                )
            )
            next_id += 1
        masses.append(np.full(int(n), child_ratio))

    mass = np.concatenate(masses)
    mass = mass / mass.sum()
    genomes = [replace(g, population=float(m)) for g, m in zip(genomes, mass)]
    next_state = PopulationState(genomes=genomes, generation=gen + 1, next_id=next_id)
    return next_state, row


def run(config: EngineConfig, world, initial: PopulationState = None):
    """Run N generations; returns (metrics history, final state)."""
    state = initial if initial is not None else initial_state(world)
    history = []
    for _ in range(config.generations):
        state, row = step_generation(state, world, config)
        history.append(row)
    return history, state
