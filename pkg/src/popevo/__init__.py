"""popevo: a seedable population-ratio evolution engine and experiment harness.

Genomes hold a continuous share of one unit of population mass. Each
generation ranks genomes by fitness, decays shares by (1-D)*rank, culls
shares below an extinction cutoff, and spends the decayed mass on offspring
allocated proportionally to the surviving shares. Three selection
strategies (population_based, single_genome, random_drift) run over three
worlds: a numeric line, a shuffled square lattice, and a two-link planar
arm controlled by a modular gated policy network.
"""
from .engine import (EngineConfig, EvaluationError, GenomeRecord,
                     PopulationState, allocate_offspring, apply_decay,
                     initial_state, rank_fitness, run, step_generation)
from .metrics import (MetricsRow, lineage_entropy, polyfit_gain, spearman,
                      weighted_mean)
from .worlds import NumericWorld, ReacherWorld, SquaresWorld, WORLD_KINDS

__version__ = "0.1.0"

__all__ = [
    "EngineConfig", "EvaluationError", "GenomeRecord", "PopulationState",
    "allocate_offspring", "apply_decay", "initial_state", "rank_fitness",
    "run", "step_generation",
    "MetricsRow", "lineage_entropy", "polyfit_gain", "spearman", "weighted_mean",
    "NumericWorld", "SquaresWorld", "ReacherWorld", "WORLD_KINDS",
    "__version__",
]
