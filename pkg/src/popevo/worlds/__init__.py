"""Worlds: fitness landscapes plus their genome mutation rules.

A world exposes:
  * ``kind``            -- short string identifying the world family
  * ``initial_params()``-- founder genome parameters (1-D float array)
  * ``evaluate(P)``     -- fitness for each row of an (n, dim) matrix
  * ``mutate_batch(parent, n, rng)`` -- (n, dim) children of one parent
  * ``pre_generation(gen, rng)``     -- per-generation hook (shuffle, goal)
  * ``metrics_columns()`` / ``metrics_extras(P, ratios)``
  * ``state_dict()``    -- JSON-serializable world state for checkpoints
"""
from .numeric import NumericWorld
from .squares import SquaresWorld
from .reacher import ReacherWorld

WORLD_KINDS = {
    "numeric": NumericWorld,
    "squares": SquaresWorld,
    "reacher": ReacherWorld,
}

__all__ = ["NumericWorld", "SquaresWorld", "ReacherWorld", "WORLD_KINDS"]
