"""Counter-based random streams.

Every random decision in a run draws from a stream keyed by
``(master_seed, purpose, generation, entity)``. Streams are independent
Philox generators, so mutation of one genome never consumes draws that
another genome depends on; results are identical no matter how genome
evaluation or mutation is scheduled.
"""
import numpy as np

# purpose tags
MUTATE = 1
WORLD_HOOK = 2
WORLD_INIT = 3

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix(*parts: int) -> int:
    h = 0
    for part in parts:
        h = _splitmix64(h ^ (int(part) & _MASK))
    return h


def stream(master_seed: int, purpose: int, generation: int = 0,
           entity: int = 0) -> np.random.Generator:
    """Dedicated generator for one (purpose, generation, entity) triple."""
    k0 = _mix(master_seed, purpose, generation, entity)
    k1 = _mix(k0, master_seed, generation, entity)
    key = np.array([k0, k1], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
