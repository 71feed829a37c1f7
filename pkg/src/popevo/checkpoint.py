"""Checkpoint files: JSON snapshots of a population plus its world state.

Schema::

    {
      "world_kind": "squares",
      "generation": 1000,
      "world_state": { ...enough to rebuild the world exactly... },
      "genomes": [
        {"id": 0, "parent_id": null, "population": 0.5,
         "birth_generation": 0, ...world-specific parameter fields...},
        ...
      ]
    }

Files are written atomically (temp file, then rename) so an interrupted
run never leaves a truncated checkpoint behind. Loading renormalizes the
ratios only when they do not already sum to 1 within 1e-9, which keeps a
save -> load -> save round trip byte-identical.
"""
import json
import os

from .engine import GenomeRecord, PopulationState
from .worlds import WORLD_KINDS


def write_json_atomic(path, obj) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def write_text_atomic(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def checkpoint_dict(world, state: PopulationState) -> dict:
    genomes = []
    for g in state.genomes:
        entry = {
            "id": g.id,
            "parent_id": g.parent_id,
            "population": g.population,
            "birth_generation": g.birth_generation,
        }
        entry.update(world.params_to_json(g.params))
        genomes.append(entry)
    return {
        "world_kind": world.kind,
        "generation": state.generation,
        "world_state": world.state_dict(),
        "genomes": genomes,
    }


def save_checkpoint(path, world, state: PopulationState) -> None:
    write_json_atomic(path, checkpoint_dict(world, state))


def load_checkpoint(path):
    """Rebuild (world, population state) from a checkpoint file."""
    with open(path) as fh:
        obj = json.load(fh)
    kind = obj["world_kind"]
    if kind not in WORLD_KINDS:
        raise ValueError(f"unknown world kind {kind!r} in checkpoint")
    world = WORLD_KINDS[kind].from_state_dict(obj["world_state"])
    state = load_population(obj, world)
    return world, state


def load_population(obj: dict, world) -> PopulationState:
    """Parse the genome list against ``world``'s parameter schema."""
    genomes = []
    for entry in obj["genomes"]:
        extra = {k: v for k, v in entry.items()
                 if k not in ("id", "parent_id", "population", "birth_generation")}
        genomes.append(
            GenomeRecord(
                params=world.params_from_json(extra),
                population=float(entry["population"]),
                id=int(entry["id"]),
                parent_id=entry["parent_id"],
                birth_generation=int(entry.get("birth_generation", 0)),
            )
        )
    if not genomes:
        raise ValueError("checkpoint contains no genomes")
    total = sum(g.population for g in genomes)
    if abs(total - 1.0) > 1e-9:
        for g in genomes:
            g.population /= total
    return PopulationState(genomes=genomes, generation=int(obj["generation"]))
