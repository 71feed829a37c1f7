"""Run configuration: strict JSON parsing with field-level errors.

Unknown keys are rejected everywhere so a typo like "mutaton_rate" fails
loudly instead of silently using a default. The fully resolved config
(defaults applied) is echoed next to the run outputs.
"""
import dataclasses
import json
import os

from .engine import EngineConfig
from .worlds import WORLD_KINDS
from .worlds.reacher import ReacherConfig
from .worlds.squares import SquaresConfig


class ConfigError(ValueError):
    pass


WORLD_CONFIG_TYPES = {
    "numeric": None,
    "squares": SquaresConfig,
    "reacher": ReacherConfig,
}

_ENGINE_KEYS = ("strategy", "decay_ratio", "offspring_count", "extinction_cutoff",
                "generations", "eval_workers")

OUTPUT_ROOT_ENV = "POPEVO_OUTPUT_ROOT"


@dataclasses.dataclass
class RunConfig:
    world_kind: str
    world_params: dict
    engine: dict
    seeds: list
    output_dir: str
    label: str = None

    def engine_config(self, seed: int) -> EngineConfig:
        return EngineConfig(master_seed=seed, **self.engine)

    def build_world(self, seed: int):
        return WORLD_KINDS[self.world_kind].from_config(self.world_params, seed)

    def resolved(self) -> dict:
        return {
            "world": {"kind": self.world_kind, **self.world_params},
            "engine": dict(self.engine),
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
            "label": self.label,
        }

    def resolve_output_dir(self) -> str:
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not os.path.isabs(self.output_dir):
            return os.path.join(root, self.output_dir)
        return self.output_dir


def _check_unknown(section: str, given: dict, allowed) -> None:
    unknown = set(given) - set(allowed)
    if unknown:
        raise ConfigError(
            f"{section}: unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _resolve_world(obj: dict):
    if "kind" not in obj:
        raise ConfigError("world: missing required key 'kind'")
    kind = obj["kind"]
    if kind not in WORLD_KINDS:
        raise ConfigError(f"world.kind: unknown world {kind!r}; "
                          f"choose from {sorted(WORLD_KINDS)}")
    params = {k: v for k, v in obj.items() if k != "kind"}
    cfg_type = WORLD_CONFIG_TYPES[kind]
    if cfg_type is None:
        _check_unknown("world", params, [])
        return kind, {}
    field_names = [f.name for f in dataclasses.fields(cfg_type)]
    _check_unknown("world", params, field_names)
    try:
        resolved = cfg_type(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"world: {exc}") from exc
    out = dataclasses.asdict(resolved)
    if kind == "reacher" and out.get("fixed_goal") is not None:
        out["fixed_goal"] = list(out["fixed_goal"])
    return kind, out


def _resolve_engine(obj: dict) -> dict:
    _check_unknown("engine", obj, _ENGINE_KEYS)
    try:
        cfg = EngineConfig(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"engine: {exc}") from exc
    return {k: getattr(cfg, k) for k in _ENGINE_KEYS}


def parse_config_dict(obj: dict) -> RunConfig:
    _check_unknown("config", obj, ("world", "engine", "seeds", "output_dir", "label"))
    for key in ("world", "seeds", "output_dir"):
        if key not in obj:
            raise ConfigError(f"config: missing required key {key!r}")
    kind, world_params = _resolve_world(obj["world"])
    engine = _resolve_engine(obj.get("engine", {}))
    seeds = obj["seeds"]
    if (not isinstance(seeds, list) or not seeds
            or not all(isinstance(s, int) for s in seeds)):
        raise ConfigError("seeds: must be a non-empty list of integers")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds: must be distinct")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise ConfigError("label: must be a string")
    return RunConfig(world_kind=kind, world_params=world_params, engine=engine,
                     seeds=list(seeds), output_dir=str(obj["output_dir"]),
                     label=label)


def parse_config(path) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config_dict(obj)
