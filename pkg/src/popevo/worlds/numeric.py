"""Numeric world: fitness is one coordinate, learnability is the other.

A genome is the pair (x, r). Fitness returns x unchanged; r only scales the
noise applied to x during mutation (step size 1.05**r), so present fitness
carries no information about a lineage's ability to improve.
"""
import numpy as np

PARAM_DIM = 2  # [x, r]
RADIUS_BASE = 1.05


class NumericWorld:
    kind = "numeric"
    param_dim = PARAM_DIM

    def initial_params(self) -> np.ndarray:
        return np.zeros(PARAM_DIM)

    def evaluate(self, params: np.ndarray) -> np.ndarray:
        return np.asarray(params[:, 0], dtype=float).copy()

    def mutate_batch(self, parent: np.ndarray, n: int, rng) -> np.ndarray:
        noise = rng.standard_normal((n, 2))
        children = np.tile(parent, (n, 1))
        children[:, 0] += noise[:, 0] * RADIUS_BASE ** parent[1]
        children[:, 1] += noise[:, 1]
        return children

    def pre_generation(self, generation: int, rng) -> None:
        pass  # fitness is translation-open; nothing to refresh

    def metrics_columns(self):
        return ["weighted_mean_x", "weighted_mean_r", "max_x"]

    def metrics_extras(self, params: np.ndarray, ratios: np.ndarray) -> dict:
        return {
            "weighted_mean_x": float(np.dot(params[:, 0], ratios)),
            "weighted_mean_r": float(np.dot(params[:, 1], ratios)),
            "max_x": float(params[:, 0].max()),
        }

    def params_to_json(self, params: np.ndarray) -> dict:
        return {"x": float(params[0]), "r": float(params[1])}

    def params_from_json(self, obj: dict) -> np.ndarray:
        return np.array([obj["x"], obj["r"]], dtype=float)

    def state_dict(self) -> dict:
        return {}

    @classmethod
    def from_config(cls, cfg: dict, master_seed: int) -> "NumericWorld":
        return cls()

    @classmethod
    def from_state_dict(cls, state: dict) -> "NumericWorld":
        return cls()
