"""Square-lattice fitness world.

Fitness squares sit on a triangular lattice (row pitch spacing*sqrt(3)/2,
odd rows offset by spacing/2) so every interior square has six neighbors at
exactly one spacing. Inside a square fitness equals that square's value;
everywhere else it is zero. In the standard world values are drawn uniform
over [0.3, 1.0] and periodically shuffled between squares; in the hard
variant squares are worth 0.3 except a 10% sprinkling of 1.0 squares
restricted to the region outside ``outer_radius`` of the grid center.

A genome is (x, y, 16 radius logits). A child is placed ``k`` units away in
a uniformly random direction, where the radius index k is sampled from
softmax(logits); index 0 reproduces in place.
"""
from dataclasses import dataclass

import numpy as np

from .._numba import NUMBA_ENABLED, njit

PARAM_DIM = 18  # [x, y, logits x16]
N_RADII = 16


@dataclass
class SquaresConfig:
    spacing: float = 9.5
    half_width: float = 1.5
    bounds: float = 256.0
    mode: str = "standard"  # or "hard"
    shuffle_period: int = 10  # None: landscape never changes
    outer_radius: float = 47.5
    high_prob: float = 0.1
    low_value: float = 0.3
    sigma_logits: float = 0.1

    def __post_init__(self):
        if self.spacing <= 2 * self.half_width:
            raise ValueError("spacing must exceed twice the square half-width")
        if self.mode not in ("standard", "hard"):
            raise ValueError(f"mode must be 'standard' or 'hard', got {self.mode!r}")
        if self.shuffle_period is not None and self.shuffle_period < 1:
            raise ValueError("shuffle_period must be >= 1 or null")


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class Lattice:
    """Triangular lattice of axis-aligned squares clipped to the bounds."""

    def __init__(self, spacing, half_width, bounds):
        self.spacing = float(spacing)
        self.half_width = float(half_width)
        self.bounds = float(bounds)
        self.pitch = self.spacing * np.sqrt(3.0) / 2.0
        lo, hi = self.half_width, self.bounds - self.half_width

        ys, row_x0, row_ncols = [], [], []
        y = self.spacing / 2.0
        r = 0
        while y <= hi:
            x0 = self.spacing / 2.0 + (self.spacing / 2.0 if r % 2 else 0.0)
            ncols = int((hi - x0) // self.spacing) + 1 if x0 <= hi else 0
            if ncols > 0:
                ys.append(y)
                row_x0.append(x0)
                row_ncols.append(ncols)
            y += self.pitch
            r += 1

        self.row_y = np.array(ys)
        self.row_x0 = np.array(row_x0)
        self.row_ncols = np.array(row_ncols, dtype=np.int64)
        self.row_start = np.concatenate(([0], np.cumsum(self.row_ncols)[:-1]))
        self.n_squares = int(self.row_ncols.sum())
        if self.n_squares < 7:
            raise ValueError(
                f"lattice parameters yield only {self.n_squares} squares; need >= 7"
            )
        cx, cy = [], []
        for i in range(len(self.row_y)):
            xs = self.row_x0[i] + self.spacing * np.arange(self.row_ncols[i])
            cx.append(xs)
            cy.append(np.full(len(xs), self.row_y[i]))
        self.cx = np.concatenate(cx)
        self.cy = np.concatenate(cy)

    def locate(self, x, y):
        """Index of the square containing each point, -1 where none."""
        args = (
            np.asarray(x, dtype=float), np.asarray(y, dtype=float),
            self.row_y[0], self.pitch, len(self.row_y),
            self.row_x0, self.row_ncols, self.row_start, self.spacing,
            self.cx, self.cy, self.half_width,
        )
        if NUMBA_ENABLED:
            return _locate_jit(*args)
        return _locate_numpy(*args)


def _locate_numpy(x, y, y0, pitch, nrows, row_x0, row_ncols, row_start,
                  spacing, cx, cy, half_width):
    r = np.rint((y - y0) / pitch).astype(np.int64)
    ok = (r >= 0) & (r < nrows)
    rc = np.clip(r, 0, nrows - 1)
    c = np.rint((x - row_x0[rc]) / spacing).astype(np.int64)
    ok &= (c >= 0) & (c < row_ncols[rc])
    cc = np.clip(c, 0, row_ncols[rc] - 1)
    idx = row_start[rc] + cc
    ok &= (np.abs(x - cx[idx]) <= half_width) & (np.abs(y - cy[idx]) <= half_width)
    return np.where(ok, idx, -1)


@njit(cache=True)
def _locate_loops(x, y, y0, pitch, nrows, row_x0, row_ncols, row_start,
                  spacing, cx, cy, half_width):
    n = x.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        r = int(np.rint((y[i] - y0) / pitch))
        if r < 0 or r >= nrows:
            continue
        c = int(np.rint((x[i] - row_x0[r]) / spacing))
        if c < 0 or c >= row_ncols[r]:
            continue
        j = row_start[r] + c
        if abs(x[i] - cx[j]) <= half_width and abs(y[i] - cy[j]) <= half_width:
            out[i] = j
    return out


_locate_jit = _locate_loops  # compiled when numba is enabled


class SquaresWorld:
    kind = "squares"
    param_dim = PARAM_DIM

    def __init__(self, config: SquaresConfig, values: np.ndarray):
        self.config = config
        self.lattice = Lattice(config.spacing, config.half_width, config.bounds)
        values = np.asarray(values, dtype=float)
        if values.shape != (self.lattice.n_squares,):
            raise ValueError(
                f"expected {self.lattice.n_squares} square values, got {values.shape}"
            )
        self.values = values

    # construction -----------------------------------------------------

    @classmethod
    def build(cls, config: SquaresConfig, rng) -> "SquaresWorld":
        """Draw square values: uniform [0.3, 1] or the hard high/low rule."""
        lattice = Lattice(config.spacing, config.half_width, config.bounds)
        if config.mode == "hard":
            center = config.bounds / 2.0
            d = np.hypot(lattice.cx - center, lattice.cy - center)
            high = (d > config.outer_radius) & (rng.random(lattice.n_squares)
                                                < config.high_prob)
            values = np.where(high, 1.0, config.low_value)
        else:
            values = rng.uniform(config.low_value, 1.0, lattice.n_squares)
        return cls(config, values)

    @classmethod
    def from_config(cls, cfg: dict, master_seed: int) -> "SquaresWorld":
        from .. import rng as streams

        config = SquaresConfig(**cfg)
        return cls.build(config, streams.stream(master_seed, streams.WORLD_INIT))

    # world protocol ----------------------------------------------------

    def initial_params(self) -> np.ndarray:
        center = self.config.bounds / 2.0
        i = int(np.argmin(np.hypot(self.lattice.cx - center,
                                   self.lattice.cy - center)))
        params = np.zeros(PARAM_DIM)
        params[0] = self.lattice.cx[i]
        params[1] = self.lattice.cy[i]
        return params

    def evaluate(self, params: np.ndarray) -> np.ndarray:
        idx = self.lattice.locate(params[:, 0], params[:, 1])
        return np.where(idx >= 0, self.values[np.maximum(idx, 0)], 0.0)

    def mutate_batch(self, parent: np.ndarray, n: int, rng) -> np.ndarray:
        probs = _softmax(parent[2:])
        u = rng.random(n)
        k = np.minimum(np.searchsorted(np.cumsum(probs), u, side="right"),
                       N_RADII - 1)
        theta = rng.random(n) * 2.0 * np.pi
        children = np.tile(parent, (n, 1))
        children[:, 0] += k * np.cos(theta)
        children[:, 1] += k * np.sin(theta)
        children[:, 2:] += rng.standard_normal((n, N_RADII)) * self.config.sigma_logits
        return children

    def pre_generation(self, generation: int, rng) -> None:
        period = self.config.shuffle_period
        if period is not None and generation % period == 0:
            self.shuffle_values(rng)

    def shuffle_values(self, rng) -> None:
        """Permute values across squares; positions and multiset unchanged."""
        self.values = self.values[rng.permutation(self.lattice.n_squares)]

    def metrics_columns(self):
        return [f"p{k}" for k in range(N_RADII)]

    def metrics_extras(self, params: np.ndarray, ratios: np.ndarray) -> dict:
        mass = ratios @ _softmax(params[:, 2:])
        return {f"p{k}": float(mass[k]) for k in range(N_RADII)}

    # serialization -----------------------------------------------------

    def params_to_json(self, params: np.ndarray) -> dict:
        return {
            "x": float(params[0]),
            "y": float(params[1]),
            "radius_logits": [float(v) for v in params[2:]],
        }

    def params_from_json(self, obj: dict) -> np.ndarray:
        return np.concatenate(([obj["x"], obj["y"]],
                               np.asarray(obj["radius_logits"], dtype=float)))

    def state_dict(self) -> dict:
        cfg = self.config
        return {
            "spacing": cfg.spacing,
            "half_width": cfg.half_width,
            "bounds": cfg.bounds,
            "mode": cfg.mode,
            "shuffle_period": cfg.shuffle_period,
            "outer_radius": cfg.outer_radius,
            "high_prob": cfg.high_prob,
            "low_value": cfg.low_value,
            "sigma_logits": cfg.sigma_logits,
            "values": [float(v) for v in self.values],
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "SquaresWorld":
        state = dict(state)
        values = state.pop("values")
        return cls(SquaresConfig(**state), np.asarray(values, dtype=float))
