"""Modular gated policy network stored as a flat parameter vector.

Four layers: an input affine map, two hidden layers each made of three
parallel affine modules blended by a softmax over per-layer gate logits,
and a bounded affine output. tanh everywhere. Each of the six hidden
modules carries two log-scale mutation radii (one for weights, one for
biases), so a genome can tune where in the network its offspring vary.

Flat layout (layer-major, row-major within each block):
  W1 (H x obs), b1, [W2_m (H x H), b2_m for m in 0..2], g2 (3),
  [W3_m, b3_m for m in 0..2], g3 (3), W4 (act x H), b4, radii (12)
"""
from dataclasses import dataclass

import numpy as np

N_MODULES = 3
N_RADII = 12  # 6 modules x (weight scale, bias scale)
RADIUS_BASE = 1.05


@dataclass(frozen=True)
class PolicyLayout:
    obs_dim: int = 10
    hidden_dim: int = 32
    action_dim: int = 2

    def __post_init__(self):
        if min(self.obs_dim, self.hidden_dim, self.action_dim) < 1:
            raise ValueError("all dimensions must be positive")

    @property
    def slices(self):
        o, h, a = self.obs_dim, self.hidden_dim, self.action_dim
        pos = 0

        def take(n):
            nonlocal pos
            s = slice(pos, pos + n)
            pos += n
            return s

        sl = {"w1": take(h * o), "b1": take(h)}
        for layer in (2, 3):
            for m in range(N_MODULES):
                sl[f"w{layer}_{m}"] = take(h * h)
                sl[f"b{layer}_{m}"] = take(h)
            sl[f"g{layer}"] = take(N_MODULES)
        sl["w4"] = take(a * h)
        sl["b4"] = take(a)
        sl["radii"] = take(N_RADII)
        sl["total"] = pos
        return sl

    @property
    def n_params(self) -> int:
        return self.slices["total"]


def init_params(layout: PolicyLayout, rng) -> np.ndarray:
    """Weights ~ N(0, 1/sqrt(fan_in)); biases, gates and radii all zero."""
    o, h = layout.obs_dim, layout.hidden_dim
    sl = layout.slices
    params = np.zeros(layout.n_params)
    params[sl["w1"]] = rng.standard_normal(h * o) / np.sqrt(o)
    for layer in (2, 3):
        for m in range(N_MODULES):
            params[sl[f"w{layer}_{m}"]] = rng.standard_normal(h * h) / np.sqrt(h)
    params[sl["w4"]] = rng.standard_normal(layout.action_dim * h) / np.sqrt(h)
    return params


def _softmax(v):
    e = np.exp(v - v.max())
    return e / e.sum()


def forward(layout: PolicyLayout, params: np.ndarray, obs: np.ndarray) -> np.ndarray:
    """Deterministic policy output, each component in [-1, 1]."""
    obs = np.asarray(obs, dtype=float)
    if obs.shape != (layout.obs_dim,):
        raise ValueError(f"expected obs of shape ({layout.obs_dim},), got {obs.shape}")
    o, h, a = layout.obs_dim, layout.hidden_dim, layout.action_dim
    sl = layout.slices
    w1 = params[sl["w1"]].reshape(h, o)
    hidden = np.tanh(w1 @ obs + params[sl["b1"]])
    for layer in (2, 3):
        gates = _softmax(params[sl[f"g{layer}"]])
        pre = np.zeros(h)
        for m in range(N_MODULES):
            w = params[sl[f"w{layer}_{m}"]].reshape(h, h)
            pre += gates[m] * (w @ hidden + params[sl[f"b{layer}_{m}"]])
        hidden = np.tanh(pre)
    w4 = params[sl["w4"]].reshape(a, h)
    return np.tanh(w4 @ hidden + params[sl["b4"]])


def mutation_scales(layout: PolicyLayout, params: np.ndarray,
                    sigma_base: float, sigma_meta: float) -> np.ndarray:
    """Per-parameter noise stdev for one mutation of this genome.

    Module m's weights move at sigma_base * 1.05**radii[2m], its biases at
    sigma_base * 1.05**radii[2m+1]; everything else (input/output layers,
    gate logits) moves at sigma_base, and the radii themselves at sigma_meta.
    """
    sl = layout.slices
    scales = np.full(layout.n_params, sigma_base)
    radii = params[sl["radii"]]
    for layer, base in ((2, 0), (3, N_MODULES)):
        for m in range(N_MODULES):
            idx = 2 * (base + m)
            scales[sl[f"w{layer}_{m}"]] = sigma_base * RADIUS_BASE ** radii[idx]
            scales[sl[f"b{layer}_{m}"]] = sigma_base * RADIUS_BASE ** radii[idx + 1]
    scales[sl["radii"]] = sigma_meta
    return scales


def mutate_batch(layout: PolicyLayout, params: np.ndarray, n: int, rng,
                 sigma_base: float, sigma_meta: float) -> np.ndarray:
    scales = mutation_scales(layout, params, sigma_base, sigma_meta)
    return params + rng.standard_normal((n, layout.n_params)) * scales
