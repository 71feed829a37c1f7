"""Two-link planar arm control world.

Each joint integrates a damped first-order model under bounded torque:
``omega += (tau - damping*omega) * dt / inertia`` followed by
``theta += omega * dt`` with angles wrapped to (-pi, pi]. An episode resets
the arm to rest, runs ``frames`` control steps of the policy network, and
scores the negated sum of fingertip-to-goal distances, so 0 is a perfect
score and every fitness is <= 0.

Goals are drawn uniformly from the annulus between 20% and 90% of full
reach. The per-generation hook resamples the goal every ``goal_period``
generations; with ``goal_period`` null the goal is fixed for the whole run
(the static-environment variant).

Rollouts are embarrassingly parallel across genomes: the hot path is a
numba kernel (``prange`` over genomes); without numba a numpy fallback
steps all genomes in lockstep, one vectorized frame at a time.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .._numba import NUMBA_ENABLED, njit, prange
from . import policy

NONFINITE_FITNESS = -1e18
OBS_DIM = 10
ACTION_DIM = 2


@dataclass
class ReacherConfig:
    link1: float = 0.5
    link2: float = 0.5
    damping: float = 0.1
    inertia: float = 1.0
    dt: float = 0.05
    frames: int = 50
    goal_period: int = 50  # None: goal fixed for the whole run
    torque_bound: float = 1.0
    goal_radius_lo: float = 0.2  # fractions of full reach
    goal_radius_hi: float = 0.9
    hidden_dim: int = 32
    sigma_base: float = 0.02
    sigma_meta: float = 0.5
    fixed_goal: tuple = None

    def __post_init__(self):
        for name in ("link1", "link2", "damping", "inertia", "dt", "frames",
                     "torque_bound", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.goal_period is not None and self.goal_period < 1:
            raise ValueError("goal_period must be >= 1 or null")
        if not 0 < self.goal_radius_lo < self.goal_radius_hi:
            raise ValueError("goal annulus fractions must satisfy 0 < lo < hi")

    @property
    def reach(self) -> float:
        return self.link1 + self.link2


@dataclass
class ArmState:
    theta1: float = 0.0
    theta2: float = 0.0
    omega1: float = 0.0
    omega2: float = 0.0


def wrap_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    t = math.fmod(theta + math.pi, 2.0 * math.pi)
    if t <= 0.0:
        t += 2.0 * math.pi
    return t - math.pi


def step_dynamics(state: ArmState, torques, cfg: ReacherConfig) -> ArmState:
    """One Euler step of the damped joint model; input torques are bounded."""
    t1, t2 = float(torques[0]), float(torques[1])
    if max(abs(t1), abs(t2)) > cfg.torque_bound + 1e-12:
        raise ValueError("torque exceeds the configured bound")
    scale = cfg.dt / cfg.inertia
    w1 = state.omega1 + (t1 - cfg.damping * state.omega1) * scale
    w2 = state.omega2 + (t2 - cfg.damping * state.omega2) * scale
    return ArmState(
        theta1=wrap_angle(state.theta1 + w1 * cfg.dt),
        theta2=wrap_angle(state.theta2 + w2 * cfg.dt),
        omega1=w1,
        omega2=w2,
    )


def fingertip(state: ArmState, cfg: ReacherConfig):
    x = cfg.link1 * math.cos(state.theta1) + cfg.link2 * math.cos(state.theta1 + state.theta2)
    y = cfg.link1 * math.sin(state.theta1) + cfg.link2 * math.sin(state.theta1 + state.theta2)
    return x, y


def observe(state: ArmState, goal, cfg: ReacherConfig) -> np.ndarray:
    """10-entry observation: joint cos/sin, velocities, goal, tip offset."""
    tx, ty = fingertip(state, cfg)
    return np.array([
        math.cos(state.theta1), math.sin(state.theta1),
        math.cos(state.theta2), math.sin(state.theta2),
        state.omega1, state.omega2,
        goal[0], goal[1],
        tx - goal[0], ty - goal[1],
    ])


def sample_goal(rng, cfg: ReacherConfig):
    """Uniform over the annulus between the configured reach fractions."""
    r_lo = cfg.goal_radius_lo * cfg.reach
    r_hi = cfg.goal_radius_hi * cfg.reach
    u = rng.random()
    phi = rng.random() * 2.0 * math.pi
    r = math.sqrt(r_lo**2 + u * (r_hi**2 - r_lo**2))
    return (r * math.cos(phi), r * math.sin(phi))


def rollout(layout: policy.PolicyLayout, params: np.ndarray, goal,
            cfg: ReacherConfig) -> float:
    """Episode fitness for one genome (reference implementation)."""
    state = ArmState()
    total = 0.0
    for _ in range(cfg.frames):
        obs = observe(state, goal, cfg)
        action = policy.forward(layout, params, obs)
        state = step_dynamics(state, action * cfg.torque_bound, cfg)
        tx, ty = fingertip(state, cfg)
        total -= math.hypot(tx - goal[0], ty - goal[1])
    if not math.isfinite(total):
        return NONFINITE_FITNESS
    return total


# --- batched rollouts -----------------------------------------------------

@njit(parallel=True, cache=True)
def _rollout_batch_jit(P, h, obs_dim, act_dim, o_w1, o_b1, o_w2, o_b2, o_g2,
                       o_w3, o_b3, o_g3, o_w4, o_b4, l1, l2, damping, inertia,
                       dt, frames, torque_bound, gx, gy, sentinel):
    n = P.shape[0]
    out = np.empty(n)
    for i in prange(n):
        p = P[i]
        # gates are constant over an episode: blend each layer's modules once
        w2 = np.empty((h, h))
        b2 = np.empty(h)
        w3 = np.empty((h, h))
        b3 = np.empty(h)
        stride = h * h + h  # one module's weight block plus its bias block
        for layer in range(2):
            og = o_g2 if layer == 0 else o_g3
            ow = o_w2 if layer == 0 else o_w3
            ob = o_b2 if layer == 0 else o_b3
            gmax = max(p[og], max(p[og + 1], p[og + 2]))
            e0 = math.exp(p[og] - gmax)
            e1 = math.exp(p[og + 1] - gmax)
            e2 = math.exp(p[og + 2] - gmax)
            es = e0 + e1 + e2
            g0, g1, g2v = e0 / es, e1 / es, e2 / es
            wdst = w2 if layer == 0 else w3
            bdst = b2 if layer == 0 else b3
            for j in range(h):
                for k in range(h):
                    wdst[j, k] = (g0 * p[ow + j * h + k]
                                  + g1 * p[ow + stride + j * h + k]
                                  + g2v * p[ow + 2 * stride + j * h + k])
                bdst[j] = (g0 * p[ob + j] + g1 * p[ob + stride + j]
                           + g2v * p[ob + 2 * stride + j])

        th1 = 0.0
        th2 = 0.0
        om1 = 0.0
        om2 = 0.0
        total = 0.0
        obs = np.empty(obs_dim)
        h1 = np.empty(h)
        htmp = np.empty(h)
        for _ in range(frames):
            tx = l1 * math.cos(th1) + l2 * math.cos(th1 + th2)
            ty = l1 * math.sin(th1) + l2 * math.sin(th1 + th2)
            obs[0] = math.cos(th1)
            obs[1] = math.sin(th1)
            obs[2] = math.cos(th2)
            obs[3] = math.sin(th2)
            obs[4] = om1
            obs[5] = om2
            obs[6] = gx
            obs[7] = gy
            obs[8] = tx - gx
            obs[9] = ty - gy
            for j in range(h):
                acc = p[o_b1 + j]
                for k in range(obs_dim):
                    acc += p[o_w1 + j * obs_dim + k] * obs[k]
                h1[j] = math.tanh(acc)
            for j in range(h):
                acc = b2[j]
                for k in range(h):
                    acc += w2[j, k] * h1[k]
                htmp[j] = math.tanh(acc)
            for j in range(h):
                acc = b3[j]
                for k in range(h):
                    acc += w3[j, k] * htmp[k]
                h1[j] = math.tanh(acc)
            a0 = p[o_b4]
            a1 = p[o_b4 + 1]
            for k in range(h):
                a0 += p[o_w4 + k] * h1[k]
                a1 += p[o_w4 + h + k] * h1[k]
            t0 = math.tanh(a0) * torque_bound
            t1 = math.tanh(a1) * torque_bound
            scale = dt / inertia
            om1 = om1 + (t0 - damping * om1) * scale
            om2 = om2 + (t1 - damping * om2) * scale
            t = math.fmod(th1 + om1 * dt + math.pi, 2.0 * math.pi)
            if t <= 0.0:
                t += 2.0 * math.pi
            th1 = t - math.pi
            t = math.fmod(th2 + om2 * dt + math.pi, 2.0 * math.pi)
            if t <= 0.0:
                t += 2.0 * math.pi
            th2 = t - math.pi
            tx = l1 * math.cos(th1) + l2 * math.cos(th1 + th2)
            ty = l1 * math.sin(th1) + l2 * math.sin(th1 + th2)
            total -= math.sqrt((tx - gx) ** 2 + (ty - gy) ** 2)
        if not math.isfinite(total):
            total = sentinel
        out[i] = total
    return out


def _rollout_batch_numpy(P, layout, cfg, goal):
    """All genomes stepped in lockstep, one vectorized frame at a time."""
    n = P.shape[0]
    h = layout.hidden_dim
    sl = layout.slices
    w1 = P[:, sl["w1"]].reshape(n, h, layout.obs_dim)
    b1 = P[:, sl["b1"]]
    blended = []
    for layer in (2, 3):
        gates = P[:, sl[f"g{layer}"]]
        gates = np.exp(gates - gates.max(axis=1, keepdims=True))
        gates /= gates.sum(axis=1, keepdims=True)
        w = np.stack([P[:, sl[f"w{layer}_{m}"]].reshape(n, h, h)
                      for m in range(policy.N_MODULES)], axis=1)
        b = np.stack([P[:, sl[f"b{layer}_{m}"]] for m in range(policy.N_MODULES)],
                     axis=1)
        blended.append((
            np.einsum("nm,nmjk->njk", gates, w),
            np.einsum("nm,nmj->nj", gates, b),
        ))
    w4 = P[:, sl["w4"]].reshape(n, layout.action_dim, h)
    b4 = P[:, sl["b4"]]

    th = np.zeros((n, 2))
    om = np.zeros((n, 2))
    total = np.zeros(n)
    gx, gy = goal
    scale = cfg.dt / cfg.inertia
    with np.errstate(all="ignore"):
        for _ in range(cfg.frames):
            tipx = cfg.link1 * np.cos(th[:, 0]) + cfg.link2 * np.cos(th[:, 0] + th[:, 1])
            tipy = cfg.link1 * np.sin(th[:, 0]) + cfg.link2 * np.sin(th[:, 0] + th[:, 1])
            obs = np.stack([
                np.cos(th[:, 0]), np.sin(th[:, 0]),
                np.cos(th[:, 1]), np.sin(th[:, 1]),
                om[:, 0], om[:, 1],
                np.full(n, gx), np.full(n, gy),
                tipx - gx, tipy - gy,
            ], axis=1)
            hid = np.tanh(np.einsum("njk,nk->nj", w1, obs) + b1)
            for wl, bl in blended:
                hid = np.tanh(np.einsum("njk,nk->nj", wl, hid) + bl)
            act = np.tanh(np.einsum("nok,nk->no", w4, hid) + b4) * cfg.torque_bound
            om = om + (act - cfg.damping * om) * scale
            t = np.mod(th + om * cfg.dt + np.pi, 2.0 * np.pi)
            t = np.where(t == 0.0, 2.0 * np.pi, t)
            th = t - np.pi
            tipx = cfg.link1 * np.cos(th[:, 0]) + cfg.link2 * np.cos(th[:, 0] + th[:, 1])
            tipy = cfg.link1 * np.sin(th[:, 0]) + cfg.link2 * np.sin(th[:, 0] + th[:, 1])
            total -= np.hypot(tipx - gx, tipy - gy)
    return np.where(np.isfinite(total), total, NONFINITE_FITNESS)


class ReacherWorld:
    kind = "reacher"

    def __init__(self, config: ReacherConfig, goal=None, founder=None):
        self.config = config
        self.layout = policy.PolicyLayout(
            obs_dim=OBS_DIM, hidden_dim=config.hidden_dim, action_dim=ACTION_DIM
        )
        self.param_dim = self.layout.n_params
        self.goal = tuple(config.fixed_goal) if config.fixed_goal else goal
        self._founder = founder

    @classmethod
    def from_config(cls, cfg: dict, master_seed: int) -> "ReacherWorld":
        from .. import rng as streams

        cfg = dict(cfg)
        if cfg.get("fixed_goal") is not None:
            cfg["fixed_goal"] = tuple(cfg["fixed_goal"])
        config = ReacherConfig(**cfg)
        init_rng = streams.stream(master_seed, streams.WORLD_INIT)
        layout = policy.PolicyLayout(obs_dim=OBS_DIM, hidden_dim=config.hidden_dim,
                                     action_dim=ACTION_DIM)
        founder = policy.init_params(layout, init_rng)
        return cls(config, founder=founder)

    # world protocol ----------------------------------------------------

    def initial_params(self) -> np.ndarray:
        if self._founder is None:
            raise RuntimeError("world restored from a checkpoint has no founder genome")
        return self._founder.copy()

    def evaluate(self, params: np.ndarray) -> np.ndarray:
        if self.goal is None:
            raise RuntimeError("no goal set; the per-generation hook has not fired")
        params = np.ascontiguousarray(params, dtype=float)
        if NUMBA_ENABLED:
            sl = self.layout.slices
            cfg = self.config
            return _rollout_batch_jit(
                params, self.layout.hidden_dim, OBS_DIM, ACTION_DIM,
                sl["w1"].start, sl["b1"].start, sl["w2_0"].start, sl["b2_0"].start,
                sl["g2"].start, sl["w3_0"].start, sl["b3_0"].start, sl["g3"].start,
                sl["w4"].start, sl["b4"].start,
                cfg.link1, cfg.link2, cfg.damping, cfg.inertia, cfg.dt,
                cfg.frames, cfg.torque_bound, self.goal[0], self.goal[1],
                NONFINITE_FITNESS,
            )
        return _rollout_batch_numpy(params, self.layout, self.config, self.goal)

    def mutate_batch(self, parent: np.ndarray, n: int, rng) -> np.ndarray:
        return policy.mutate_batch(self.layout, parent, n, rng,
                                   self.config.sigma_base, self.config.sigma_meta)

    def pre_generation(self, generation: int, rng) -> None:
        if self.config.fixed_goal is not None:
            return
        period = self.config.goal_period
        if period is None:
            if self.goal is None:
                self.goal = sample_goal(rng, self.config)
        elif generation % period == 0:
            self.goal = sample_goal(rng, self.config)

    def metrics_columns(self):
        return ["goal_x", "goal_y"]

    def metrics_extras(self, params: np.ndarray, ratios: np.ndarray) -> dict:
        return {"goal_x": float(self.goal[0]), "goal_y": float(self.goal[1])}

    # serialization -----------------------------------------------------

    def params_to_json(self, params: np.ndarray) -> dict:
        return {"weights": [float(v) for v in params]}

    def params_from_json(self, obj: dict) -> np.ndarray:
        weights = np.asarray(obj["weights"], dtype=float)
        if weights.shape != (self.param_dim,):
            raise ValueError(
                f"expected {self.param_dim} weights, got {weights.shape[0]}"
            )
        return weights

    def state_dict(self) -> dict:
        cfg = self.config
        return {
            "link1": cfg.link1, "link2": cfg.link2, "damping": cfg.damping,
            "inertia": cfg.inertia, "dt": cfg.dt, "frames": cfg.frames,
            "goal_period": cfg.goal_period, "torque_bound": cfg.torque_bound,
            "goal_radius_lo": cfg.goal_radius_lo, "goal_radius_hi": cfg.goal_radius_hi,
            "hidden_dim": cfg.hidden_dim, "sigma_base": cfg.sigma_base,
            "sigma_meta": cfg.sigma_meta,
            "fixed_goal": list(cfg.fixed_goal) if cfg.fixed_goal else None,
            "goal": list(self.goal) if self.goal is not None else None,
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "ReacherWorld":
        state = dict(state)
        goal = state.pop("goal")
        if state.get("fixed_goal") is not None:
            state["fixed_goal"] = tuple(state["fixed_goal"])
        config = ReacherConfig(**state)
        return cls(config, goal=tuple(goal) if goal is not None else None)
