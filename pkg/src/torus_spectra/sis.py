"""Discrete-time SIS spreading on a graph.

Per time slot every infected node tries to infect each susceptible neighbour
with probability ``beta`` and recovers with probability ``delta``. A node is
susceptible after the slot only if no neighbour infected it and, when it was
infected, it also recovered. The mean-field map

    p_i <- 1 - (1 - p_i + delta p_i) * prod_{j ~ i} (1 - beta p_j)

tracks the marginal infection probabilities; its Jacobian at ``p = 0`` is
``(1 - delta) I + beta A``, so the infection-free state is stable exactly when
``rho(A) < delta / beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._concurrency import pmap
from .spectral import ORACLE_MAX_NODES, dense_spectrum, spectral_radius_power
from .topology import Graph

__all__ = [
    "DEFAULT_RNG_SEED",
    "SisParams",
    "ThresholdVerdict",
    "Trajectory",
    "meanfield_step",
    "montecarlo_step",
    "initial_seeds",
    "jacobian_spectral_test",
    "finite_difference_jacobian",
    "run_meanfield",
    "run_montecarlo",
    "run_experiment",
]

DEFAULT_RNG_SEED = 12345


@dataclass(frozen=True)
class SisParams:
    beta: float
    delta: float
    horizon: int = 500
    seeds: int | tuple[int, ...] = 20

    def __post_init__(self):
        for name in ("beta", "delta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if isinstance(self.seeds, int):
            if self.seeds < 0:
                raise ValueError("seed count must be >= 0")
        else:
            object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))


@dataclass(frozen=True)
class ThresholdVerdict:
    rho: float
    ratio: float
    stable: bool
    jacobian_top: float
    consistent: bool = True


@dataclass
class Trajectory:
    """Expected number of infected nodes per time step, ``t = 0..horizon``."""

    mean: np.ndarray
    std: np.ndarray | None
    mode: str
    rng_seed: int
    replicas: int = 1

    def rows(self) -> list[dict]:
        out = []
        for t, mu in enumerate(self.mean):
            row = {"t": t, "infected_mean": float(mu)}
            if self.std is not None:
                row["infected_std"] = float(self.std[t])
            out.append(row)
        return out


def _padded(g: Graph) -> np.ndarray:
    return g.padded_neighbors()


def meanfield_step(
    g: Graph, p: np.ndarray, params: SisParams, nbr: np.ndarray | None = None
) -> np.ndarray:
    nbr = _padded(g) if nbr is None else nbr
    pad = np.append(p, 0.0)
    escape = np.prod(1.0 - params.beta * pad[nbr], axis=1)
    out = 1.0 - (1.0 - p + params.delta * p) * escape
    return np.clip(out, 0.0, 1.0)


def montecarlo_step(
    g: Graph,
    state: np.ndarray,
    params: SisParams,
    rng: np.random.Generator,
    nbr: np.ndarray | None = None,
) -> np.ndarray:
    """One synchronous stochastic slot on a boolean infection vector."""
    nbr = _padded(g) if nbr is None else nbr
    pad = np.append(state, False)
    k = pad[nbr].sum(axis=1)
    exposed = rng.random(g.n) >= (1.0 - params.beta) ** k
    recovered = rng.random(g.n) < params.delta
    return exposed | (state & ~recovered)


def initial_seeds(g: Graph, params: SisParams, rng: np.random.Generator) -> np.ndarray:
    if isinstance(params.seeds, tuple):
        seeds = np.array(params.seeds, dtype=np.int64)
        if seeds.size and (seeds.min() < 0 or seeds.max() >= g.n):
            raise ValueError(f"seed nodes must lie in [0, {g.n})")
        return seeds
    if params.seeds > g.n:
        raise ValueError(f"cannot seed {params.seeds} of {g.n} nodes")
    return rng.choice(g.n, size=params.seeds, replace=False)


def _spectral_radius(g: Graph) -> float:
    if g.n <= ORACLE_MAX_NODES:
        return dense_spectrum(g).radius
    return spectral_radius_power(g)


def jacobian_spectral_test(
    g: Graph, params: SisParams, rho: float | None = None
) -> ThresholdVerdict:
    """Stability of the infection-free state: stable iff ``rho(A) < delta / beta``.

    ``rho`` may be passed when it is known in closed form (``2d`` for a torus).
    """
    rho = _spectral_radius(g) if rho is None else float(rho)
    if params.beta == 0:
        return ThresholdVerdict(rho, math.inf, True, 1.0 - params.delta, True)
    ratio = params.delta / params.beta
    stable = rho < ratio
    top = 1.0 - params.delta + params.beta * rho
    return ThresholdVerdict(rho, ratio, stable, top, stable == (top < 1.0))


def finite_difference_jacobian(
    g: Graph, params: SisParams, p0: np.ndarray | None = None, h: float = 1e-7
) -> np.ndarray:
    """Forward-difference Jacobian of the mean-field map at ``p0`` (default 0)."""
    p0 = np.zeros(g.n) if p0 is None else p0
    nbr = _padded(g)
    base = meanfield_step(g, p0, params, nbr)
    jac = np.empty((g.n, g.n))
    for col in range(g.n):
        p = p0.copy()
        p[col] += h
        jac[:, col] = (meanfield_step(g, p, params, nbr) - base) / h
    return jac


def run_meanfield(g: Graph, params: SisParams, seed: int = DEFAULT_RNG_SEED) -> Trajectory:
    nbr = _padded(g)
    p = np.zeros(g.n)
    p[initial_seeds(g, params, np.random.default_rng(seed))] = 1.0
    totals = [p.sum()]
    for _ in range(params.horizon):
        p = meanfield_step(g, p, params, nbr)
        totals.append(p.sum())
    return Trajectory(np.array(totals), None, "meanfield", seed)


def _replica(g: Graph, params: SisParams, nbr: np.ndarray, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    state = np.zeros(g.n, dtype=bool)
    state[initial_seeds(g, params, rng)] = True
    counts = np.empty(params.horizon + 1, dtype=np.int64)
    counts[0] = state.sum()
    for t in range(1, params.horizon + 1):
        if counts[t - 1] == 0:
            counts[t:] = 0
            break
        state = montecarlo_step(g, state, params, rng, nbr)
        counts[t] = state.sum()
    return counts


def run_montecarlo(
    g: Graph, params: SisParams, replicas: int = 100, seed: int = DEFAULT_RNG_SEED
) -> Trajectory:
    """Average infected count over ``replicas`` runs; replica ``r`` uses seed ``seed + r``."""
    if replicas < 1:
        raise ValueError("need at least one replica")
    nbr = _padded(g)
    runs = np.array(pmap(lambda r: _replica(g, params, nbr, seed + r), range(replicas)))
    std = runs.std(axis=0, ddof=1) if replicas > 1 else np.zeros(runs.shape[1])
    return Trajectory(runs.mean(axis=0), std, "montecarlo", seed, replicas)


def run_experiment(
    g: Graph,
    params: SisParams,
    mode: str = "meanfield",
    replicas: int = 100,
    seed: int = DEFAULT_RNG_SEED,
) -> Trajectory:
    if mode == "meanfield":
        return run_meanfield(g, params, seed)
    if mode in ("montecarlo", "mc"):
        return run_montecarlo(g, params, replicas, seed)
    raise ValueError(f"unknown mode {mode!r}")

