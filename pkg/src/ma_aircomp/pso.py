"""Penalty-augmented particle swarm search over the antenna position vector.

Each particle is a flattened (2M,) candidate APV.  Fitness is the inner-loop
CMSE plus ``tau`` times the number of antenna pairs closer than the minimum
separation, which drives the swarm toward feasible layouts without hard
projection.  The swarm is updated synchronously: all particles are evaluated
against the previous iteration's global best, so evaluation order (and any
parallelization of it) cannot change the result.  Per-particle RNG substreams
are spawned from a single master seed for full determinism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aircomp import InnerConfig, InnerSolution, inner_loop, inner_loop_batch
from .channel import ChannelRealization, RegionSpec, as_apv, batch_channel_matrix


@dataclass(frozen=True)
class PsoParams:
    n_particles: int = 200
    max_iter: int = 200
    c1: float = 1.5
    c2: float = 1.5
    omega_max: float = 0.9
    omega_min: float = 0.4
    penalty_tau: float = 20.0
    velocity_clamp: float | None = None  # None -> A/2 of the region at run time

    def __post_init__(self):
        if self.n_particles < 1 or self.max_iter < 1:
            raise ValueError("n_particles and max_iter must be >= 1")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("learning factors must be nonnegative")
        if not (self.omega_max >= self.omega_min >= 0):
            raise ValueError("need omega_max >= omega_min >= 0")
        if self.penalty_tau <= 0:
            raise ValueError("penalty_tau must be positive")


@dataclass
class FitnessReport:
    cmse: float
    violation_count: int
    fitness: float
    inner: InnerSolution


@dataclass
class SwarmState:
    positions: np.ndarray  # (N, 2M)
    velocities: np.ndarray  # (N, 2M)
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    pbest_cmse: np.ndarray
    pbest_violations: np.ndarray
    gbest_position: np.ndarray
    gbest_fitness: float
    gbest_cmse: float
    gbest_violations: int
    iteration: int
    generators: list


@dataclass
class PsoResult:
    apv: np.ndarray  # (M, 2)
    inner: InnerSolution
    trace: np.ndarray  # (T+1, 3): gbest fitness, gbest cmse, gbest violations
    feasible: bool


def violation_set(positions, min_sep: float) -> int:
    """Number of antenna pairs closer than ``min_sep``."""
    apv = as_apv(positions)
    diff = apv[:, None, :] - apv[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=2))
    iu = np.triu_indices(apv.shape[0], k=1)
    return int(np.count_nonzero(dist[iu] < min_sep))


def _batch_violations(position_batch, min_sep: float) -> np.ndarray:
    batch = np.asarray(position_batch, dtype=float)
    diff = batch[:, :, None, :] - batch[:, None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=3))
    iu = np.triu_indices(batch.shape[1], k=1)
    return np.count_nonzero(dist[:, iu[0], iu[1]] < min_sep, axis=1)


def inertia(t: int, params: PsoParams) -> float:
    """Linearly decreasing inertia weight over the run."""
    return params.omega_max - (params.omega_max - params.omega_min) * t / params.max_iter


def fitness(
    apv,
    realization: ChannelRealization,
    noise_var: float,
    power_cap: float,
    tau: float,
    min_sep: float,
    inner_cfg: InnerConfig = InnerConfig(),
) -> FitnessReport:
    """Inner-loop CMSE of one APV plus the separation penalty."""
    from .channel import channel_matrix

    apv = as_apv(apv)
    sol = inner_loop(channel_matrix(apv, realization), noise_var, power_cap, config=inner_cfg)
    violations = violation_set(apv, min_sep)
    return FitnessReport(
        cmse=sol.cmse,
        violation_count=violations,
        fitness=sol.cmse + tau * violations,
        inner=sol,
    )


def update_velocity(velocity, position, pbest, gbest, omega, params: PsoParams, rng, clamp):
    """One particle's velocity update with fresh scalar alpha draws."""
    alpha = rng.random(2)
    v = (
        omega * velocity
        + params.c1 * alpha[0] * (pbest - position)
        + params.c2 * alpha[1] * (gbest - position)
    )
    return np.clip(v, -clamp, clamp)


def update_position(position, velocity, region: RegionSpec):
    """Move and clamp each coordinate into the region box."""
    return np.clip(position + velocity, -region.half, region.half)


def _evaluate(flat_positions, realization, noise_var, power_cap, tau, min_sep, inner_cfg):
    """Fitness, CMSE and violation count for every row of a (N, 2M) stack."""
    batch = flat_positions.reshape(flat_positions.shape[0], -1, 2)
    h = batch_channel_matrix(batch, realization)
    _, _, values, _, _ = inner_loop_batch(h, noise_var, power_cap, config=inner_cfg)
    violations = _batch_violations(batch, min_sep)
    return values + tau * violations, values, violations


def init_swarm(
    params: PsoParams,
    region: RegionSpec,
    m_antennas: int,
    realization: ChannelRealization,
    noise_var: float,
    power_cap: float,
    rng_seed,
    inner_cfg: InnerConfig = InnerConfig(),
) -> SwarmState:
    """Uniform random positions, zero velocities, personal bests evaluated."""
    seq = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
    children = seq.spawn(params.n_particles)
    generators = [np.random.Generator(np.random.PCG64(c)) for c in children]
    dim = 2 * m_antennas
    positions = np.stack(
        [g.uniform(-region.half, region.half, size=dim) for g in generators]
    )
    fit, cmse_vals, violations = _evaluate(
        positions, realization, noise_var, power_cap, params.penalty_tau,
        region.min_separation, inner_cfg,
    )
    best = int(np.argmin(fit))
    return SwarmState(
        positions=positions,
        velocities=np.zeros_like(positions),
        pbest_positions=positions.copy(),
        pbest_fitness=fit.copy(),
        pbest_cmse=cmse_vals.copy(),
        pbest_violations=violations.copy(),
        gbest_position=positions[best].copy(),
        gbest_fitness=float(fit[best]),
        gbest_cmse=float(cmse_vals[best]),
        gbest_violations=int(violations[best]),
        iteration=0,
        generators=generators,
    )


def run_swarm(
    params: PsoParams,
    region: RegionSpec,
    m_antennas: int,
    realization: ChannelRealization,
    noise_var: float,
    power_cap: float,
    inner_cfg: InnerConfig,
    rng_seed,
) -> PsoResult:
    """Full outer loop (see module docstring).

    The trace has ``max_iter + 1`` rows, including the initial swarm, and its
    fitness column is non-increasing.  A run whose final best layout still has
    separation violations is returned with ``feasible=False`` rather than
    raising.
    """
    clamp = params.velocity_clamp if params.velocity_clamp is not None else region.half
    min_sep = region.min_separation
    state = init_swarm(
        params, region, m_antennas, realization, noise_var, power_cap, rng_seed, inner_cfg
    )
    trace = [(state.gbest_fitness, state.gbest_cmse, state.gbest_violations)]
    for t in range(1, params.max_iter + 1):
        omega = inertia(t, params)
        for n, gen in enumerate(state.generators):
            state.velocities[n] = update_velocity(
                state.velocities[n], state.positions[n], state.pbest_positions[n],
                state.gbest_position, omega, params, gen, clamp,
            )
        state.positions = update_position(state.positions, state.velocities, region)
        fit, cmse_vals, violations = _evaluate(
            state.positions, realization, noise_var, power_cap, params.penalty_tau,
            min_sep, inner_cfg,
        )
        improved = fit < state.pbest_fitness  # strict: ties keep the incumbent
        state.pbest_positions[improved] = state.positions[improved]
        state.pbest_fitness[improved] = fit[improved]
        state.pbest_cmse[improved] = cmse_vals[improved]
        state.pbest_violations[improved] = violations[improved]
        best = int(np.argmin(state.pbest_fitness))
        if state.pbest_fitness[best] < state.gbest_fitness:
            state.gbest_position = state.pbest_positions[best].copy()
            state.gbest_fitness = float(state.pbest_fitness[best])
            state.gbest_cmse = float(state.pbest_cmse[best])
            state.gbest_violations = int(state.pbest_violations[best])
        state.iteration = t
        trace.append((state.gbest_fitness, state.gbest_cmse, state.gbest_violations))

    apv = state.gbest_position.reshape(-1, 2)
    from .channel import channel_matrix

    sol = inner_loop(channel_matrix(apv, realization), noise_var, power_cap, config=inner_cfg)
    return PsoResult(
        apv=apv,
        inner=sol,
        trace=np.asarray(trace, dtype=float),
        feasible=state.gbest_violations == 0,
    )


def write_pso_trace_csv(path, trace):
    """Trace export matching the convergence-figure columns."""
    trace = np.asarray(trace)
    with open(path, "w", newline="") as fh:
        fh.write("iter,gbest_fitness,gbest_cmse,violations\n")
        for i, row in enumerate(trace):
            fh.write(f"{i},{row[0]!r},{row[1]!r},{int(row[2])}\n")
