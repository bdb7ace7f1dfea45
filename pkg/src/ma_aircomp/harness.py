"""Experiment orchestration: seeded sweeps over power, users and AoA error.

Every (seed index, sweep point, scheme) cell derives its own RNG substream
from the master seed, and all schemes at one seed index share the same channel
realization, so scheme comparisons are paired.  Results are collected as
``ResultRecord`` rows and written as CSV with a fixed header.  Wall times are
measured but written as 0.0 unless timing output is requested, keeping CSV
output byte-identical across repeated runs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import benchmarks, pso, sca
from .aircomp import InnerConfig, cmse_terms, inner_loop
from .channel import (
    ChannelRealization,
    RegionSpec,
    channel_matrix,
    perturb_aoas,
    sample_channel,
)

# Stable scheme identifiers for seed derivation; appending schemes must never
# shift existing substreams.
SCHEME_IDS = {"pso": 1, "fpa": 2, "ao": 3, "aps": 4}

CSV_HEADER = (
    "scheme,p_c_dbm,k_users,m_antennas,mu,seed,cmse,misalignment,"
    "noise_term,violations,wall_time_s"
)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    m_antennas: int = 4
    k_users: int = 10
    paths: int = 5
    region_side: float = 3.0
    min_separation: float = 0.5
    noise_dbm: float = -80.0
    power_dbm: float = 10.0
    power_dbm_sweep: tuple = (0.0, 10.0, 20.0)
    k_sweep: tuple | None = None
    aoa_error_sweep: tuple | None = None
    schemes: tuple = ("pso", "fpa")
    n_realizations: int = 10
    master_seed: int = 0
    pathloss_exp: float = 3.9
    dist_range: tuple = (250.0, 300.0)
    pso_params: pso.PsoParams = field(default_factory=pso.PsoParams)
    sca_params: sca.ScaParams = field(default_factory=sca.ScaParams)
    inner: InnerConfig = field(default_factory=InnerConfig)
    aps_grid_step: float = 0.25
    gain_map_step: float = 0.1

    def __post_init__(self):
        for name in ("m_antennas", "k_users", "paths", "n_realizations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        unknown = set(self.schemes) - set(SCHEME_IDS)
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")

    @property
    def region(self) -> RegionSpec:
        return RegionSpec(self.region_side, self.min_separation)

    @property
    def noise_var(self) -> float:
        return dbm_to_mw(self.noise_dbm)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        kwargs = {}
        if "pso" in doc:
            kwargs["pso_params"] = pso.PsoParams(**doc.pop("pso"))
        if "sca" in doc:
            kwargs["sca_params"] = sca.ScaParams(**doc.pop("sca"))
        if "inner" in doc:
            kwargs["inner"] = InnerConfig(**doc.pop("inner"))
        valid = set(cls.__dataclass_fields__)
        for key, value in doc.items():
            if key not in valid:
                raise ValueError(f"unknown config field: {key}")
            if isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        return cls(**kwargs)


@dataclass
class ResultRecord:
    scheme: str
    p_c_dbm: float
    k_users: int
    m_antennas: int
    mu: float
    seed: int
    cmse: float
    misalignment: float
    noise_term: float
    violations: int
    wall_time_s: float

    def csv_row(self, include_timing: bool = False) -> str:
        wall = self.wall_time_s if include_timing else 0.0
        return (
            f"{self.scheme},{self.p_c_dbm!r},{self.k_users},{self.m_antennas},"
            f"{self.mu!r},{self.seed},{self.cmse!r},{self.misalignment!r},"
            f"{self.noise_term!r},{self.violations},{wall!r}"
        )


def write_records_csv(path, records, include_timing: bool = False):
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.csv_row(include_timing) + "\n")


def _realization_for_seed(config: ExperimentConfig, seed_idx: int, k_users: int) -> ChannelRealization:
    seq = np.random.SeedSequence([config.master_seed, 0, seed_idx])
    rng = np.random.Generator(np.random.PCG64(seq))
    return sample_channel(
        k_users, config.paths, config.pathloss_exp, config.dist_range, rng
    )


def _prefix(realization: ChannelRealization, k: int) -> ChannelRealization:
    return ChannelRealization(
        users=realization.users[:k], distances=realization.distances[:k]
    )


def run_scheme(
    scheme: str,
    realization: ChannelRealization,
    config: ExperimentConfig,
    power_mw: float,
    seed_entropy,
):
    """Run one scheme on one realization; returns (apv, InnerSolution)."""
    region = config.region
    if scheme == "fpa":
        apv = benchmarks.fpa_layout(config.m_antennas, region)
        sol = inner_loop(
            channel_matrix(apv, realization), config.noise_var, power_mw,
            config=config.inner,
        )
        return apv, sol
    if scheme == "pso":
        result = pso.run_swarm(
            config.pso_params, region, config.m_antennas, realization,
            config.noise_var, power_mw, config.inner,
            np.random.SeedSequence(seed_entropy),
        )
        return result.apv, result.inner
    if scheme == "ao":
        init = benchmarks.fpa_layout(config.m_antennas, region)
        apv, sol, _ = sca.ao_scheme(
            realization, region, region.min_separation, config.noise_var,
            power_mw, init, config.sca_params,
        )
        return apv, sol
    if scheme == "aps":
        init = benchmarks.fpa_layout(config.m_antennas, region)
        apv, sol = benchmarks.aps_optimize(
            realization, region, benchmarks.GridSpec(config.aps_grid_step),
            config.noise_var, power_mw, init, config.inner,
        )
        return apv, sol
    raise ValueError(f"unknown scheme: {scheme}")


def _record(scheme, config, power_dbm, k_users, mu, seed_idx, apv, sol, wall,
            eval_realization=None):
    if eval_realization is not None:
        h = channel_matrix(apv, eval_realization)
        mis, noise = cmse_terms(h, sol.w, sol.a, config.noise_var)
    else:
        mis, noise = sol.misalignment, sol.noise_term
    return ResultRecord(
        scheme=scheme,
        p_c_dbm=power_dbm,
        k_users=k_users,
        m_antennas=config.m_antennas,
        mu=mu,
        seed=seed_idx,
        cmse=mis + noise,
        misalignment=mis,
        noise_term=noise,
        violations=pso.violation_set(apv, config.min_separation),
        wall_time_s=wall,
    )


def _error_record(scheme, config, power_dbm, k_users, mu, seed_idx, wall):
    return ResultRecord(
        scheme=scheme, p_c_dbm=power_dbm, k_users=k_users,
        m_antennas=config.m_antennas, mu=mu, seed=seed_idx,
        cmse=float("nan"), misalignment=float("nan"), noise_term=float("nan"),
        violations=-1, wall_time_s=wall,
    )


def _cell(scheme, realization, config, power_dbm, k_users, mu, seed_idx, sweep_idx,
          eval_realization=None):
    entropy = [config.master_seed, seed_idx, SCHEME_IDS[scheme], sweep_idx]
    start = time.perf_counter()
    try:
        apv, sol = run_scheme(scheme, realization, config, dbm_to_mw(power_dbm), entropy)
        wall = time.perf_counter() - start
        return _record(scheme, config, power_dbm, k_users, mu, seed_idx, apv, sol,
                       wall, eval_realization)
    except Exception:
        wall = time.perf_counter() - start
        return _error_record(scheme, config, power_dbm, k_users, mu, seed_idx, wall)


def run_power_sweep(config: ExperimentConfig):
    """CMSE of every scheme over the transmit-power sweep, paired per seed."""
    records = []
    for seed_idx in range(config.n_realizations):
        realization = _realization_for_seed(config, seed_idx, config.k_users)
        for sweep_idx, p_dbm in enumerate(config.power_dbm_sweep):
            for scheme in config.schemes:
                records.append(
                    _cell(scheme, realization, config, p_dbm, config.k_users,
                          0.0, seed_idx, sweep_idx)
                )
    return records


def run_user_sweep(config: ExperimentConfig):
    """CMSE versus the number of users, with prefix-nested user sets per seed."""
    if not config.k_sweep:
        raise ValueError("k_sweep must be non-empty for the user sweep")
    k_max = max(config.k_sweep)
    records = []
    for seed_idx in range(config.n_realizations):
        full = _realization_for_seed(config, seed_idx, k_max)
        for sweep_idx, k in enumerate(config.k_sweep):
            realization = _prefix(full, k)
            for scheme in config.schemes:
                records.append(
                    _cell(scheme, realization, config, config.power_dbm, k,
                          0.0, seed_idx, sweep_idx)
                )
    return records


def run_aoa_error_sweep(config: ExperimentConfig):
    """Optimize on AoA-perturbed channels, evaluate the result on true ones."""
    if not config.aoa_error_sweep:
        raise ValueError("aoa_error_sweep must be non-empty for the AoA sweep")
    records = []
    for seed_idx in range(config.n_realizations):
        true = _realization_for_seed(config, seed_idx, config.k_users)
        for sweep_idx, mu in enumerate(config.aoa_error_sweep):
            pert_rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(
                    [config.master_seed, 1, seed_idx, sweep_idx]))
            )
            estimated = perturb_aoas(true, mu, pert_rng)
            for scheme in config.schemes:
                records.append(
                    _cell(scheme, estimated, config, config.power_dbm,
                          config.k_users, mu, seed_idx, sweep_idx,
                          eval_realization=true)
                )
    return records


def run_convergence_trace(config: ExperimentConfig):
    """Single seeded PSO run; returns the (T+1, 3) gbest trace."""
    realization = _realization_for_seed(config, 0, config.k_users)
    result = pso.run_swarm(
        config.pso_params, config.region, config.m_antennas, realization,
        config.noise_var, dbm_to_mw(config.power_dbm), config.inner,
        np.random.SeedSequence([config.master_seed, 0, SCHEME_IDS["pso"], 0]),
    )
    return result.trace


def with_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(config, master_seed=seed)
