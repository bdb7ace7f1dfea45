"""Watch the swarm converge on a single channel realization.

Runs a small particle swarm over the antenna positions, prints how the
best fitness and the separation-violation count evolve, and writes the
trace to ``pso_trace.csv`` (header ``iter,gbest_fitness,gbest_cmse,violations``).
"""

import numpy as np

from ma_aircomp import aircomp, channel, pso

region = channel.RegionSpec(side_length=3.0, min_separation=0.5)
rng = np.random.default_rng(1)
realization = channel.sample_channel(
    k_users=10, paths_per_user=5, pathloss_exp=3.9, dist_range=(250.0, 300.0), rng=rng
)

params = pso.PsoParams(n_particles=50, max_iter=100)
result = pso.run_swarm(
    params, region, m_antennas=4, realization=realization,
    noise_var=1e-8, power_cap=10.0, inner_cfg=aircomp.InnerConfig(), rng_seed=1,
)

print("iter  gbest_fitness  gbest_cmse  violations")
for t in range(0, params.max_iter + 1, 10):
    fit, cmse, viol = result.trace[t]
    print(f"{t:4d}  {fit:13.4f}  {cmse:10.4f}  {int(viol):10d}")

print(f"\nfinal CMSE {result.inner.cmse:.4f}, feasible={result.feasible}")
print("optimized antenna positions (wavelengths):")
for x, y in result.apv:
    print(f"  ({x:+.3f}, {y:+.3f})")

pso.write_pso_trace_csv("pso_trace.csv", result.trace)
print("\ntrace written to pso_trace.csv")
