"""Compare the four schemes on a handful of shared channel realizations.

Movable antennas via the swarm search (pso), the fixed half-wavelength
array (fpa), per-antenna successive convex refinement (ao), and grid-based
position selection (aps) all see the same channels, so the CMSE columns
are directly comparable row by row.
"""

import numpy as np

from ma_aircomp import harness, pso

config = harness.ExperimentConfig(
    m_antennas=4,
    k_users=10,
    paths=5,
    power_dbm_sweep=(10.0,),
    schemes=("pso", "fpa", "ao", "aps"),
    n_realizations=3,
    pso_params=pso.PsoParams(n_particles=50, max_iter=100),
    master_seed=0,
)

records = harness.run_power_sweep(config)

print("seed  scheme  CMSE      misalignment  noise term")
for rec in sorted(records, key=lambda r: (r.seed, r.scheme)):
    print(f"{rec.seed:4d}  {rec.scheme:6s}  {rec.cmse:8.4f}  "
          f"{rec.misalignment:12.4f}  {rec.noise_term:10.2e}")

by_scheme = {}
for rec in records:
    by_scheme.setdefault(rec.scheme, []).append(rec.cmse)
print("\nmedian CMSE per scheme:")
for scheme, values in sorted(by_scheme.items()):
    print(f"  {scheme:6s} {np.median(values):.4f}")
