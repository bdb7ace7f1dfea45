"""Fixed-position and grid-selection baselines.

``fpa_layout`` builds the conventional half-wavelength uniform planar array;
``aps_optimize`` improves antenna positions one at a time over a discrete
lattice of the region, re-running the inner loop for every candidate point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aircomp import InnerConfig, InnerSolution, inner_loop, inner_loop_batch, cmse_terms
from .channel import ChannelRealization, RegionSpec, as_apv, batch_channel_matrix, channel_matrix


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice over the region with the given step (wavelengths)."""

    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")

    def points(self, region: RegionSpec) -> np.ndarray:
        half = region.half
        n = int(np.floor(2 * half / self.step)) + 1
        axis = -half + self.step * np.arange(n)
        xx, yy = np.meshgrid(axis, axis)
        return np.stack([xx.ravel(), yy.ravel()], axis=1)


def fpa_layout(m_antennas: int, region: RegionSpec) -> np.ndarray:
    """Centered uniform planar array with half-wavelength spacing.

    The rows-by-columns split is the factorization of M closest to square,
    with ties broken toward more columns (M=12 gives 3 rows of 4).
    """
    if m_antennas < 1:
        raise ValueError("m_antennas must be >= 1")
    rows = max(d for d in range(1, int(np.sqrt(m_antennas)) + 1) if m_antennas % d == 0)
    cols = m_antennas // rows
    spacing = 0.5
    if (cols - 1) * spacing > region.side_length or (rows - 1) * spacing > region.side_length:
        raise ValueError("uniform planar array does not fit in the region")
    xs = spacing * (np.arange(cols) - (cols - 1) / 2.0)
    ys = spacing * (np.arange(rows) - (rows - 1) / 2.0)
    positions = [(x, y) for y in ys for x in xs]
    return np.asarray(positions, dtype=float)


def aps_optimize(
    realization: ChannelRealization,
    region: RegionSpec,
    grid: GridSpec,
    noise_var: float,
    power_cap: float,
    init_apv,
    inner_cfg: InnerConfig = InnerConfig(),
    max_rounds: int = 10,
):
    """Alternating position selection over the lattice.

    Cycles through the antennas; each one is moved to the admissible grid
    point (separation kept to all fixed antennas) with the lowest warm-started
    inner-loop CMSE, if that strictly improves on the incumbent.  Stops after
    a full cycle without movement or ``max_rounds`` cycles.
    """
    apv = as_apv(init_apv).copy()
    n_ant = apv.shape[0]
    min_sep = region.min_separation
    points = grid.points(region)

    sol = inner_loop(channel_matrix(apv, realization), noise_var, power_cap, config=inner_cfg)
    w, a, current = sol.w, sol.a, sol.cmse
    moves = [current]

    for _ in range(max_rounds):
        moved = False
        for m in range(n_ant):
            others = np.delete(apv, m, axis=0)
            if others.size:
                dist = np.linalg.norm(points[:, None, :] - others[None, :, :], axis=2)
                admissible = points[np.all(dist >= min_sep, axis=1)]
            else:
                admissible = points
            if admissible.shape[0] == 0:
                continue  # nothing to try this round; antenna stays put
            batch = np.repeat(apv[None, :, :], admissible.shape[0], axis=0)
            batch[:, m, :] = admissible
            h = batch_channel_matrix(batch, realization)
            n_cand = admissible.shape[0]
            init = (
                np.repeat(w[None, :], n_cand, axis=0),
                np.repeat(a[None, :], n_cand, axis=0),
            )
            w_all, a_all, values, _, _ = inner_loop_batch(
                h, noise_var, power_cap, init=init, config=inner_cfg
            )
            best = int(np.argmin(values))
            if values[best] < current:
                apv[m] = admissible[best]
                w, a, current = w_all[best], a_all[best], float(values[best])
                moves.append(current)
                moved = True
        if not moved:
            break

    h = channel_matrix(apv, realization)
    mis, noise = cmse_terms(h, w, a, noise_var)
    sol = InnerSolution(
        w=w, a=a, power_cap=power_cap, cmse=mis + noise,
        misalignment=mis, noise_term=noise, iterations=len(moves) - 1,
        trace=np.asarray(moves),
    )
    return apv, sol
