"""Field-response channel model for a 2D movable-antenna receive array.

Geometry is expressed in carrier wavelengths throughout (lambda = 1), so a
half-wavelength spacing is 0.5.  An antenna position is a length-2 float array
``[x, y]`` and an antenna position vector (APV) is an ``(M, 2)`` array.  Each
user's multipath channel is described by per-path angles of arrival and a
path-response vector (PRV) of complex gains referenced to the region origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RegionSpec:
    """Square antenna-moving region of side ``side_length`` centered at the origin.

    ``min_separation`` is the smallest allowed inter-antenna distance (mutual
    coupling limit).  Both lengths are in wavelengths.
    """

    side_length: float
    min_separation: float

    def __post_init__(self):
        if self.side_length <= 0:
            raise ValueError("side_length must be positive")
        if self.min_separation <= 0:
            raise ValueError("min_separation must be positive")
        if self.min_separation >= self.side_length * np.sqrt(2.0):
            raise ValueError(
                "min_separation too large: no two antennas fit in the region"
            )

    @property
    def half(self) -> float:
        return 0.5 * self.side_length


@dataclass(frozen=True)
class PathAngles:
    """Elevation/azimuth angle-of-arrival pair, both in [0, pi]."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= np.pi and 0.0 <= self.phi <= np.pi):
            raise ValueError("angles must lie in [0, pi]")


class UserChannel:
    """Per-user multipath description: AoAs plus complex path gains.

    Parameters
    ----------
    theta, phi : (L,) float arrays, angles in [0, pi]
    prv : (L,) complex array of path-response coefficients
    """

    def __init__(self, theta, phi, prv):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        prv = np.atleast_1d(np.asarray(prv, dtype=complex))
        if not (theta.shape == phi.shape == prv.shape) or theta.ndim != 1:
            raise ValueError("theta, phi and prv must be 1-D arrays of equal length")
        if theta.size < 1:
            raise ValueError("at least one path is required")
        if np.any(theta < 0) or np.any(theta > np.pi) or np.any(phi < 0) or np.any(phi > np.pi):
            raise ValueError("angles must lie in [0, pi]")
        self.theta = theta
        self.phi = phi
        self.prv = prv

    @property
    def n_paths(self) -> int:
        return self.theta.size

    def direction_factors(self):
        """Per-path geometry factors ``(sin(theta)cos(phi), cos(theta))`` as an (L, 2) array."""
        return np.stack(
            [np.sin(self.theta) * np.cos(self.phi), np.cos(self.theta)], axis=1
        )


@dataclass
class ChannelRealization:
    """One drawn channel: K users plus their distances to the access point (meters)."""

    users: list
    distances: np.ndarray = field(default=None)

    def __post_init__(self):
        self.distances = np.asarray(self.distances, dtype=float)
        if len(self.users) < 1:
            raise ValueError("at least one user is required")
        if self.distances.shape != (len(self.users),):
            raise ValueError("users and distances must have equal length")
        if np.any(self.distances <= 0):
            raise ValueError("distances must be positive")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def to_json(self) -> str:
        doc = {
            "users": [
                {
                    "theta": u.theta.tolist(),
                    "phi": u.phi.tolist(),
                    "prv": [[float(g.real), float(g.imag)] for g in u.prv],
                }
                for u in self.users
            ],
            "distances": self.distances.tolist(),
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChannelRealization":
        doc = json.loads(text)
        users = [
            UserChannel(
                np.asarray(u["theta"]),
                np.asarray(u["phi"]),
                np.asarray([complex(re, im) for re, im in u["prv"]]),
            )
            for u in doc["users"]
        ]
        return cls(users=users, distances=np.asarray(doc["distances"]))


def as_apv(positions) -> np.ndarray:
    """Normalize input to an (M, 2) float position array."""
    apv = np.asarray(positions, dtype=float)
    if apv.ndim == 1:
        apv = apv.reshape(-1, 2)
    if apv.ndim != 2 or apv.shape[1] != 2 or apv.shape[0] < 1:
        raise ValueError("an APV must have shape (M, 2)")
    return apv


def propagation_distance_diff(pos, theta, phi):
    """Propagation-distance difference (in wavelengths) of a path at ``pos``
    relative to the region origin: ``x sin(theta)cos(phi) + y cos(theta)``.

    ``theta``/``phi`` may be scalars or arrays; broadcasting applies.
    """
    pos = np.asarray(pos, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return pos[..., 0] * np.sin(theta) * np.cos(phi) + pos[..., 1] * np.cos(theta)


def field_response_vector(pos, user: UserChannel) -> np.ndarray:
    """Receive field-response vector: unit-modulus phase response per path."""
    rho = propagation_distance_diff(np.asarray(pos, dtype=float), user.theta, user.phi)
    return np.exp(1j * TWO_PI * rho)


def channel_vector(positions, user: UserChannel) -> np.ndarray:
    """Channel response vector h (length M) of one user for the given APV.

    Entry m is ``f(r_m)^H g``: the PRV combined through the conjugated
    field response at antenna m.
    """
    apv = as_apv(positions)
    dirs = user.direction_factors()  # (L, 2)
    rho = apv @ dirs.T  # (M, L)
    return np.exp(-1j * TWO_PI * rho) @ user.prv


def channel_matrix(positions, realization: ChannelRealization) -> np.ndarray:
    """Stack per-user channel vectors into a (K, M) matrix (row k is user k)."""
    apv = as_apv(positions)
    return np.stack([channel_vector(apv, u) for u in realization.users], axis=0)


def batch_channel_matrix(position_batch, realization: ChannelRealization) -> np.ndarray:
    """Channel matrices for a batch of APVs.

    ``position_batch`` has shape (B, M, 2); the result has shape (B, K, M).
    """
    batch = np.asarray(position_batch, dtype=float)
    if batch.ndim != 3 or batch.shape[2] != 2:
        raise ValueError("position batch must have shape (B, M, 2)")
    out = np.empty((batch.shape[0], realization.n_users, batch.shape[1]), dtype=complex)
    for k, u in enumerate(realization.users):
        dirs = u.direction_factors()  # (L, 2)
        rho = batch @ dirs.T  # (B, M, L)
        out[:, k, :] = np.exp(-1j * TWO_PI * rho) @ u.prv
    return out


def sample_channel(
    k_users: int,
    paths_per_user: int,
    pathloss_exp: float,
    dist_range,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw a random channel realization.

    AoAs are i.i.d. uniform on [0, pi], user distances uniform on
    ``dist_range`` (meters), and PRV entries are i.i.d. circularly symmetric
    complex Gaussian with per-entry variance ``d**-alpha / L``.
    """
    if k_users < 1 or paths_per_user < 1:
        raise ValueError("counts must be >= 1")
    d_lo, d_hi = dist_range
    if d_lo > d_hi:
        raise ValueError("dist_range must satisfy min <= max")
    users = []
    distances = np.empty(k_users)
    for k in range(k_users):
        theta = rng.uniform(0.0, np.pi, size=paths_per_user)
        phi = rng.uniform(0.0, np.pi, size=paths_per_user)
        d = rng.uniform(d_lo, d_hi)
        var = d ** (-pathloss_exp) / paths_per_user
        sigma = np.sqrt(var / 2.0)
        prv = sigma * (
            rng.standard_normal(paths_per_user)
            + 1j * rng.standard_normal(paths_per_user)
        )
        users.append(UserChannel(theta, phi, prv))
        distances[k] = d
    return ChannelRealization(users=users, distances=distances)


def perturb_aoas(
    realization: ChannelRealization, max_error: float, rng: np.random.Generator
) -> ChannelRealization:
    """Shift every AoA by an i.i.d. uniform draw from [-mu/2, mu/2], clamped to [0, pi].

    PRVs and distances are left untouched.  ``max_error`` = 0 returns an
    identical copy.
    """
    if max_error < 0:
        raise ValueError("max_error must be nonnegative")
    half = 0.5 * max_error
    users = []
    for u in realization.users:
        theta = np.clip(u.theta + rng.uniform(-half, half, size=u.n_paths), 0.0, np.pi)
        phi = np.clip(u.phi + rng.uniform(-half, half, size=u.n_paths), 0.0, np.pi)
        users.append(UserChannel(theta, phi, u.prv.copy()))
    return ChannelRealization(users=users, distances=realization.distances.copy())


def channel_gain_map(realization: ChannelRealization, region: RegionSpec, grid_step: float):
    """Average single-antenna channel magnitude over a lattice of the region.

    Returns ``(xs, ys, gain)`` where ``gain[iy, ix]`` is
    ``mean_k |g_k^H f_k([xs[ix], ys[iy]])|``.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    half = region.half
    n = int(np.floor(2 * half / grid_step)) + 1
    xs = -half + grid_step * np.arange(n)
    ys = -half + grid_step * np.arange(n)
    gain = np.zeros((n, n))
    for u in realization.users:
        dirs = u.direction_factors()  # (L, 2)
        # rho over the full lattice: (ny, nx, L)
        rho = (
            xs[None, :, None] * dirs[None, None, :, 0]
            + ys[:, None, None] * dirs[None, None, :, 1]
        )
        h = np.exp(-1j * TWO_PI * rho) @ u.prv
        gain += np.abs(h)
    gain /= realization.n_users
    return xs, ys, gain


def write_gain_map_csv(path, xs, ys, gain):
    """Export a gain map as ``x,y,avg_gain`` rows in row-major grid order."""
    with open(path, "w", newline="") as fh:
        fh.write("x,y,avg_gain\n")
        for iy in range(len(ys)):
            for ix in range(len(xs)):
                fh.write(f"{xs[ix]!r},{ys[iy]!r},{gain[iy, ix]!r}\n")
