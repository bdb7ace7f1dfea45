"""Per-antenna successive convex approximation and the alternating benchmark.

With the combiner ``w`` and transmit coefficients ``a`` fixed, the
misalignment part of the CMSE depends on antenna m's position only through a
trigonometric function

    G(r) = sum_k f_k(r)^H B_k f_k(r) + 2 Re{q_k^H f_k(r)},

where ``B_k`` is a rank-one PSD matrix and ``q_k`` a complex vector, both built
from the current (w, a) and the other antennas' channel entries.  A curvature
bound ``xi`` turns G into a quadratic surrogate that upper-bounds it globally
and is tight at the expansion point, so each accepted surrogate-minimizer step
can only decrease the true objective.  The minimum-separation constraint is
relaxed to half-planes around the expansion point, leaving a 2D box-and-half-
plane QP that is solved exactly by active-set enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aircomp import (
    InnerConfig,
    InnerSolution,
    cmse_terms,
    optimal_coeffs,
    optimal_combiner,
)
from .channel import (
    ChannelRealization,
    RegionSpec,
    as_apv,
    channel_matrix,
    field_response_vector,
)

TWO_PI = 2.0 * np.pi


class QpInfeasibleError(Exception):
    """The relaxed per-antenna constraint set has no feasible point."""


@dataclass(frozen=True)
class ScaParams:
    max_sca_iter: int = 30
    sca_tol: float = 1e-6
    max_ao_rounds: int = 20
    ao_tol: float = 1e-5

    def __post_init__(self):
        if self.max_sca_iter < 1 or self.max_ao_rounds < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.sca_tol <= 0 or self.ao_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SurrogateModel:
    """Per-user quadratic-form data for one antenna's subproblem."""

    b_matrices: list  # K matrices, L_k x L_k, rank <= 1 PSD
    q_vectors: list  # K vectors of length L_k
    xi: float
    expansion_point: np.ndarray  # (2,)
    antenna_index: int


def build_surrogate(m, positions, realization, w, a) -> SurrogateModel:
    """Assemble B_k, q_k and the curvature bound xi at antenna m's position.

    beta_k collects the other antennas' contribution to ``h_k^H w``; with
    ``w_m = 0`` every term vanishes and the model is identically zero.
    """
    apv = as_apv(positions)
    w = np.asarray(w, dtype=complex)
    a = np.asarray(a, dtype=complex)
    h = channel_matrix(apv, realization)  # (K, M)
    wm = w[m]
    full = h.conj() @ w  # h_k^H w
    beta = full - wm * h[:, m].conj()
    b_matrices = []
    q_vectors = []
    xi = 0.0
    for k, user in enumerate(realization.users):
        g = user.prv
        bk = (np.abs(a[k]) ** 2) * (np.abs(wm) ** 2) * np.outer(g, g.conj())
        qk = ((np.abs(a[k]) ** 2) * beta[k] - a[k]) * np.conj(wm) * g
        b_matrices.append(bk)
        q_vectors.append(qk)
        xi += 2.0 * np.sum(np.abs(bk)) + np.sum(np.abs(qk))
    xi *= 16.0 * np.pi**2
    return SurrogateModel(
        b_matrices=b_matrices,
        q_vectors=q_vectors,
        xi=float(xi),
        expansion_point=apv[m].copy(),
        antenna_index=m,
    )


def g_value(model: SurrogateModel, pos, realization: ChannelRealization) -> float:
    """Evaluate G at ``pos`` via the cosine expansion of the quadratic forms."""
    pos = np.asarray(pos, dtype=float)
    total = 0.0
    for user, bk, qk in zip(realization.users, model.b_matrices, model.q_vectors):
        dirs = user.direction_factors()
        rho = pos @ dirs.T  # (L,)
        gamma = TWO_PI * (rho[:, None] - rho[None, :]) - np.angle(bk)
        total += float(np.sum(np.abs(bk) * np.cos(gamma)))
        total += 2.0 * float(np.sum(np.abs(qk) * np.cos(TWO_PI * rho - np.angle(qk))))
    return total


def g_gradient(model: SurrogateModel, pos, realization: ChannelRealization) -> np.ndarray:
    """Gradient of G with respect to the antenna coordinates (x, y)."""
    pos = np.asarray(pos, dtype=float)
    grad = np.zeros(2)
    for user, bk, qk in zip(realization.users, model.b_matrices, model.q_vectors):
        dirs = user.direction_factors()  # (L, 2): [sin th cos ph, cos th]
        rho = pos @ dirs.T
        gamma = TWO_PI * (rho[:, None] - rho[None, :]) - np.angle(bk)
        sin_g = np.abs(bk) * np.sin(gamma)
        for c in range(2):
            delta = dirs[:, None, c] - dirs[None, :, c]
            grad[c] += -TWO_PI * float(np.sum(delta * sin_g))
        sin_q = np.abs(qk) * np.sin(TWO_PI * rho - np.angle(qk))
        grad += 2.0 * (-TWO_PI) * (dirs.T @ sin_q)
    return grad


def surrogate_upper_bound(model: SurrogateModel, pos, realization: ChannelRealization) -> float:
    """Quadratic majorizer of G, tight at the expansion point."""
    pos = np.asarray(pos, dtype=float)
    r0 = model.expansion_point
    g0 = g_value(model, r0, realization)
    grad0 = g_gradient(model, r0, realization)
    xi = model.xi
    omega = g0 - (grad0 - 0.5 * xi * r0) @ r0
    return float(0.5 * xi * pos @ pos + (grad0 - xi * r0) @ pos + omega)


def relaxed_separation_constraints(positions, m, min_sep):
    """Half-plane inner approximations of the pairwise-distance constraints.

    Returns a list of ``(normal, rhs)`` pairs meaning ``normal @ r >= rhs``;
    any point satisfying them keeps antenna m at least ``min_sep`` from every
    other antenna.  A coincident pair (undefined normal) gets a deterministic
    pseudo-random direction seeded by the index pair.
    """
    apv = as_apv(positions)
    r_m = apv[m]
    constraints = []
    for n in range(apv.shape[0]):
        if n == m:
            continue
        diff = r_m - apv[n]
        norm = np.linalg.norm(diff)
        if norm > 0:
            unit = diff / norm
        else:
            ang = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([m, n]))
            ).uniform(0.0, TWO_PI)
            unit = np.array([np.cos(ang), np.sin(ang)])
        constraints.append((unit, float(min_sep + unit @ apv[n])))
    return constraints


def solve_antenna_qp(xi, linear_coef, region: RegionSpec, constraints):
    """Exact minimizer of (xi/2)||r||^2 + c^T r over the box and half-planes.

    The Hessian is spherical and the problem 2-dimensional, so the optimum is
    either the unconstrained minimizer, the minimizer on one active
    constraint, or the intersection of two.  All candidates are enumerated and
    the feasible one with least objective returned.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    c = np.asarray(linear_coef, dtype=float)
    half = region.half
    # Box edges as half-planes normal @ r >= rhs.
    planes = [
        (np.array([1.0, 0.0]), -half),
        (np.array([-1.0, 0.0]), -half),
        (np.array([0.0, 1.0]), -half),
        (np.array([0.0, -1.0]), -half),
    ]
    planes += [(np.asarray(nrm, dtype=float), float(rhs)) for nrm, rhs in constraints]

    tol = 1e-9

    def feasible(r):
        return all(nrm @ r >= rhs - tol for nrm, rhs in planes)

    def objective(r):
        return 0.5 * xi * r @ r + c @ r

    candidates = [-c / xi]
    for nrm, rhs in planes:
        # Minimize on the line nrm @ r = rhs: r = rhs*nrm + t*perp.
        perp = np.array([-nrm[1], nrm[0]])
        t = -(c @ perp) / xi
        candidates.append(rhs * nrm + t * perp)
    n_planes = len(planes)
    for i in range(n_planes):
        for j in range(i + 1, n_planes):
            mat = np.array([planes[i][0], planes[j][0]])
            det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
            if abs(det) < 1e-12:
                continue
            rhs = np.array([planes[i][1], planes[j][1]])
            candidates.append(np.linalg.solve(mat, rhs))

    best = None
    best_val = np.inf
    for r in candidates:
        if feasible(r):
            val = objective(r)
            if val < best_val:
                best_val = val
                best = r
    if best is None:
        raise QpInfeasibleError("relaxed per-antenna constraint set is empty")
    return best


def _misalignment(positions, realization, w, a):
    h = channel_matrix(positions, realization)
    mis, _ = cmse_terms(h, w, a, noise_var=1.0)
    return mis


def sca_optimize_antenna(
    m,
    positions,
    realization: ChannelRealization,
    w,
    a,
    region: RegionSpec,
    min_sep: float,
    params: ScaParams = ScaParams(),
) -> np.ndarray:
    """Iterate surrogate minimization for one antenna; never increases the
    true misalignment objective.  Returns the new position of antenna m."""
    apv = as_apv(positions).copy()
    current = _misalignment(apv, realization, w, a)
    for _ in range(params.max_sca_iter):
        model = build_surrogate(m, apv, realization, w, a)
        if model.xi <= 0:
            break  # objective does not depend on this antenna (w_m = 0)
        grad = g_gradient(model, apv[m], realization)
        coef = grad - model.xi * apv[m]
        cons = relaxed_separation_constraints(apv, m, min_sep)
        try:
            candidate = solve_antenna_qp(model.xi, coef, region, cons)
        except QpInfeasibleError:
            break
        trial = apv.copy()
        trial[m] = candidate
        value = _misalignment(trial, realization, w, a)
        if value > current + 1e-12:
            break  # numerical-error step; keep the monotone incumbent
        apv = trial
        decrement = current - value
        current = value
        if decrement < params.sca_tol:
            break
    return apv[m]


def ao_scheme(
    realization: ChannelRealization,
    region: RegionSpec,
    min_sep: float,
    noise_var: float,
    power_cap: float,
    init_apv,
    params: ScaParams = ScaParams(),
):
    """Alternating benchmark: combiner, coefficients, then each antenna in turn.

    Returns ``(apv, InnerSolution, trace)`` with a non-increasing per-round
    CMSE trace.
    """
    apv = as_apv(init_apv).copy()
    n_ant = apv.shape[0]
    a = np.full(realization.n_users, np.sqrt(power_cap), dtype=complex)
    w = None
    trace = []
    prev = np.inf
    for _ in range(params.max_ao_rounds):
        h = channel_matrix(apv, realization)
        w = optimal_combiner(h, a, noise_var)
        a = optimal_coeffs(h, w, power_cap)
        for m in range(n_ant):
            apv[m] = sca_optimize_antenna(
                m, apv, realization, w, a, region, min_sep, params
            )
        h = channel_matrix(apv, realization)
        mis, noise = cmse_terms(h, w, a, noise_var)
        value = mis + noise
        trace.append(value)
        if prev - value < params.ao_tol:
            break
        prev = value
    h = channel_matrix(apv, realization)
    mis, noise = cmse_terms(h, w, a, noise_var)
    sol = InnerSolution(
        w=w,
        a=a,
        power_cap=power_cap,
        cmse=mis + noise,
        misalignment=mis,
        noise_term=noise,
        iterations=len(trace),
        trace=np.asarray(trace),
    )
    return apv, sol, np.asarray(trace)


def write_ao_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        fh.write("round,cmse\n")
        for i, value in enumerate(np.asarray(trace)):
            fh.write(f"{i},{value!r}\n")
