"""Computation-MSE objective and the inner-loop alternating optimization.

The computation MSE (CMSE) of recovering the sum of K user symbols through a
combined M-antenna receiver is

    CMSE = sum_k |a_k w^H h_k - 1|^2 + sigma^2 ||w||^2,

with per-user transmit coefficients ``a`` capped at ``|a_k|^2 <= P_c``.  For a
fixed antenna layout both blocks have closed-form minimizers: ``w`` solves a
regularized Hermitian system and each ``a_k`` is a phase-reversed, magnitude-
clipped inversion of ``b_k = w^H h_k``.  Alternating the two yields a
monotonically non-increasing CMSE sequence.

Channel matrices are (K, M) complex arrays with row k holding user k's channel
vector; batched variants take (B, K, M) stacks.  Powers are in milliwatts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NoiseSpec:
    """Receiver noise variance sigma^2 in milliwatts."""

    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("noise variance must be positive")


@dataclass(frozen=True)
class InnerConfig:
    """Stopping rule for the alternating inner loop."""

    tol: float = 1e-6
    max_iter: int = 100

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")


@dataclass
class InnerSolution:
    """Converged combiner/coefficients and the CMSE they achieve."""

    w: np.ndarray
    a: np.ndarray
    power_cap: float
    cmse: float
    misalignment: float
    noise_term: float
    iterations: int
    trace: np.ndarray = field(default=None)


def _check_dims(channels, w, a):
    channels = np.asarray(channels, dtype=complex)
    w = np.asarray(w, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if channels.ndim != 2:
        raise ValueError("channels must be a (K, M) array")
    k, m = channels.shape
    if w.shape != (m,) or a.shape != (k,):
        raise ValueError(
            f"dimension mismatch: channels {channels.shape}, w {w.shape}, a {a.shape}"
        )
    return channels, w, a


def cmse_terms(channels, w, a, noise_var: float):
    """Misalignment and noise parts of the CMSE, returned separately."""
    channels, w, a = _check_dims(channels, w, a)
    b = channels @ w.conj()  # b_k = w^H h_k
    mis = float(np.sum(np.abs(a * b - 1.0) ** 2))
    noise = float(noise_var * np.vdot(w, w).real)
    return mis, noise


def cmse(channels, w, a, noise_var: float) -> float:
    """Closed-form CMSE, sum of the misalignment and noise terms."""
    mis, noise = cmse_terms(channels, w, a, noise_var)
    return mis + noise


def monte_carlo_cmse(
    channels, w, a, noise_var: float, n_samples: int, rng: np.random.Generator
) -> float:
    """Simulation estimate of E|x_hat - x|^2 with Gaussian symbols and noise.

    Serves as an independent check on the closed-form expression: symbols are
    drawn i.i.d. CN(0, 1), noise CN(0, sigma^2 I).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    channels, w, a = _check_dims(channels, w, a)
    k, m = channels.shape
    coeff = a * (channels @ w.conj()) - 1.0  # per-user misalignment coefficients
    s = (rng.standard_normal((n_samples, k)) + 1j * rng.standard_normal((n_samples, k))) / np.sqrt(2.0)
    n = (rng.standard_normal((n_samples, m)) + 1j * rng.standard_normal((n_samples, m))) * np.sqrt(noise_var / 2.0)
    err = s @ coeff + n @ w.conj()
    return float(np.mean(np.abs(err) ** 2))


def hermitian_solve(matrix, rhs):
    """Solve A x = b for Hermitian positive definite A via Cholesky.

    Supports stacked inputs: ``matrix`` of shape (..., M, M) with matching
    (..., M) right-hand sides.  Raises ``numpy.linalg.LinAlgError`` when the
    factorization fails and ``ValueError`` when A is not Hermitian.
    """
    a = np.asarray(matrix, dtype=complex)
    b = np.asarray(rhs, dtype=complex)
    herm_gap = np.max(np.abs(a - a.conj().swapaxes(-1, -2)))
    scale = max(np.max(np.abs(a)), 1.0)
    if herm_gap > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    low = np.linalg.cholesky(a)  # raises LinAlgError if not positive definite
    y = np.linalg.solve(low, b[..., None])
    x = np.linalg.solve(low.conj().swapaxes(-1, -2), y)
    return x[..., 0]


def optimal_combiner(channels, a, noise_var: float) -> np.ndarray:
    """Closed-form MMSE receive combiner for fixed transmit coefficients.

    Solves (sum_k |a_k|^2 h_k h_k^H + sigma^2 I) w = sum_k a_k h_k.
    """
    channels = np.asarray(channels, dtype=complex)
    a = np.asarray(a, dtype=complex)
    k, m = channels.shape
    ht = channels.T  # (M, K), columns h_k
    gram = (ht * np.abs(a) ** 2) @ ht.conj().T + noise_var * np.eye(m)
    rhs = ht @ a
    return hermitian_solve(gram, rhs)


def optimal_coeffs(channels, w, power_cap: float) -> np.ndarray:
    """Per-user optimal transmit coefficients for a fixed combiner.

    a_k = min(sqrt(P_c), 1/|b_k|) e^{-j angle(b_k)} with b_k = w^H h_k; a zero
    b_k gets the full power with zero phase (any phase is optimal there).
    """
    if power_cap <= 0:
        raise ValueError("power_cap must be positive")
    channels = np.asarray(channels, dtype=complex)
    w = np.asarray(w, dtype=complex)
    b = channels @ w.conj()
    mag = np.abs(b)
    root_p = np.sqrt(power_cap)
    nonzero = mag > 0
    amp = np.full(b.shape, root_p)
    np.minimum(root_p, np.divide(1.0, mag, out=np.full_like(mag, np.inf), where=nonzero), out=amp, where=nonzero)
    unit = np.ones(b.shape, dtype=complex)
    np.divide(b.conj(), mag, out=unit, where=nonzero)
    return amp * unit


def inner_loop(
    channels,
    noise_var: float,
    power_cap: float,
    init=None,
    config: InnerConfig = InnerConfig(),
) -> InnerSolution:
    """Alternate the two closed-form updates until the CMSE decrement < tol.

    ``init`` may be a ``(w, a)`` pair; by default every user starts at full
    power and ``w`` is derived from that.  The CMSE trace is non-increasing.
    """
    channels = np.asarray(channels, dtype=complex)
    batch = channels[None, :, :]
    if init is not None:
        w0, a0 = init
        init_batch = (np.asarray(w0, dtype=complex)[None, :], np.asarray(a0, dtype=complex)[None, :])
    else:
        init_batch = None
    w, a, value, iters, trace = inner_loop_batch(
        batch, noise_var, power_cap, init=init_batch, config=config, keep_trace=True
    )
    mis, noise = cmse_terms(channels, w[0], a[0], noise_var)
    if not np.isfinite(value[0]):
        raise FloatingPointError("inner loop produced a non-finite CMSE")
    return InnerSolution(
        w=w[0],
        a=a[0],
        power_cap=power_cap,
        cmse=float(value[0]),
        misalignment=mis,
        noise_term=noise,
        iterations=int(iters[0]),
        trace=np.asarray(trace[0]),
    )


def inner_loop_batch(
    channel_batch,
    noise_var: float,
    power_cap: float,
    init=None,
    config: InnerConfig = InnerConfig(),
    keep_trace: bool = False,
):
    """Run the inner loop on a (B, K, M) stack of channel matrices at once.

    Converged instances are frozen so results are identical to running each
    instance alone.  Returns ``(w, a, cmse, iterations, traces)`` where ``w``
    is (B, M), ``a`` is (B, K) and ``traces`` is a list of per-instance CMSE
    sequences (empty unless ``keep_trace``).
    """
    h = np.asarray(channel_batch, dtype=complex)
    if h.ndim != 3:
        raise ValueError("channel batch must have shape (B, K, M)")
    nb, k, m = h.shape
    ht = h.swapaxes(1, 2)  # (B, M, K)
    eye = noise_var * np.eye(m)

    if init is not None:
        w, a = (np.array(init[0], dtype=complex), np.array(init[1], dtype=complex))
    else:
        a = np.full((nb, k), np.sqrt(power_cap), dtype=complex)
        w = np.zeros((nb, m), dtype=complex)

    def batch_cmse(h_, w_, a_):
        b = np.einsum("bkm,bm->bk", h_, w_.conj())
        mis = np.sum(np.abs(a_ * b - 1.0) ** 2, axis=1)
        return mis + noise_var * np.sum(np.abs(w_) ** 2, axis=1)

    def combiner_update(w_, a_, active):
        gram = (ht[active] * (np.abs(a_[active]) ** 2)[:, None, :]) @ h[active].conj() + eye
        rhs = np.einsum("bmk,bk->bm", ht[active], a_[active])
        w_[active] = hermitian_solve(gram, rhs)

    def coeff_update(w_, a_, active):
        b = np.einsum("bkm,bm->bk", h[active], w_[active].conj())
        mag = np.abs(b)
        root_p = np.sqrt(power_cap)
        nonzero = mag > 0
        amp = np.full(b.shape, root_p)
        np.minimum(root_p, np.divide(1.0, mag, out=np.full_like(mag, np.inf), where=nonzero), out=amp, where=nonzero)
        unit = np.ones(b.shape, dtype=complex)
        np.divide(b.conj(), mag, out=unit, where=nonzero)
        a_[active] = amp * unit

    active = np.ones(nb, dtype=bool)
    prev = np.full(nb, np.inf)
    iters = np.zeros(nb, dtype=int)
    traces = [[] for _ in range(nb)] if keep_trace else []
    value = np.empty(nb)
    for _ in range(config.max_iter):
        combiner_update(w, a, active)
        coeff_update(w, a, active)
        value[active] = batch_cmse(h[active], w[active], a[active])
        if not np.all(np.isfinite(value[active])):
            raise FloatingPointError("inner loop produced a non-finite CMSE")
        if keep_trace:
            for i in np.nonzero(active)[0]:
                traces[i].append(value[i])
        iters[active] += 1
        done = prev[active] - value[active] < config.tol
        idx = np.nonzero(active)[0]
        prev[idx] = value[idx]
        active[idx[done]] = False
        if not active.any():
            break
    return w, a, prev.copy(), iters, traces
