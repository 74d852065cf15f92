"""
Kinematic geometric phase of a mixed qubit state.

For a lab-frame trajectory ``rho(t)`` with eigenpairs ``(lambda_k, |k(t)>)``

    Phi(tau) = arg sum_k sqrt(lambda_k(0) lambda_k(tau)) <k(0)|k(tau)>
                         exp(-int_0^tau <k|dk/dt> dt)

The connection integral is accumulated from overlaps of neighbouring
eigenvectors, ``int <k|dk/dt> dt ~ sum_i i arg <k(t_i)|k(t_{i+1})>``, which is
gauge invariant once combined with ``<k(0)|k(tau)>``. The discretization error
is O(dt^2); :func:`phase_series` removes the leading term by Richardson
extrapolation between a grid and its every-other-point subgrid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import analytic_trajectory, slowest_rate
from .model import (
    DensityMatrix,
    DomainError,
    InitialState,
    PhysicalParams,
    bloch_vector,
    coefficients,
    initial_density,
)

__all__ = [
    "DegeneracyError",
    "ConvergenceError",
    "EigenFrame",
    "PhaseSeries",
    "PhaseLimit",
    "eigen_2x2",
    "eigen_frames",
    "symmetric_gauge_frames",
    "connection_phase",
    "tong_from_frames",
    "tong_series",
    "tong_phase",
    "thermal_exponent_analytic",
    "time_grid",
    "phase_series",
    "phase_at_infinity",
    "settling_time",
    "oscillation_period",
]

DEGENERACY_TOL = 1e-12
# initial eigenvalues at or below this carry no weight (pure-state branch)
WEIGHT_TOL = 1e-14
# below this decay over the interval the closed-form exponent loses digits
_SMALL_DECAY = 1e-3
_GAUSS_NODES = 24


class DegeneracyError(DomainError):
    """Eigenvector tracking is undefined at a degenerate (maximally mixed) point."""


class ConvergenceError(RuntimeError):
    """The phase did not settle before the time cap."""

    def __init__(self, message, limit=None):
        super().__init__(message)
        self.limit = limit


@dataclass(frozen=True)
class EigenFrame:
    lambda_plus: float
    lambda_minus: float
    v_plus: np.ndarray
    v_minus: np.ndarray
    a_tau: float
    delta_tau: float


def _eigvecs(rho: np.ndarray):
    """Closed-form eigenvectors for a stack of 2x2 density matrices.

    Returns ``(a, delta, vecs)`` with ``vecs[..., k, :]`` the eigenvector of
    branch ``k`` (0 = larger eigenvalue). Gauge: first nonzero component real
    and positive.
    """
    delta = 0.5 * (rho[..., 0, 0] - rho[..., 1, 1]).real
    b = rho[..., 0, 1]
    ab = np.abs(b)
    a = np.sqrt(delta**2 + ab**2)
    unit = np.where(ab > 0, np.exp(-1j * np.angle(b)), 1.0)

    # +A branch: (A+delta, b*) for delta >= 0, else (|b|, (A-delta) b*/|b|)
    up = delta >= 0
    p0 = np.where(up, a + delta, ab)
    p1 = np.where(up, np.conj(b), (a - delta) * unit)
    # -A branch: (A-delta, -b*) for delta <= 0, else (|b|, -(A+delta) b*/|b|)
    m0 = np.where(~up, a - delta, ab)
    m1 = np.where(~up, -np.conj(b), -(a + delta) * unit)

    vecs = np.empty(rho.shape[:-2] + (2, 2), dtype=complex)
    vecs[..., 0, 0], vecs[..., 0, 1] = p0, p1
    vecs[..., 1, 0], vecs[..., 1, 1] = m0, m1
    norms = np.linalg.norm(vecs, axis=-1, keepdims=True)
    degenerate = norms[..., 0] == 0
    vecs = np.where(norms > 0, vecs / np.where(norms > 0, norms, 1.0), 0.0)
    if np.any(degenerate):
        basis = np.eye(2, dtype=complex)
        vecs[degenerate[..., 0]] = basis
    return a, delta, vecs


def eigen_2x2(rho) -> EigenFrame:
    """Eigen-decomposition ``lambda = 1/2 +- A`` with ``A = sqrt(1/4 - det rho)``."""
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    a, delta, vecs = _eigvecs(m)
    a = float(a)
    return EigenFrame(0.5 + a, 0.5 - a, vecs[0].copy(), vecs[1].copy(), a, float(delta))


def eigen_frames(states: np.ndarray):
    """Eigenvalues ``(n, 2)`` and continuity-tracked eigenvectors ``(n, 2, 2)``.

    Branch labels follow the eigenvector with maximal overlap from one sample to
    the next, so a branch keeps its identity through an eigenvalue crossing.
    """
    a, _, vecs = _eigvecs(np.asarray(states, dtype=complex))
    lam = np.stack([0.5 + a, 0.5 - a], axis=-1)
    if len(states) > 1:
        same = np.abs(np.einsum("ij,ij->i", vecs[:-1, 0].conj(), vecs[1:, 0]))
        cross = np.abs(np.einsum("ij,ij->i", vecs[:-1, 0].conj(), vecs[1:, 1]))
        parity = np.concatenate([[0], np.cumsum(cross > same) % 2]).astype(bool)
        if parity.any():
            vecs = vecs.copy()
            lam = lam.copy()
            vecs[parity] = vecs[parity][:, ::-1]
            lam[parity] = lam[parity][:, ::-1]
    return lam, vecs, a


def symmetric_gauge_frames(states: np.ndarray) -> np.ndarray:
    """Eigenvectors ``(e^{-ia/2} cos(b/2), e^{ia/2} sin(b/2))`` and their partners.

    ``b`` and ``a`` are the polar and (continuously unwrapped) azimuthal angles
    of the Bloch vector. This is the gauge in which the thermal connection has
    the closed form of :func:`thermal_exponent_analytic`.
    """
    n = bloch_vector(states)
    nhat = n / np.linalg.norm(n, axis=-1, keepdims=True)
    beta = np.arccos(np.clip(nhat[..., 2], -1.0, 1.0))
    alpha = np.unwrap(np.arctan2(nhat[..., 1], nhat[..., 0]))
    em, ep = np.exp(-0.5j * alpha), np.exp(0.5j * alpha)
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    vecs = np.empty(n.shape[:-1] + (2, 2), dtype=complex)
    vecs[..., 0, 0], vecs[..., 0, 1] = em * c, ep * s
    vecs[..., 1, 0], vecs[..., 1, 1] = -em * s, ep * c
    return vecs


def connection_phase(vecs: np.ndarray) -> np.ndarray:
    """``chi_k(t_j) = -sum_{i<j} arg <k(t_i)|k(t_{i+1})>`` for every branch.

    ``exp(i chi_k)`` approximates ``exp(-int <k|dk/dt> dt)``. Shape ``(n, 2)``.
    """
    steps = np.einsum("ikc,ikc->ik", vecs[:-1].conj(), vecs[1:])
    chi = np.zeros(vecs.shape[:2])
    chi[1:] = -np.cumsum(np.angle(steps), axis=0)
    return chi


def _richardson(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    """Cancel the O(dt^2) term; tolerant of 2*pi offsets between the two sums."""
    diff = fine - coarse
    diff = (diff + np.pi) % (2 * np.pi) - np.pi
    return fine + diff / 3.0


def _check_degeneracy(a, lam0, times):
    if lam0[1] <= WEIGHT_TOL:
        return
    if a[0] < DEGENERACY_TOL:
        raise DegeneracyError("maximally mixed initial state: eigenbasis undefined at tau=0")
    bad = np.nonzero(a < DEGENERACY_TOL)[0]
    if bad.size:
        t = times[bad[0]] if times is not None else bad[0]
        raise DegeneracyError(f"degenerate eigenvalues at t={t:.6g}; eigenvector tracking undefined")


def tong_from_frames(lam: np.ndarray, vecs: np.ndarray, chi: np.ndarray | None = None) -> np.ndarray:
    """Complex sum whose argument is the geometric phase, one value per sample."""
    if chi is None:
        chi = connection_phase(vecs)
    lam = np.clip(lam, 0.0, None)
    total = np.zeros(len(lam), dtype=complex)
    for k in (0, 1):
        if lam[0, k] <= WEIGHT_TOL:
            continue
        weight = np.sqrt(lam[0, k] * lam[:, k])
        overlap = np.einsum("c,ic->i", vecs[0, k].conj(), vecs[:, k])
        total += weight * overlap * np.exp(1j * chi[:, k])
    return total


@dataclass(frozen=True)
class PhaseSeries:
    taus: np.ndarray
    phi_principal: np.ndarray
    phi_unwrapped: np.ndarray
    grid_resolution: int
    phi_infinity: float | None = None
    converged: bool = False


def _series_from_sum(taus, z, resolution) -> PhaseSeries:
    principal = np.angle(z)
    principal = np.where(principal <= -np.pi, np.pi, principal)
    unwrapped = np.unwrap(principal)
    principal = np.where(taus == 0, 0.0, principal)
    unwrapped = np.where(taus == 0, 0.0, unwrapped)
    return PhaseSeries(taus, principal, unwrapped, resolution)


def tong_series(traj, extrapolate: bool = False, resolution: int = 0) -> PhaseSeries:
    """Geometric phase along a trajectory (lab-frame states are used).

    With ``extrapolate`` the grid must have an odd number of uniformly spaced
    points; the result lives on every other sample.
    """
    times = traj.times
    states = traj.states_schrodinger
    lam, vecs, a = eigen_frames(states)
    _check_degeneracy(a, lam[0], times)
    chi = connection_phase(vecs)
    if extrapolate:
        if len(times) % 2 == 0:
            raise ValueError("extrapolation needs an odd number of samples")
        chi = _richardson(chi[::2], connection_phase(vecs[::2]))
        lam, vecs, times = lam[::2], vecs[::2], times[::2]
    return _series_from_sum(times, tong_from_frames(lam, vecs, chi), resolution)


def tong_phase(traj, upto_index: int = -1):
    """``(principal, unwrapped)`` phase at sample ``upto_index``."""
    series = tong_series(traj)
    return float(series.phi_principal[upto_index]), float(series.phi_unwrapped[upto_index])


def _log_terms(delta0, b0sq, delta_inf, gamma, tau, p, m):
    """``F(tau) - F(0)`` with ``F = log|A - delta + 2 delta_inf| - log|2 (delta0 - delta_inf) + b0^2 / (A + delta)|``."""
    decay = math.exp(-2.0 * gamma * tau)

    def args(d, growth):
        a = math.sqrt(d * d + b0sq / growth)
        # b0^2 / (a + d) equals (a - d) * growth; pick the form without cancellation
        ratio = b0sq / (a + d) if d > 0 else (a - d) * growth
        return a - d + 2.0 * delta_inf, 2.0 * (delta0 - delta_inf) + ratio

    start = args(delta0, 1.0)
    end = args(delta_inf + (delta0 - delta_inf) * decay, 1.0 / decay)
    # both arguments keep their sign along a trajectory, so log|.| is the
    # continuation; a zero or a sign flip means the formula does not apply
    for s0, s1 in zip(start, end):
        if s0 == 0 or s1 == 0 or (s0 > 0) != (s1 > 0):
            raise DomainError(
                f"log argument changes sign or vanishes ({s0:.6g} -> {s1:.6g}) for "
                f"T={p.temperature}, g={p.g}, omega_n={p.omega_n}, rho0={m.tolist()}"
            )
    return math.log(abs(end[0] / start[0])) - math.log(abs(end[1] / start[1]))


def thermal_exponent_analytic(p: PhysicalParams, rho0, tau: float):
    """Closed-form ``-int_0^tau <k|dk/dt> dt`` for the thermal bath, ``k = +, -``.

    Valid in the symmetric gauge of :func:`symmetric_gauge_frames`; returns
    ``(-i w/2 X, +i w/2 X)`` with ``X = int_0^tau cos(beta) dt``, where
    ``X = tau + (F(tau) - F(0)) / (2 (C+ + C-))``.
    """
    m = rho0.entries if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    c = coefficients(p, "thermal")
    gamma = c.decay
    delta0 = 0.5 * float((m[0, 0] - m[1, 1]).real)
    b0sq = float(abs(m[0, 1]) ** 2)
    a0 = math.sqrt(delta0**2 + b0sq)
    if a0 == 0:
        raise DegeneracyError("maximally mixed initial state has no eigenbasis")
    if gamma == 0:
        x = tau * delta0 / a0
    else:
        delta_inf = c.c_plus / gamma - 0.5
        if gamma * tau < _SMALL_DECAY:
            # the log difference cancels to roundoff here; integrate cos(beta) directly
            nodes, weights = np.polynomial.legendre.leggauss(_GAUSS_NODES)
            e = np.exp(-gamma * tau * (nodes + 1.0))
            d = delta_inf + (delta0 - delta_inf) * e
            x = 0.5 * tau * float(np.sum(weights * d / np.sqrt(d * d + b0sq * e)))
        else:
            x = tau + _log_terms(delta0, b0sq, delta_inf, gamma, tau, p, m) / (2.0 * gamma)
    half = 0.5j * p.omega_n * x
    return -half, half


def _rates(coeffs):
    """Slow and fast angular-frequency scales that the grid must resolve."""
    s = np.sqrt(complex(coeffs.d_magnitude**2 - coeffs.detuning**2))
    slow = coeffs.omega_n
    if coeffs.d_magnitude > 0:
        # lab-frame coherence rotates at omega_n + detuning +- |Im s|
        slow = max(slow, abs(coeffs.omega_n + coeffs.detuning) + abs(s.imag))
    fast = max(2.0 * coeffs.decay, coeffs.decay + abs(s.real))
    return slow, fast, coeffs.decay + abs(s.real)


def time_grid(coeffs, tau_max: float, steps_per_period: int = 512) -> np.ndarray:
    """Piecewise-uniform grid from 0 covering at least ``tau_max``.

    The step resolves the Larmor period (and the squeezing-shifted coherence
    frequency). When relaxation is faster than that, an initial segment with a
    finer step covers the fast transients for 25 of their e-folding times.
    Segment lengths do not depend on ``steps_per_period``, so doubling it
    yields a grid containing the original one.
    """
    slow, fast, fast_mode = _rates(coeffs)
    pieces = []
    start = 0.0
    if fast > slow:
        t_fast = 25.0 / min(2.0 * coeffs.decay, fast_mode)
        if t_fast < tau_max:
            cycles = int(math.ceil(t_fast * fast / (2.0 * np.pi)))
            n = cycles * steps_per_period
            pieces.append(np.arange(n) * (t_fast / n))
            start = t_fast
    period = 2.0 * np.pi / slow
    cycles = max(1, int(math.ceil((tau_max - start) / period - 1e-9)))
    n = cycles * steps_per_period
    pieces.append(start + np.arange(n + 1) * (period / steps_per_period))
    return np.concatenate(pieces)


def phase_series(
    p: PhysicalParams,
    state: InitialState,
    environment: str = "thermal",
    tau_max: float | None = None,
    steps_per_period: int = 512,
    extrapolate: bool = True,
) -> PhaseSeries:
    """Geometric phase sampled on :func:`time_grid` from analytic trajectories."""
    c = coefficients(p, environment)
    if tau_max is None:
        tau_max = 10 * 2 * np.pi / p.omega_n
    coarse = time_grid(c, tau_max, steps_per_period)
    rho0 = initial_density(state)
    if extrapolate:
        fine = np.empty(2 * len(coarse) - 1)
        fine[::2] = coarse
        fine[1::2] = 0.5 * (coarse[:-1] + coarse[1:])
        traj = analytic_trajectory(rho0, p, fine, environment)
    else:
        traj = analytic_trajectory(rho0, p, coarse, environment)
    return tong_series(traj, extrapolate=extrapolate, resolution=steps_per_period)


@dataclass(frozen=True)
class PhaseLimit:
    phi_infinity: float
    phi_principal: float
    converged: bool
    tau_converged: float
    tau_max: float
    tail_range: float
    series: PhaseSeries | None = None


def _suffix_range(values: np.ndarray) -> np.ndarray:
    """``max(values[j:]) - min(values[j:])`` for every ``j``."""
    rev = values[::-1]
    return (np.maximum.accumulate(rev) - np.minimum.accumulate(rev))[::-1]


def phase_at_infinity(
    p: PhysicalParams,
    state: InitialState,
    environment: str = "thermal",
    steps_per_period: int = 512,
    window_periods: int = 5,
    tol: float = 1e-6,
    keep_series: bool = False,
) -> PhaseLimit:
    """Long-time limit of the unwrapped geometric phase.

    The horizon doubles until the phase varies by less than ``tol`` over the
    final ``window_periods`` Larmor periods, up to a cap of
    ``30 / rate + 10`` periods with ``rate`` the slowest relaxation rate.
    ``tau_converged`` is the earliest window end from which the phase never
    leaves a band of width ``tol``.
    """
    if p.g <= 0:
        raise DomainError("g must be > 0 for the phase to settle")
    c = coefficients(p, environment)
    rate = slowest_rate(c)
    if rate <= 0:
        raise ConvergenceError(f"off-diagonal entry does not decay (C+ + C- - |Re s| = {rate:.3g})")
    window = window_periods * 2 * np.pi / p.omega_n
    cap = 30.0 / rate + 2 * window
    tau = min(cap, 8.0 / rate + 2 * window)
    while True:
        series = phase_series(p, state, environment, tau, steps_per_period)
        taus, phi = series.taus, series.phi_unwrapped
        band = _suffix_range(phi)
        first = int(np.searchsorted(taus, taus[-1] - window, side="right")) - 1
        tail = float(band[max(first, 0)]) if taus[-1] >= window else float("inf")
        keep = series if keep_series else None
        if tail < tol:
            j = int(np.argmax(band < tol))
            limit = PhaseLimit(float(phi[-1]), float(series.phi_principal[-1]), True,
                               float(taus[j] + window), float(taus[-1]), tail, keep)
            return limit
        if tau >= cap:
            limit = PhaseLimit(float(phi[-1]), float(series.phi_principal[-1]), False,
                               float("nan"), float(taus[-1]), tail, keep)
            raise ConvergenceError(
                f"phase not settled by tau={taus[-1]:.6g}: range over last "
                f"{window_periods} periods is {tail:.3g} (tol {tol:g})",
                limit,
            )
        tau = min(cap, 2.0 * tau)


def settling_time(series: PhaseSeries, limit: float, tol: float = 1e-3, unwrapped: bool = True) -> float:
    """Earliest time after which the phase stays within ``tol`` of ``limit``."""
    phi = series.phi_unwrapped if unwrapped else series.phi_principal
    outside = np.nonzero(np.abs(phi - limit) > tol)[0]
    if outside.size == 0:
        return float(series.taus[0])
    last = outside[-1]
    if last + 1 >= len(series.taus):
        return float("inf")
    return float(series.taus[last + 1])


def oscillation_period(series: PhaseSeries, t_min: float = 0.0, t_max: float | None = None) -> float:
    """Mean spacing of successive maxima of the phase's time derivative."""
    taus, phi = series.taus, series.phi_unwrapped
    rate = np.gradient(phi, taus)
    sel = taus >= t_min
    if t_max is not None:
        sel &= taus <= t_max
    idx = np.nonzero(sel)[0]
    r = rate[idx]
    peaks = idx[1:-1][(r[1:-1] > r[:-2]) & (r[1:-1] >= r[2:])]
    if len(peaks) < 2:
        raise ValueError("fewer than two derivative maxima in the window")
    # parabolic refinement of each peak location
    dt = taus[peaks + 1] - taus[peaks]
    y0, y1, y2 = rate[peaks - 1], rate[peaks], rate[peaks + 1]
    denom = y0 - 2 * y1 + y2
    shift = np.where(denom != 0, 0.5 * (y0 - y2) / np.where(denom != 0, denom, 1.0), 0.0)
    locs = taus[peaks] + shift * dt
    return float(np.mean(np.diff(locs)))
