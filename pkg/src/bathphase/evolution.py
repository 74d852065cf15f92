"""
Time evolution of the reduced spin density matrix.

Closed-form propagation for the thermal and squeezed-thermal baths lives
next to a general adaptive integrator of the master equation; the latter is
only used to check the former.

In the interaction picture the master equation reduces to

    rho11' = 2 C+ - 2 (C+ + C-) rho11
    rho12' = -(C+ + C-) rho12 - D(t) conj(rho12)

with ``D(t) = |D| exp(i (2 (Omega - omega_n) t - phi))``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._dopri import IntegrationError, integrate
from .model import (
    DensityMatrix,
    DomainError,
    LindbladCoefficients,
    PhysicalParams,
    coefficients,
    squeezed_coefficients,
    thermal_coefficients,
)

__all__ = [
    "IntegrationError",
    "NoRelaxationError",
    "OffDiagSolution",
    "Trajectory",
    "evolve_thermal_analytic",
    "evolve_squeezed_analytic",
    "solve_offdiagonal",
    "analytic_states",
    "analytic_trajectory",
    "to_schrodinger",
    "to_interaction",
    "rotate_to_schrodinger",
    "lindblad_rhs",
    "integrate_numeric",
    "steady_state",
    "slowest_rate",
]

SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
_SERIES_CUTOFF = 1e-4


class NoRelaxationError(DomainError):
    """The bath does not relax the spin (C+ + C- = 0)."""


def _entries(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.entries
    return np.asarray(rho, dtype=complex)


@dataclass(frozen=True)
class OffDiagSolution:
    """``rho12(t) = (a1 e^{st} + a2 e^{-st}) e^{-decay t + i detuning t}``.

    ``u0`` and ``du0`` are the value and slope of the bracket at ``t = 0``;
    ``a1``/``a2`` are ``None`` when ``s == 0`` exactly, where the exponential
    form degenerates to ``u0 + du0 t``.
    """

    s: complex
    a1: complex | None
    a2: complex | None
    decay: float
    detuning: float
    u0: complex
    du0: complex

    def bracket(self, t):
        """``u(t) e^{-decay t}`` evaluated without overflow."""
        t = np.asarray(t, dtype=float)
        s = self.s
        st = s * t
        e_plus = np.exp((s - self.decay) * t)
        e_minus = np.exp(-(s + self.decay) * t)
        cosh_part = 0.5 * (e_plus + e_minus)
        small = np.abs(st) < _SERIES_CUTOFF
        with np.errstate(divide="ignore", invalid="ignore"):
            sinhc_far = (e_plus - e_minus) / (2.0 * s) if s != 0 else np.zeros_like(e_plus)
        sq = st * st
        sinhc_near = np.exp(-self.decay * t) * t * (1.0 + sq / 6.0 + sq * sq / 120.0)
        sinhc_part = np.where(small, sinhc_near, sinhc_far)
        return self.u0 * cosh_part + self.du0 * sinhc_part

    def rho12(self, t):
        t = np.asarray(t, dtype=float)
        return self.bracket(t) * np.exp(1j * self.detuning * t)


def solve_offdiagonal(rho0, coeffs: LindbladCoefficients) -> OffDiagSolution:
    """Constants of the off-diagonal solution fixed by ``rho12(0)``.

    With ``rho12 = u(t) e^{-decay t + i detuning t}`` the master equation gives
    ``u' = -i detuning u - |D| e^{-i phi} conj(u)`` and hence ``u'' = s**2 u``.
    """
    m = _entries(rho0)
    u0 = complex(m[0, 1])
    du0 = -1j * coeffs.detuning * u0 - coeffs.d_magnitude * np.exp(-1j * coeffs.phi) * np.conj(u0)
    s = complex(np.sqrt(complex(coeffs.d_magnitude**2 - coeffs.detuning**2)))
    if s == 0:
        a1 = a2 = None
    else:
        a1 = 0.5 * (u0 + du0 / s)
        a2 = 0.5 * (u0 - du0 / s)
    return OffDiagSolution(s, a1, a2, coeffs.decay, coeffs.detuning, u0, complex(du0))


def _populations(rho11_0: float, coeffs: LindbladCoefficients, t: np.ndarray) -> np.ndarray:
    gamma = coeffs.decay
    if gamma == 0:
        return np.full_like(t, rho11_0)
    rho11_inf = coeffs.c_plus / gamma
    return rho11_inf + (rho11_0 - rho11_inf) * np.exp(-2.0 * gamma * t)


def _assemble(rho11, rho12) -> np.ndarray:
    out = np.empty(np.shape(rho11) + (2, 2), dtype=complex)
    out[..., 0, 0] = rho11
    out[..., 1, 1] = 1.0 - rho11
    out[..., 0, 1] = rho12
    out[..., 1, 0] = np.conj(rho12)
    return out


def analytic_states(rho0, coeffs: LindbladCoefficients, times) -> np.ndarray:
    """Interaction-picture states, shape ``(len(times), 2, 2)``."""
    m = _entries(rho0)
    t = np.asarray(times, dtype=float)
    rho11 = _populations(float(m[0, 0].real), coeffs, t)
    if coeffs.d_magnitude == 0.0:
        rho12 = m[0, 1] * np.exp(-coeffs.decay * t)
    else:
        rho12 = solve_offdiagonal(m, coeffs).rho12(t)
    return _assemble(rho11, rho12)


def evolve_thermal_analytic(rho0, p: PhysicalParams, t: float) -> DensityMatrix:
    """Interaction-picture state at time ``t`` in a thermal bath (``r`` ignored)."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return DensityMatrix(analytic_states(rho0, thermal_coefficients(p), [t])[0], "interaction")


def evolve_squeezed_analytic(rho0, p: PhysicalParams, t: float) -> DensityMatrix:
    """Interaction-picture state at time ``t`` in a squeezed-thermal bath."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return DensityMatrix(analytic_states(rho0, squeezed_coefficients(p), [t])[0], "interaction")


def rotate_to_schrodinger(states: np.ndarray, omega_n: float, times) -> np.ndarray:
    """Lab-frame states: ``rho12 -> rho12 e^{+i omega_n t}``, populations unchanged."""
    out = np.array(states, dtype=complex, copy=True)
    phase = np.exp(1j * omega_n * np.asarray(times, dtype=float))
    out[..., 0, 1] *= phase
    out[..., 1, 0] *= np.conj(phase)
    return out


def to_schrodinger(rho_i: DensityMatrix, omega_n: float, t: float) -> DensityMatrix:
    """Undo the frame rotation ``exp(-i H_N t)`` with ``H_N = -omega_n sz / 2``."""
    if rho_i.picture != "interaction":
        raise DomainError(f"expected an interaction-picture state, got {rho_i.picture!r}")
    return DensityMatrix(rotate_to_schrodinger(rho_i.entries, omega_n, t), "schrodinger")


def to_interaction(rho_s: DensityMatrix, omega_n: float, t: float) -> DensityMatrix:
    if rho_s.picture != "schrodinger":
        raise DomainError(f"expected a Schrodinger-picture state, got {rho_s.picture!r}")
    return DensityMatrix(rotate_to_schrodinger(rho_s.entries, omega_n, -t), "interaction")


def lindblad_rhs(rho, coeffs: LindbladCoefficients, t: float) -> np.ndarray:
    """Right-hand side of the interaction-picture master equation (no Lamb shift)."""
    r = _entries(rho)
    sp, sm = SIGMA_PLUS, SIGMA_MINUS
    pm = sp @ sm
    mp = sm @ sp
    d = coeffs.d_magnitude * np.exp(1j * (2.0 * coeffs.detuning * t - coeffs.phi))
    return (
        coeffs.c_minus * (2.0 * sm @ r @ sp - r @ pm - pm @ r)
        + coeffs.c_plus * (2.0 * sp @ r @ sm - r @ mp - mp @ r)
        - d * (sp @ r @ sp)
        - np.conj(d) * (sm @ r @ sm)
    )


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class Trajectory:
    """States on a time grid in both pictures."""

    times: np.ndarray
    states_interaction: np.ndarray
    coefficients: LindbladCoefficients
    params: PhysicalParams | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states_interaction, dtype=complex)
        if states.shape != (len(times), 2, 2):
            raise ValueError(f"states shape {states.shape} does not match {len(times)} times")
        if np.any(np.diff(times) <= 0):
            raise ValueError("time grid must be strictly ascending")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states_interaction", states)

    @property
    def states_schrodinger(self) -> np.ndarray:
        return rotate_to_schrodinger(self.states_interaction, self.coefficients.omega_n, self.times)

    def __len__(self):
        return len(self.times)

    def state(self, i: int, picture: str = "schrodinger") -> DensityMatrix:
        m = self.states_interaction[i]
        if picture == "schrodinger":
            m = rotate_to_schrodinger(m, self.coefficients.omega_n, self.times[i])
        return DensityMatrix(m, picture)


def analytic_trajectory(rho0, p: PhysicalParams, times, environment: str = "thermal") -> Trajectory:
    c = coefficients(p, environment)
    return Trajectory(np.asarray(times, dtype=float), analytic_states(rho0, c, times), c, p)


def _superoperators(coeffs: LindbladCoefficients):
    """``(L0, Lp, Lm)`` with ``vec(rhs) = (L0 + D(t) Lp + conj(D(t)) Lm) vec(rho)``.

    ``L0`` is read off :func:`lindblad_rhs` with the squeezing term switched off.
    """
    basis = np.eye(4, dtype=complex).reshape(4, 2, 2)
    static = replace(coeffs, d_magnitude=0.0)
    l0 = np.stack([lindblad_rhs(e, static, 0.0).ravel() for e in basis], axis=1)
    lp = np.stack([-(SIGMA_PLUS @ e @ SIGMA_PLUS).ravel() for e in basis], axis=1)
    lm = np.stack([-(SIGMA_MINUS @ e @ SIGMA_MINUS).ravel() for e in basis], axis=1)
    return l0, lp, lm


def integrate_numeric(
    rho0,
    coeffs: LindbladCoefficients,
    times,
    rtol: float = 1e-9,
    atol: float = 1e-11,
    params: PhysicalParams | None = None,
) -> Trajectory:
    """Adaptive Dormand-Prince integration of :func:`lindblad_rhs`.

    Each accepted step is re-Hermitized. Raises :class:`IntegrationError`
    on step-size underflow.
    """
    times = np.asarray(times, dtype=float)
    if times[0] != 0:
        raise DomainError("time grid must start at 0")
    l0, lp, lm = _superoperators(coeffs)

    def rhs(t, y):
        d = coeffs.d_magnitude * np.exp(1j * (2.0 * coeffs.detuning * t - coeffs.phi))
        return (l0 + d * lp + np.conj(d) * lm) @ y

    def project(y):
        m = y.reshape(2, 2)
        return (0.5 * (m + m.conj().T)).ravel()

    states = integrate(rhs, _entries(rho0).ravel(), times, rtol=rtol, atol=atol, project=project)
    return Trajectory(times, states.reshape(-1, 2, 2), coeffs, params)


def steady_state(coeffs: LindbladCoefficients) -> DensityMatrix:
    gamma = coeffs.decay
    if gamma <= 0:
        raise NoRelaxationError("C+ + C- = 0: no relaxation, steady state undefined (g = 0)")
    return DensityMatrix(np.diag([coeffs.c_plus / gamma, coeffs.c_minus / gamma]), "interaction")


def slowest_rate(coeffs: LindbladCoefficients) -> float:
    """Slowest decay rate of the solution: ``C+ + C- - |Re s|``.

    Positive whenever the off-diagonal entry eventually vanishes.
    """
    s = np.sqrt(complex(coeffs.d_magnitude**2 - coeffs.detuning**2))
    return coeffs.decay - abs(s.real)
