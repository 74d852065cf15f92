"""
Domain types and bath coefficients for a spin-1/2 nucleus in a bosonic bath.

Units: hbar = k_B = 1 throughout. Only ratios of ``omega_n``, ``temperature``
and ``g**2`` are physical, so every quantity here is a plain float in one
shared (arbitrary) energy unit.

Basis convention: index 0 is spin up along z (the lower-energy level of
``H_N = -omega_n * sigma_z / 2``), index 1 is spin down. ``I+`` maps down to up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "PhysicalParams",
    "InitialState",
    "DensityMatrix",
    "DensityReport",
    "LindbladCoefficients",
    "occupation_number",
    "thermal_coefficients",
    "squeezed_coefficients",
    "coefficients",
    "initial_density",
    "validate_density",
    "ENVIRONMENTS",
]

ENVIRONMENTS = ("thermal", "squeezed")


class DomainError(ValueError):
    """A parameter lies outside the physical domain of an operation."""


@dataclass(frozen=True)
class PhysicalParams:
    """Nucleus and bath parameters.

    Parameters
    ----------
    omega_n : float
        Larmor angular frequency of the nucleus, > 0.
    temperature : float
        Bath temperature (energy units), >= 0.
    g : float
        Real coupling amplitude, used for both the ``omega_n`` and the mirror
        mode ``2*Omega - omega_n``.
    Omega : float
        Half of the squeezing-carrier frequency. Defaults to ``3 * omega_n``.
    r : float
        Squeezing magnitude at ``omega_n``.
    phi : float
        Squeezing phase at ``omega_n`` in radians.
    """

    omega_n: float
    temperature: float
    g: float
    Omega: float | None = None
    r: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.Omega is None:
            object.__setattr__(self, "Omega", 3.0 * self.omega_n)
        for name in ("omega_n", "temperature", "g", "Omega", "r", "phi"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.omega_n <= 0:
            raise DomainError(f"omega_n must be > 0, got {self.omega_n}")
        if self.temperature < 0:
            raise DomainError(f"temperature must be >= 0, got {self.temperature}")
        if self.g < 0:
            raise DomainError(f"g must be >= 0, got {self.g}")
        if self.Omega <= 0:
            raise DomainError(f"Omega must be > 0, got {self.Omega}")
        if self.r < 0:
            raise DomainError(f"r must be >= 0, got {self.r}")

    @classmethod
    def from_ratios(
        cls,
        *,
        g2_over_omega: float | None = None,
        temp_over_omega: float | None = None,
        g2_over_temp: float | None = None,
        omega_over_temp: float | None = None,
        omega_n: float | None = None,
        temperature: float | None = None,
        Omega_over_omega: float = 3.0,
        r: float = 0.0,
        phi: float = 0.0,
    ) -> "PhysicalParams":
        """Build parameters from the dimensionless ratios used in figure captions.

        Exactly one energy scale is fixed: ``omega_n = 1`` by default, or
        ``temperature = 1`` when the ratios are quoted relative to ``k_B T``
        (``g2_over_temp`` / ``omega_over_temp``).

        >>> p = PhysicalParams.from_ratios(g2_over_omega=0.01, temp_over_omega=2.0)
        >>> (p.omega_n, p.temperature, round(p.g**2, 12))
        (1.0, 2.0, 0.01)
        """
        per_temp = g2_over_temp is not None or omega_over_temp is not None
        if omega_n is None and temperature is None:
            if per_temp:
                temperature = 1.0
            else:
                omega_n = 1.0
        if omega_n is None:
            if omega_over_temp is not None:
                omega_n = omega_over_temp * temperature
            elif temp_over_omega is not None:
                if temp_over_omega <= 0:
                    raise DomainError("temp_over_omega must be > 0 to fix omega_n")
                omega_n = temperature / temp_over_omega
            else:
                raise DomainError("cannot resolve omega_n from the given ratios")
        if temperature is None:
            if temp_over_omega is not None:
                temperature = temp_over_omega * omega_n
            elif omega_over_temp is not None:
                if omega_over_temp <= 0:
                    raise DomainError("omega_over_temp must be > 0 to fix temperature")
                temperature = omega_n / omega_over_temp
            else:
                raise DomainError("cannot resolve temperature from the given ratios")
        if g2_over_omega is not None:
            g2 = g2_over_omega * omega_n
        elif g2_over_temp is not None:
            g2 = g2_over_temp * temperature
        else:
            raise DomainError("a coupling ratio (g2_over_omega or g2_over_temp) is required")
        if g2 < 0:
            raise DomainError(f"g**2 must be >= 0, got {g2}")
        return cls(
            omega_n=float(omega_n),
            temperature=float(temperature),
            g=math.sqrt(g2),
            Omega=Omega_over_omega * omega_n,
            r=r,
            phi=phi,
        )


@dataclass(frozen=True)
class InitialState:
    """Bloch vector of length ``purity`` at polar angle ``theta`` in the xz-plane."""

    theta: float
    purity: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.purity <= 1.0:
            raise DomainError(f"purity must lie in [0, 1], got {self.purity}")


@dataclass(frozen=True)
class DensityMatrix:
    """A 2x2 density matrix tagged with its picture."""

    entries: np.ndarray
    picture: str = "schrodinger"

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (2, 2):
            raise DomainError(f"density matrix must be 2x2, got shape {entries.shape}")
        if self.picture not in ("interaction", "schrodinger"):
            raise DomainError(f"unknown picture {self.picture!r}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def rho11(self) -> float:
        return float(self.entries[0, 0].real)

    @property
    def rho12(self) -> complex:
        return complex(self.entries[0, 1])

    def bloch(self) -> np.ndarray:
        """Bloch vector ``(<sx>, <sy>, <sz>)``."""
        return bloch_vector(self.entries)

    def with_picture(self, picture: str) -> "DensityMatrix":
        return DensityMatrix(self.entries, picture)


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Bloch vector(s) of density matrices with trailing shape ``(2, 2)``."""
    rho = np.asarray(rho)
    x = 2.0 * rho[..., 0, 1].real
    y = -2.0 * rho[..., 0, 1].imag
    z = (rho[..., 0, 0] - rho[..., 1, 1]).real
    return np.stack([x, y, z], axis=-1)


@dataclass(frozen=True)
class DensityReport:
    hermiticity: float
    trace_error: float
    min_eigenvalue: float
    tol: float

    @property
    def hermitian(self) -> bool:
        return self.hermiticity <= self.tol

    @property
    def unit_trace(self) -> bool:
        return self.trace_error <= self.tol

    @property
    def positive(self) -> bool:
        return self.min_eigenvalue >= -self.tol

    @property
    def passed(self) -> bool:
        return self.hermitian and self.unit_trace and self.positive


def validate_density(rho, tol: float = 1e-12) -> DensityReport:
    """Residuals of the density-matrix invariants.

    Accepts a :class:`DensityMatrix`, a single 2x2 array or a stack of them;
    residuals are worst-case over the stack.
    """
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2)))))
    tr = float(np.max(np.abs(np.trace(m, axis1=-2, axis2=-1) - 1.0)))
    hm = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    min_eig = float(np.min(np.linalg.eigvalsh(hm)))
    return DensityReport(herm, tr, min_eig, tol)


@dataclass(frozen=True)
class LindbladCoefficients:
    """Rates of the reduced master equation.

    ``D(t) = d_magnitude * exp(i*(2*detuning*t - phi))`` with
    ``detuning = Omega - omega_n``. ``omega_n`` is kept so that interaction
    picture states can be rotated back to the lab frame.
    """

    c_minus: float
    c_plus: float
    d_magnitude: float = 0.0
    detuning: float = 0.0
    phi: float = 0.0
    omega_n: float = 1.0
    environment: str = field(default="thermal", compare=False)

    @property
    def decay(self) -> float:
        """Off-diagonal decay rate ``C+ + C-``; populations relax at twice this."""
        return self.c_plus + self.c_minus

    def d_phase_at(self, t):
        return 2.0 * self.detuning * np.asarray(t) - self.phi

    def d_at(self, t):
        return self.d_magnitude * np.exp(1j * self.d_phase_at(t))


def occupation_number(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation ``1 / (exp(omega/T) - 1)``; exactly 0 at ``T = 0``."""
    if not omega > 0:
        raise DomainError(f"occupation number needs omega > 0, got {omega}")
    if temperature < 0:
        raise DomainError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def thermal_coefficients(p: PhysicalParams) -> LindbladCoefficients:
    g2pi = math.pi * p.g**2
    c_minus = g2pi * occupation_number(p.omega_n, p.temperature)
    return LindbladCoefficients(
        c_minus=c_minus,
        c_plus=c_minus + g2pi,
        d_magnitude=0.0,
        detuning=p.Omega - p.omega_n,
        phi=p.phi,
        omega_n=p.omega_n,
        environment="thermal",
    )


def squeezed_coefficients(p: PhysicalParams) -> LindbladCoefficients:
    mirror = 2.0 * p.Omega - p.omega_n
    if mirror <= 0:
        raise DomainError(
            f"mirror mode 2*Omega - omega_n = {mirror} must be positive "
            f"(Omega={p.Omega}, omega_n={p.omega_n})"
        )
    g2pi = math.pi * p.g**2
    n1 = occupation_number(p.omega_n, p.temperature)
    n2 = occupation_number(mirror, p.temperature)
    pair = n1 + n2 + 1.0
    c_minus = g2pi * (n1 + pair * math.sinh(p.r) ** 2)
    return LindbladCoefficients(
        c_minus=c_minus,
        c_plus=c_minus + g2pi,
        d_magnitude=g2pi * pair * math.sinh(2.0 * p.r),
        detuning=p.Omega - p.omega_n,
        phi=p.phi,
        omega_n=p.omega_n,
        environment="squeezed",
    )


def coefficients(p: PhysicalParams, environment: str = "thermal") -> LindbladCoefficients:
    if environment == "thermal":
        return thermal_coefficients(p)
    if environment == "squeezed":
        return squeezed_coefficients(p)
    raise DomainError(f"unknown environment {environment!r}; expected one of {ENVIRONMENTS}")


def initial_density(s: InitialState) -> DensityMatrix:
    """``(I + purity * (sin(theta) sx + cos(theta) sz)) / 2``."""
    x = s.purity * math.sin(s.theta)
    z = s.purity * math.cos(s.theta)
    m = 0.5 * np.array([[1.0 + z, x], [x, 1.0 - z]], dtype=complex)
    return DensityMatrix(m, "schrodinger")
