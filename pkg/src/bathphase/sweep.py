"""
One-dimensional parameter sweeps of the geometric phase and figure presets.

Sweep values are absolute, in the unit system of the fixed parameters:
``temperature`` sweeps ``T``, ``coupling`` sweeps ``g**2``, ``field`` sweeps
``omega_n`` (with ``Omega`` following it when ``omega_ratio`` is set),
``theta`` sweeps the initial polar angle and ``squeezing`` sweeps ``r``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .geophase import ConvergenceError, phase_at_infinity, phase_series
from .model import DomainError, InitialState, PhysicalParams

__all__ = [
    "VARIABLES",
    "SweepSpec",
    "SweepTable",
    "FigurePreset",
    "InsufficientDataError",
    "MonotonicityReport",
    "run_sweep",
    "figure_preset",
    "run_preset",
    "check_monotonicity",
    "linear_fit",
    "FIGURE_IDS",
]

VARIABLES = ("temperature", "coupling", "field", "theta", "squeezing")
OUTPUTS = ("time_series", "phase_at_infinity")
FIGURE_IDS = tuple(f"fig{i}" for i in range(1, 9))

TIME_SERIES_COLUMNS = ("value", "tau", "phi_principal", "phi_unwrapped", "status")
LIMIT_COLUMNS = ("value", "phi_infinity", "phi_principal", "converged", "tau_converged", "status")


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    params: PhysicalParams
    state: InitialState = InitialState(math.pi / 2)
    environment: str = "thermal"
    output: str = "phase_at_infinity"
    tau_max: float | None = None
    steps_per_period: int = 512
    omega_ratio: float | None = 3.0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.variable not in VARIABLES:
            raise DomainError(f"unknown sweep variable {self.variable!r}; expected one of {VARIABLES}")
        if self.output not in OUTPUTS:
            raise DomainError(f"unknown output {self.output!r}; expected one of {OUTPUTS}")
        if self.environment not in ("thermal", "squeezed"):
            raise DomainError(f"unknown environment {self.environment!r}")
        if not self.values:
            raise DomainError("sweep needs at least one value")
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError("sweep values must be finite")
        if self.steps_per_period < 64:
            raise DomainError(f"steps_per_period must be >= 64, got {self.steps_per_period}")
        if self.output == "time_series" and not (self.tau_max and self.tau_max > 0):
            raise DomainError("time_series sweeps need tau_max > 0")
        for v in self.values:
            self.point(v)

    def point(self, value: float) -> tuple[PhysicalParams, InitialState]:
        """Parameters of one sweep point; raises :class:`DomainError` if invalid."""
        p, s = self.params, self.state
        if self.variable == "temperature":
            p = replace(p, temperature=value)
        elif self.variable == "coupling":
            if value < 0:
                raise DomainError(f"coupling g**2 must be >= 0, got {value}")
            p = replace(p, g=math.sqrt(value))
        elif self.variable == "field":
            p = replace(p, omega_n=value, Omega=p.Omega if self.omega_ratio is None else self.omega_ratio * value)
        elif self.variable == "theta":
            s = replace(s, theta=value)
        elif self.variable == "squeezing":
            p = replace(p, r=value)
        if self.variable != "field" and self.omega_ratio is not None:
            p = replace(p, Omega=self.omega_ratio * p.omega_n)
        return p, s


@dataclass
class SweepTable:
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])


def _run_point(spec: SweepSpec, value: float) -> list:
    try:
        p, s = spec.point(value)
        if spec.output == "time_series":
            series = phase_series(p, s, spec.environment, spec.tau_max, spec.steps_per_period)
            return [
                (value, float(t), float(a), float(b), "ok")
                for t, a, b in zip(series.taus, series.phi_principal, series.phi_unwrapped)
            ]
        limit = phase_at_infinity(p, s, spec.environment, spec.steps_per_period)
        return [(value, limit.phi_infinity, limit.phi_principal, True, limit.tau_converged, "ok")]
    except ConvergenceError as exc:
        lim = exc.limit
        phi = lim.phi_infinity if lim is not None else float("nan")
        prin = lim.phi_principal if lim is not None else float("nan")
        return [(value, phi, prin, False, float("nan"), f"error: {exc}")]
    except (DomainError, ValueError, FloatingPointError) as exc:
        if spec.output == "time_series":
            return [(value, float("nan"), float("nan"), float("nan"), f"error: {exc}")]
        return [(value, float("nan"), float("nan"), False, float("nan"), f"error: {exc}")]


def _run_point_star(args):
    return _run_point(*args)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepTable:
    """Evaluate every point of ``spec``; failures are recorded per row.

    Points run in a process pool when ``workers > 1`` (default: CPU count);
    row order always follows ``spec.values``.
    """
    if workers is None:
        workers = os.cpu_count() or 1
    jobs = [(spec, v) for v in spec.values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_point_star, jobs))
    else:
        results = [_run_point(*job) for job in jobs]
    columns = TIME_SERIES_COLUMNS if spec.output == "time_series" else LIMIT_COLUMNS
    rows = [row for block in results for row in block]
    return SweepTable(columns, rows, {"variable": spec.variable, "environment": spec.environment})


@dataclass(frozen=True)
class FigurePreset:
    """Resolved sweeps for one figure plus the source of every parameter.

    ``notes`` maps a parameter name to ``"[caption] ..."`` or
    ``"[assumed] ..."``.
    """

    id: str
    title: str
    sweeps: dict
    notes: dict


_CAPTIONS = {
    "fig1": "GP vs time for several k_BT/hbar w_N; thermal (left), squeezed r=1 (right)",
    "fig2": "GP vs time for several g^2/w_N; thermal (left), squeezed r=2 (right)",
    "fig3": "GP vs time for several hbar w_N/k_BT; thermal (left), squeezed r=1 (right)",
    "fig4": "GP vs time for several initial angles theta; thermal (left), squeezed r=1 (right)",
    "fig5": "GP at infinity vs temperature for several r",
    "fig6": "GP at infinity vs coupling strength for several r",
    "fig7": "GP at infinity vs magnetic field for several r",
    "fig8": "GP at infinity vs initial angle theta for several r",
}

R_VALUES = (0.0, 0.5, 1.0, 2.0)
_THETA_X = "[caption] pure spin up along x: theta = pi/2, purity = 1"
_THETA_ASSUMED = "[assumed] pure spin up along x (theta = pi/2), as in the time-dependence figures"
_OMEGA = "[assumed] Omega = 3 w_N (only stated for the field-dependence time plot)"
_R_GRID = "[assumed] r in {0, 0.5, 1, 2}"
_TIME_SPAN = "[assumed] tau_max = 200 pi, i.e. 100 Larmor periods at the reference frequency"


def _pair(variable, values, params, state, tau_max, r_right, spp=512):
    left = SweepSpec(variable, values, params, state, "thermal", "time_series", tau_max, spp)
    right = SweepSpec(variable, values, replace(params, r=r_right), state, "squeezed",
                      "time_series", tau_max, spp)
    return {"left": left, "right": right}


def _by_r(variable, values, params, state, spp=512):
    out = {}
    for r in R_VALUES:
        env = "thermal" if r == 0 else "squeezed"
        out[f"r={r:g}"] = SweepSpec(variable, values, replace(params, r=r), state, env,
                                    "phase_at_infinity", None, spp)
    return out


def figure_preset(fig_id: str, steps_per_period: int = 512) -> FigurePreset:
    """Sweeps reproducing one of the eight figures."""
    if fig_id not in FIGURE_IDS:
        raise DomainError(f"unknown figure id {fig_id!r}; expected one of {FIGURE_IDS}")
    x_state = InitialState(math.pi / 2)
    periods = 100 * 2 * math.pi
    spp = steps_per_period
    if fig_id == "fig1":
        p = PhysicalParams.from_ratios(g2_over_omega=0.01, temp_over_omega=1.0)
        sweeps = _pair("temperature", (0.1, 0.316, 1.0, 3.16, 10.0), p, x_state, periods, 1.0, spp)
        notes = {
            "g2_over_omega": "[caption] g^2/w_N = 0.01",
            "temperature": "[assumed] k_BT/hbar w_N in {0.1, 0.316, 1, 3.16, 10} (log grid; curve labels not in text)",
            "r": "[caption] r = 1 (right)",
            "state": _THETA_X, "Omega": _OMEGA, "tau_max": _TIME_SPAN,
        }
    elif fig_id == "fig2":
        p = PhysicalParams.from_ratios(g2_over_omega=0.01, omega_over_temp=1.0)
        sweeps = _pair("coupling", (0.003, 0.01, 0.03, 0.1), p, x_state, periods, 2.0, spp)
        notes = {
            "omega_over_temp": "[caption] hbar w_N/k_BT = 1",
            "coupling": "[assumed] g^2/w_N in {0.003, 0.01, 0.03, 0.1} (curve labels not in text)",
            "r": "[caption] r = 2 (right)",
            "state": _THETA_X, "Omega": _OMEGA, "tau_max": _TIME_SPAN,
        }
    elif fig_id == "fig3":
        p = PhysicalParams.from_ratios(g2_over_temp=0.01, omega_over_temp=1.0)
        sweeps = _pair("field", (0.5, 1.0, 2.0, 5.0, 10.0), p, x_state, periods, 1.0, spp)
        notes = {
            "g2_over_temp": "[caption] hbar g^2/k_BT = 0.01 (k_BT = 1 fixes the scale)",
            "field": "[assumed] hbar w_N/k_BT in {0.5, 1, 2, 5, 10} (curve labels not in text)",
            "r": "[caption] r = 1 (right)",
            "Omega": "[caption] Omega = 3 w_N for all data points",
            "state": _THETA_X, "tau_max": _TIME_SPAN,
        }
    elif fig_id == "fig4":
        p = PhysicalParams.from_ratios(g2_over_omega=0.01, omega_over_temp=1.0)
        thetas = tuple(k * math.pi / 6 for k in (1, 2, 3, 4, 5))
        sweeps = _pair("theta", thetas, p, x_state, periods, 1.0, spp)
        notes = {
            "omega_over_temp": "[caption] hbar w_N/k_BT = 1",
            "g2_over_omega": "[caption] g^2/w_N = 0.01",
            "theta": "[assumed] theta in {pi/6, pi/3, pi/2, 2pi/3, 5pi/6}, pure states",
            "r": "[caption] r = 1 (right)",
            "Omega": _OMEGA, "tau_max": _TIME_SPAN,
        }
    elif fig_id == "fig5":
        p = PhysicalParams.from_ratios(g2_over_omega=0.01, temp_over_omega=1.0)
        temps = tuple(float(v) for v in np.geomspace(0.1, 10.0, 13))
        sweeps = _by_r("temperature", temps, p, x_state, spp)
        notes = {
            "g2_over_omega": "[caption] g^2/w_N = 0.01",
            "temperature": "[assumed] k_BT/hbar w_N on a 13-point log grid over [0.1, 10]",
            "r": _R_GRID, "state": _THETA_ASSUMED, "Omega": _OMEGA,
        }
    elif fig_id == "fig6":
        p = PhysicalParams.from_ratios(g2_over_omega=0.01, omega_over_temp=1.0)
        couplings = tuple(float(v) for v in np.geomspace(0.001, 1.0, 13))
        sweeps = _by_r("coupling", couplings, p, x_state, spp)
        notes = {
            "omega_over_temp": "[caption] hbar w_N/k_BT = 1",
            "coupling": "[assumed] g^2/w_N on a 13-point log grid over [0.001, 1]",
            "r": _R_GRID, "state": _THETA_ASSUMED, "Omega": _OMEGA,
        }
    elif fig_id == "fig7":
        p = PhysicalParams.from_ratios(g2_over_temp=0.1, omega_over_temp=1.0)
        fields = tuple(float(v) for v in np.geomspace(0.05, 20.0, 14))
        sweeps = _by_r("field", fields, p, x_state, spp)
        notes = {
            "g2_over_temp": "[caption] hbar g^2/k_BT = 0.1 (k_BT = 1 fixes the scale)",
            "field": "[assumed] hbar w_N/k_BT on a 14-point log grid over [0.05, 20]",
            "r": _R_GRID, "state": _THETA_ASSUMED, "Omega": _OMEGA,
        }
    else:
        p = PhysicalParams.from_ratios(g2_over_omega=0.025, omega_over_temp=1.0)
        thetas = tuple(float(v) for v in np.linspace(0.0, math.pi, 13))
        sweeps = _by_r("theta", thetas, p, x_state, spp)
        notes = {
            "g2_over_omega": "[caption] g^2/w_N = 0.025",
            "omega_over_temp": "[caption] hbar w_N/k_BT = 1",
            "theta": "[assumed] theta on a 13-point grid over [0, pi], pure states",
            "r": _R_GRID, "Omega": _OMEGA,
        }
    return FigurePreset(fig_id, _CAPTIONS[fig_id], sweeps, notes)


def run_preset(preset: FigurePreset, workers: int | None = None) -> SweepTable:
    """Run every sweep of a preset; rows gain a leading ``variant`` column."""
    columns = None
    rows = []
    for label, spec in preset.sweeps.items():
        table = run_sweep(spec, workers)
        columns = ("variant",) + table.columns
        rows.extend((label,) + tuple(row) for row in table.rows)
    return SweepTable(columns, rows, {"figure": preset.id, **preset.notes})


@dataclass(frozen=True)
class MonotonicityReport:
    direction: str
    monotone: bool
    violations: tuple
    interior_maximum: int | None
    interior_minimum: int | None

    def summary(self) -> str:
        state = f"monotone-{self.direction}" if self.monotone else "non-monotone"
        return f"{state}; violations={list(self.violations)}; interior_max={self.interior_maximum}"


def check_monotonicity(values, direction: str = "decreasing", magnitude: bool = False) -> MonotonicityReport:
    """Check a sequence (e.g. phase limits along a sweep) for strict monotonicity.

    ``violations`` lists index pairs ``(i, i+1)`` that break the requested trend.
    """
    y = np.asarray(values, dtype=float)
    if magnitude:
        y = np.abs(y)
    if len(y) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(y)}")
    if direction not in ("decreasing", "increasing"):
        raise ValueError(f"direction must be 'decreasing' or 'increasing', got {direction!r}")
    step = np.diff(y)
    bad = step >= 0 if direction == "decreasing" else step <= 0
    violations = tuple((int(i), int(i) + 1) for i in np.nonzero(bad)[0])
    imax = int(np.argmax(y))
    imin = int(np.argmin(y))
    return MonotonicityReport(
        direction,
        not violations,
        violations,
        imax if 0 < imax < len(y) - 1 else None,
        imin if 0 < imin < len(y) - 1 else None,
    )


def linear_fit(x, y):
    """Least-squares line; returns ``(slope, intercept, r_squared)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(x)}")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
