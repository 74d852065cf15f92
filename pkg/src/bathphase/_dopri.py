"""Dormand-Prince 5(4) stepper that lands exactly on requested output times."""

from __future__ import annotations

import numpy as np

# Butcher tableau (Dormand & Prince 1980); 5th order solution is propagated.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4


class IntegrationError(RuntimeError):
    """The adaptive integrator could not meet its tolerance."""


def integrate(fun, y0, times, rtol=1e-9, atol=1e-11, project=None, h0=None,
              min_step=1e-14, max_steps=10_000_000):
    """Integrate ``y' = fun(t, y)`` and return ``y`` at every entry of ``times``.

    ``project`` (optional) is applied to every accepted state; used to keep
    density matrices exactly Hermitian. Steps are clipped so that each output
    time is hit exactly, which avoids any interpolation error.
    """
    times = np.asarray(times, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(times),) + y.shape, dtype=complex)
    t = float(times[0])
    out[0] = y
    if len(times) == 1:
        return out
    span = float(times[-1] - times[0])
    h = h0 if h0 is not None else min(span, 1e-3 * max(span, 1.0))
    k = np.empty((7,) + y.shape, dtype=complex)
    k[0] = fun(t, y)
    n_steps = 0
    n_reject = 0
    for i in range(1, len(times)):
        target = float(times[i])
        while t < target:
            if n_steps > max_steps:
                raise IntegrationError(
                    f"step budget exhausted at t={t:.6g} (accepted={n_steps}, rejected={n_reject})"
                )
            h_try = min(h, target - t)
            landing = h_try >= target - t
            for s in range(1, 7):
                dy = sum(a * k[j] for j, a in enumerate(_A[s]) if a != 0.0)
                k[s] = fun(t + _C[s] * h_try, y + h_try * dy)
            y_new = y + h_try * np.tensordot(_B5, k, axes=1)
            err_vec = h_try * np.tensordot(_E, k, axes=1)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
            if err <= 1.0:
                t = target if landing else t + h_try
                y = project(y_new) if project is not None else y_new
                k[0] = fun(t, y)
                n_steps += 1
                factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
                # a clipped landing step says nothing about the natural step size
                if not landing or h_try >= h:
                    h = h_try * factor
            else:
                n_reject += 1
                h = h_try * max(0.2, 0.9 * err ** -0.25)
                if h < min_step:
                    raise IntegrationError(
                        f"step size underflow (h={h:.3g}) at t={t:.6g}; last error ratio {err:.3g}"
                    )
        out[i] = y
    return out
