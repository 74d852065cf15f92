import math
from dataclasses import replace

import numpy as np
import pytest

from bathphase.model import DomainError, InitialState, PhysicalParams
from bathphase.sweep import (
    FIGURE_IDS,
    InsufficientDataError,
    SweepSpec,
    check_monotonicity,
    figure_preset,
    linear_fit,
    run_preset,
    run_sweep,
)

BASE = PhysicalParams.from_ratios(g2_over_omega=0.05, temp_over_omega=1.0)


class TestSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(variable="pressure", values=(1.0,)),
            dict(variable="temperature", values=()),
            dict(variable="temperature", values=(1.0, float("inf"))),
            dict(variable="temperature", values=(-1.0,)),
            dict(variable="coupling", values=(-0.1,)),
            dict(variable="theta", values=(4.0,)),
            dict(variable="temperature", values=(1.0,), steps_per_period=32),
            dict(variable="temperature", values=(1.0,), output="time_series"),
            dict(variable="temperature", values=(1.0,), environment="vacuum"),
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(DomainError):
            SweepSpec(params=BASE, **kwargs)

    def test_point_mapping(self):
        spec = SweepSpec("coupling", (0.04,), BASE)
        p, _ = spec.point(0.04)
        assert p.g == pytest.approx(0.2)
        p, _ = SweepSpec("field", (2.0,), BASE).point(2.0)
        assert (p.omega_n, p.Omega) == (2.0, 6.0)
        p, _ = SweepSpec("field", (2.0,), BASE, omega_ratio=None).point(2.0)
        assert (p.omega_n, p.Omega) == (2.0, 3.0)
        _, s = SweepSpec("theta", (0.5,), BASE).point(0.5)
        assert s.theta == 0.5
        p, _ = SweepSpec("squeezing", (1.5,), BASE).point(1.5)
        assert p.r == 1.5
        p, _ = SweepSpec("temperature", (7.0,), BASE).point(7.0)
        assert p.temperature == 7.0


class TestRunSweep:
    def test_unitary_single_value(self):
        p = PhysicalParams(1.0, 1.0, 0.0)
        spec = SweepSpec("theta", (math.pi / 3,), p, output="time_series", tau_max=2 * math.pi)
        table = run_sweep(spec, workers=1)
        last = table.rows[-1]
        assert last[1] == pytest.approx(2 * math.pi, rel=1e-12)
        assert abs(last[2]) == pytest.approx(math.pi / 2, abs=1e-6)
        assert table.columns == ("value", "tau", "phi_principal", "phi_unwrapped", "status")

    def test_failed_point_is_contained(self):
        p = PhysicalParams(1.0, 1.0, 0.2, Omega=3.0, r=1.0)
        spec = SweepSpec("field", (1.0, 10.0, 2.0), p, environment="squeezed", omega_ratio=None)
        table = run_sweep(spec, workers=1)
        status = table.column("status")
        assert status[0] == "ok" and status[2] == "ok"
        assert status[1].startswith("error:") and "mirror mode" in status[1]
        assert not table.rows[1][3]

    def test_deterministic_and_order_independent(self):
        values = (0.3, 1.0, 3.0)
        spec = SweepSpec("temperature", values, BASE)
        a = run_sweep(spec, workers=1)
        b = run_sweep(spec, workers=1)
        assert a.rows == b.rows
        shuffled = run_sweep(replace(spec, values=values[::-1]), workers=1)
        assert shuffled.rows == a.rows[::-1]

    def test_process_pool_matches_serial(self):
        spec = SweepSpec("temperature", (0.5, 2.0), BASE)
        assert run_sweep(spec, workers=2).rows == run_sweep(spec, workers=1).rows


class TestPresets:
    def test_ids(self):
        assert FIGURE_IDS == tuple(f"fig{i}" for i in range(1, 9))
        with pytest.raises(DomainError):
            figure_preset("fig9")

    def test_fig1(self):
        pre = figure_preset("fig1")
        assert set(pre.sweeps) == {"left", "right"}
        left, right = pre.sweeps["left"], pre.sweeps["right"]
        assert left.environment == "thermal" and right.environment == "squeezed"
        assert right.params.r == 1.0
        assert left.params.g**2 / left.params.omega_n == pytest.approx(0.01)
        assert left.state == InitialState(math.pi / 2)
        assert left.variable == "temperature" and left.output == "time_series"

    def test_fig3_carrier_from_caption(self):
        pre = figure_preset("fig3")
        assert pre.notes["Omega"].startswith("[caption]")
        spec = pre.sweeps["left"]
        p, _ = spec.point(5.0)
        assert (p.temperature, p.Omega) == (1.0, 15.0)
        assert p.g**2 / p.temperature == pytest.approx(0.01)

    def test_fig8(self):
        pre = figure_preset("fig8")
        assert set(pre.sweeps) == {"r=0", "r=0.5", "r=1", "r=2"}
        spec = pre.sweeps["r=2"]
        assert spec.variable == "theta" and spec.environment == "squeezed"
        assert spec.params.g**2 / spec.params.omega_n == pytest.approx(0.025)
        assert spec.params.omega_n / spec.params.temperature == pytest.approx(1.0)
        assert pre.sweeps["r=0"].environment == "thermal"

    @pytest.mark.parametrize("fig_id", FIGURE_IDS)
    def test_every_parameter_annotated(self, fig_id):
        pre = figure_preset(fig_id)
        assert pre.notes
        for text in pre.notes.values():
            assert text.startswith("[caption]") or text.startswith("[assumed]")
        for spec in pre.sweeps.values():
            assert spec.steps_per_period == 512

    def test_run_preset_adds_variant(self):
        pre = figure_preset("fig8")
        small = replace(pre, sweeps={k: replace(v, values=(0.5, 1.0, 1.5)) for k, v in pre.sweeps.items()
                                     if k in ("r=0", "r=1")})
        table = run_preset(small, workers=1)
        assert table.columns[0] == "variant"
        assert [row[0] for row in table.rows] == ["r=0"] * 3 + ["r=1"] * 3
        assert table.meta["figure"] == "fig8"
        assert all(row[-1] == "ok" for row in table.rows)


class TestMonotonicity:
    def test_decreasing(self):
        rep = check_monotonicity([5, 4, 3, 1])
        assert rep.monotone and rep.violations == ()
        assert rep.summary().startswith("monotone-decreasing")

    def test_interior_maximum(self):
        rep = check_monotonicity([1, 3, 2, 0])
        assert not rep.monotone and rep.violations == ((0, 1),) and rep.interior_maximum == 1

    def test_increasing_and_magnitude(self):
        assert check_monotonicity([-1, -2, -3], "increasing", magnitude=True).monotone
        assert not check_monotonicity([1, 1, 2], "increasing").monotone

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            check_monotonicity([1, 2])
        with pytest.raises(InsufficientDataError):
            linear_fit([1, 2], [3, 4])

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            check_monotonicity([1, 2, 3], "sideways")

    def test_linear_fit(self):
        x = np.linspace(0, 5, 7)
        slope, intercept, r2 = linear_fit(x, 2.5 * x - 1)
        assert (slope, intercept) == (pytest.approx(2.5), pytest.approx(-1))
        assert r2 == pytest.approx(1.0)
        assert linear_fit(x, np.sin(7 * x))[2] < 0.99
