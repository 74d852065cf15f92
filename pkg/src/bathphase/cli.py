"""
Command-line front end.

    bathphase evolve   --g2-over-omega 0.01 --temp 1 --theta 1.5708 --tau-max 40
    bathphase phase    --omega-n 1 --temp 1 --g2-over-omega 0.01 --tau-max 40
    bathphase sweep    --variable temperature --values 0.5,1,2 --output phase_at_infinity
    bathphase figure   --id fig5 --out fig5.csv
    bathphase validate --r 1 --tol 1e-7

A flat ``key = value`` config file may be given with ``--config``; command-line
flags override file keys, which override the defaults. Exit codes: 0 ok,
1 usage, 2 numeric failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .evolution import IntegrationError, analytic_states, integrate_numeric, rotate_to_schrodinger, steady_state
from .geophase import ConvergenceError, DegeneracyError, phase_at_infinity, phase_series
from .io import TableIOError, format_value, write_table
from .model import DomainError, InitialState, PhysicalParams, coefficients, initial_density, validate_density
from .sweep import FIGURE_IDS, VARIABLES, SweepSpec, SweepTable, figure_preset, run_preset, run_sweep

COMMANDS = ("evolve", "phase", "sweep", "figure", "validate")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
DEFAULT_G2_OVER_OMEGA = 0.01


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    parse.__name__ = "choice"
    return parse


def _float_list(text):
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


# key -> (parser, default, help)
OPTIONS = {
    "omega_n": (float, None, "Larmor frequency (absolute units)"),
    "temp": (float, None, "temperature k_B T (absolute units)"),
    "g": (float, None, "coupling amplitude g (absolute units)"),
    "g2_over_omega": (float, None, "coupling ratio g^2/w_N"),
    "g2_over_temp": (float, None, "coupling ratio hbar g^2/k_B T"),
    "temp_over_omega": (float, None, "k_B T / hbar w_N"),
    "omega_over_temp": (float, None, "hbar w_N / k_B T"),
    "omega_ratio": (float, 3.0, "Omega / w_N (half the squeezing carrier frequency)"),
    "r": (float, 0.0, "squeezing magnitude"),
    "phi": (float, 0.0, "squeezing phase (rad)"),
    "theta": (float, math.pi / 2, "initial polar angle in the xz-plane"),
    "purity": (float, 1.0, "initial Bloch-vector length"),
    "environment": (_choice(("auto", "thermal", "squeezed")), "auto",
                    "bath type; auto = squeezed when r > 0"),
    "tau_max": (float, 40.0, "final time"),
    "steps_per_period": (int, 512, "grid steps per Larmor period"),
    "method": (_choice(("analytic", "numeric")), "analytic", "evolve: propagation method"),
    "picture": (_choice(("interaction", "schrodinger")), "schrodinger", "evolve: output picture"),
    "limit": (_bool, False, "phase: report the long-time limit instead of a time series"),
    "variable": (_choice(VARIABLES), "temperature", "sweep: swept quantity"),
    "values": (_float_list, None, "sweep: comma-separated values (absolute units)"),
    "output": (_choice(("time_series", "phase_at_infinity")), "phase_at_infinity", "sweep: result type"),
    "id": (_choice(FIGURE_IDS), None, "figure: preset id"),
    "variant": (str, None, "figure: run only this variant (e.g. left, r=2)"),
    "workers": (int, None, "sweep/figure: worker processes (default: CPU count)"),
    "tol": (float, 1e-7, "validate: analytic vs numeric tolerance"),
    "out": (str, "-", "output path ('-' for stdout)"),
    "format": (_choice(("csv", "jsonl")), "csv", "output format"),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    options: dict
    sources: dict = field(default_factory=dict)
    overrides: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None

    def to_text(self) -> str:
        """Flat ``key = value`` form; :func:`parse_config` reads it back unchanged."""
        lines = [f"command = {self.command}"]
        for key, value in self.options.items():
            if value is None:
                continue
            if isinstance(value, tuple):
                text = ",".join(repr(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = format_value(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def header(self) -> dict:
        meta = {"command": self.command}
        for key, value in self.options.items():
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            meta[f"config.{key}"] = value
        for key, (file_value, flag_value) in self.overrides.items():
            meta[f"override.{key}"] = f"flag {flag_value} replaces config file {file_value}"
        return meta

    def physical_params(self) -> PhysicalParams:
        o = self.options
        ratio_keys = ("g2_over_omega", "g2_over_temp", "temp_over_omega", "omega_over_temp")
        try:
            if o["g"] is not None:
                omega_n = o["omega_n"] if o["omega_n"] is not None else 1.0
                temp = o["temp"]
                if temp is None:
                    if o["temp_over_omega"] is not None:
                        temp = o["temp_over_omega"] * omega_n
                    elif o["omega_over_temp"] is not None:
                        temp = omega_n / o["omega_over_temp"]
                    else:
                        temp = 1.0
                return PhysicalParams(omega_n, temp, o["g"], o["omega_ratio"] * omega_n, o["r"], o["phi"])
            kwargs = {k: o[k] for k in ratio_keys if o[k] is not None}
            if o["omega_n"] is not None:
                kwargs["omega_n"] = o["omega_n"]
            if o["temp"] is not None:
                kwargs["temperature"] = o["temp"]
                if "omega_n" not in kwargs and "temp_over_omega" not in kwargs \
                        and "omega_over_temp" not in kwargs:
                    kwargs["omega_n"] = 1.0
            if "g2_over_omega" not in kwargs and "g2_over_temp" not in kwargs:
                kwargs["g2_over_omega"] = DEFAULT_G2_OVER_OMEGA
            if not any(k in kwargs for k in ("temperature", "temp_over_omega", "omega_over_temp")):
                kwargs["temp_over_omega"] = 1.0
            return PhysicalParams.from_ratios(Omega_over_omega=o["omega_ratio"], r=o["r"], phi=o["phi"], **kwargs)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc

    def initial_state(self) -> InitialState:
        try:
            return InitialState(self.options["theta"], self.options["purity"])
        except DomainError as exc:
            raise UsageError(str(exc)) from exc

    def environment(self) -> str:
        env = self.options["environment"]
        if env == "auto":
            return "squeezed" if self.options["r"] > 0 else "thermal"
        return env


def _convert(key, raw):
    if key not in OPTIONS:
        raise UsageError(f"unknown key {key!r}")
    parser = OPTIONS[key][0]
    try:
        return parser(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid value for {key!r}: {raw!r} ({exc})") from None


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines (``#`` comments allowed) into raw strings.

    The ``#`` header of a CSV written by this tool is also accepted, so an
    output file can be fed back with ``--config`` to reproduce it.
    """
    if text.startswith("# command:"):
        raw = {}
        for line in text.splitlines():
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            if key == "command":
                raw["command"] = value
            elif key.startswith("config."):
                raw[key[len("config."):]] = value
        return raw
    raw = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key != "command" and key not in OPTIONS:
            raise UsageError(f"config line {n}: unknown key {key!r}")
        raw[key] = value
    return raw


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bathphase", description=__doc__.split("\n\n")[0].strip(),
                                     exit_on_error=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", nargs="?", help=f"one of {', '.join(COMMANDS)}")
    parser.add_argument("--config", help="flat key = value config file")
    for key, (_, default, help_text) in OPTIONS.items():
        flag = "--" + key.replace("_", "-")
        if key == "temp":
            parser.add_argument(flag, "--temperature", dest=key, default=argparse.SUPPRESS, help=help_text)
        elif key == "omega_ratio":
            parser.add_argument(flag, "--Omega-over-omega", dest=key, default=argparse.SUPPRESS, help=help_text)
        else:
            parser.add_argument(flag, dest=key, default=argparse.SUPPRESS, help=help_text)
    return parser


def parse_config(argv=None, config_text: str | None = None) -> RunConfig:
    """Resolve a :class:`RunConfig`: flag > config-file key > default."""
    parser = _build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except argparse.ArgumentError as exc:
        raise UsageError(str(exc)) from None
    if extra:
        raise UsageError(f"unknown argument(s): {' '.join(extra)}")
    flags = {k: v for k, v in vars(args).items() if k in OPTIONS}
    file_raw = {}
    if config_text is None and getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                config_text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}") from exc
    if config_text is not None:
        file_raw = parse_config_text(config_text)
    command = args.command or file_raw.get("command")
    if command is None:
        raise UsageError(f"missing command; expected one of {', '.join(COMMANDS)}")
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")

    options, sources, overrides = {}, {}, {}
    for key, (_, default, _) in OPTIONS.items():
        if key in flags:
            options[key] = _convert(key, flags[key])
            sources[key] = "flag"
            if key in file_raw:
                file_value = _convert(key, file_raw[key])
                if file_value != options[key]:
                    overrides[key] = (file_raw[key], flags[key])
        elif key in file_raw:
            options[key] = _convert(key, file_raw[key])
            sources[key] = "file"
        else:
            options[key] = default
            sources[key] = "default"
    _validate(command, options)
    return RunConfig(command, options, sources, overrides)


def _validate(command, o):
    for key in ("omega_n", "g2_over_omega", "g2_over_temp", "temp_over_omega", "omega_over_temp",
                "omega_ratio", "tau_max"):
        if o[key] is not None and not o[key] > 0:
            raise UsageError(f"{key} must be > 0, got {o[key]}")
    for key in ("temp", "g", "r"):
        if o[key] is not None and o[key] < 0:
            raise UsageError(f"{key} must be >= 0, got {o[key]}")
    if not 0 <= o["theta"] <= math.pi:
        raise UsageError(f"theta must lie in [0, pi], got {o['theta']}")
    if not 0 <= o["purity"] <= 1:
        raise UsageError(f"purity must lie in [0, 1], got {o['purity']}")
    if o["steps_per_period"] < 64:
        raise UsageError(f"steps_per_period must be >= 64, got {o['steps_per_period']}")
    if o["tol"] is not None and not o["tol"] > 0:
        raise UsageError(f"tol must be > 0, got {o['tol']}")
    if command == "sweep" and not o["values"]:
        raise UsageError("sweep needs --values")
    if command == "figure" and o["id"] is None:
        raise UsageError("figure needs --id")


def _emit(config: RunConfig, table: SweepTable, meta_extra=None):
    table.meta = {**config.header(), **(meta_extra or {}), **table.meta}
    text = write_table(table, config.format, None if config.out == "-" else config.out)
    if config.out == "-":
        sys.stdout.write(text)


def _cmd_evolve(config: RunConfig) -> int:
    p = config.physical_params()
    env = config.environment()
    rho0 = initial_density(config.initial_state())
    c = coefficients(p, env)
    n = max(2, int(math.ceil(config.tau_max * p.omega_n / (2 * math.pi) * config.steps_per_period)))
    times = np.linspace(0.0, config.tau_max, n + 1)
    if config.method == "analytic":
        states = analytic_states(rho0, c, times)
    else:
        states = integrate_numeric(rho0, c, times).states_interaction
    if config.picture == "schrodinger":
        states = rotate_to_schrodinger(states, p.omega_n, times)
    rows = [(float(t), float(m[0, 0].real), float(m[1, 1].real), float(m[0, 1].real), float(m[0, 1].imag))
            for t, m in zip(times, states)]
    table = SweepTable(("t", "rho11", "rho22", "rho12_re", "rho12_im"), rows)
    _emit(config, table, {"environment": env, "c_minus": c.c_minus, "c_plus": c.c_plus,
                          "d_magnitude": c.d_magnitude})
    return EXIT_OK


def _cmd_phase(config: RunConfig) -> int:
    p = config.physical_params()
    env = config.environment()
    state = config.initial_state()
    if config.limit:
        lim = phase_at_infinity(p, state, env, config.steps_per_period)
        table = SweepTable(("phi_infinity", "phi_principal", "converged", "tau_converged"),
                           [(lim.phi_infinity, lim.phi_principal, lim.converged, lim.tau_converged)])
    else:
        series = phase_series(p, state, env, config.tau_max, config.steps_per_period)
        table = SweepTable(("tau", "phi_principal", "phi_unwrapped"),
                           list(zip(series.taus.tolist(), series.phi_principal.tolist(),
                                    series.phi_unwrapped.tolist())))
    _emit(config, table, {"environment": env})
    return EXIT_OK


def _cmd_sweep(config: RunConfig) -> int:
    p = config.physical_params()
    try:
        spec = SweepSpec(config.variable, config.values, p, config.initial_state(), config.environment(),
                         config.output, config.tau_max, config.steps_per_period, config.omega_ratio)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    table = run_sweep(spec, config.workers)
    _emit(config, table)
    failed = [row for row in table.rows if str(row[-1]).startswith("error")]
    return EXIT_NUMERIC if failed else EXIT_OK


def _cmd_figure(config: RunConfig) -> int:
    preset = figure_preset(config.id, config.steps_per_period)
    if config.variant is not None:
        if config.variant not in preset.sweeps:
            raise UsageError(f"figure {config.id} has variants {list(preset.sweeps)}, not {config.variant!r}")
        preset = replace(preset, sweeps={config.variant: preset.sweeps[config.variant]})
    table = run_preset(preset, config.workers)
    _emit(config, table)
    failed = [row for row in table.rows if str(row[-1]).startswith("error")]
    return EXIT_NUMERIC if failed else EXIT_OK


def validation_report(p: PhysicalParams, state: InitialState, environment: str, tol: float) -> dict:
    """Analytic vs numeric propagation and density invariants for one point."""
    c = coefficients(p, environment)
    rho0 = initial_density(state)
    checks = {}
    horizon = 20.0 / c.decay if c.decay > 0 else 10 * 2 * math.pi / p.omega_n
    times = np.linspace(0.0, horizon, 401)
    analytic = analytic_states(rho0, c, times)
    numeric = integrate_numeric(rho0, c, times).states_interaction
    err = float(np.max(np.abs(analytic - numeric)))
    checks["analytic_vs_numeric"] = {"max_error": err, "tol": tol, "passed": err <= tol}
    for name, states in (("analytic", analytic), ("numeric", numeric)):
        rep = validate_density(states, 1e-9)
        checks[f"invariants_{name}"] = {
            "hermiticity": rep.hermiticity, "trace_error": rep.trace_error,
            "min_eigenvalue": rep.min_eigenvalue, "tol": 1e-9, "passed": rep.passed,
        }
    if c.decay > 0:
        late = analytic_states(rho0, c, [30.0 / c.decay])[0]
        target = steady_state(c).entries
        ss_err = float(np.max(np.abs(np.diag(late) - np.diag(target))))
        checks["steady_state"] = {"max_error": ss_err, "tol": 1e-8, "passed": ss_err <= 1e-8}
    return {"environment": environment, "passed": all(v["passed"] for v in checks.values()),
            "checks": checks}


def _cmd_validate(config: RunConfig) -> int:
    report = validation_report(config.physical_params(), config.initial_state(),
                               config.environment(), config.tol)
    text = json.dumps(report, indent=2)
    if config.out == "-":
        print(text)
    else:
        try:
            with open(config.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise TableIOError(f"cannot write {config.out}: {exc}") from exc
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


_HANDLERS = {
    "evolve": _cmd_evolve,
    "phase": _cmd_phase,
    "sweep": _cmd_sweep,
    "figure": _cmd_figure,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
        return _HANDLERS[config.command](config)
    except UsageError as exc:
        print(f"bathphase: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TableIOError, OSError) as exc:
        print(f"bathphase: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, DegeneracyError, IntegrationError, DomainError, FloatingPointError) as exc:
        print(f"bathphase: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
