"""Command-line front end and serialization.

Subcommands cover the full pipeline: analytic boundary curves, the critical
forcing, erosion profiles, brute-force basin grids, phase-invariant true
basins, threshold calibration and single trajectories.  Options may come
from a flat key=value config file (--config); explicit flags win.  Data
files are deterministic byte-for-byte; timestamps and wall times live only
in the JSON metadata sidecar written next to each output.

Exit codes: 0 success, 2 configuration error, 3 convergence or topology
error from the analysis layer.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

import wellescape
from wellescape.calibration import threshold_sweep
from wellescape.errors import (
    DegenerateFlowError,
    DomainError,
    GeometryError,
    InconsistentCenterError,
    NoConnectionError,
    NoCurveError,
    NoResonanceError,
)
from wellescape.rm_analysis import (
    SBMT_I,
    critical_forcing,
    erosion_profile,
    sb_boundaries,
    true_sb_level,
)
from wellescape.simulator import (
    BasinGrid,
    CylinderWindow,
    QPWindow,
    basin_grid,
    default_qp_window,
    integrate_trajectory,
    true_basin_grid,
)
from wellescape.slowflow import (
    CylinderPoint,
    PhasePoint,
    SystemParams,
    to_phase_plane,
)

__all__ = ["RunConfig", "execute", "main", "parse_config",
           "read_grid", "read_table"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

_CONVERGENCE_ERRORS = (
    DegenerateFlowError,
    GeometryError,
    InconsistentCenterError,
    NoConnectionError,
    NoCurveError,
    NoResonanceError,
)


class ConfigError(Exception):
    """Invalid command-line or config-file value."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run: subcommand name plus its option values."""

    command: str
    values: dict


# Per-command option tables: dest -> (type, default, help).  Required
# options use the _REQUIRED sentinel as default.
_REQUIRED = object()

_PARAM_OPTS = {
    "f": (float, 0.0, "forcing amplitude F"),
    "omega": (float, _REQUIRED, "forcing frequency Omega"),
    "psi": (float, 0.0, "forcing phase psi (radians)"),
    "xi_max": (float, 1.0 / 6.0, "escape energy threshold"),
}
_SIM_OPTS = {
    "t_max_periods": (int, 100, "simulation horizon in forcing periods"),
    "dt_per_period": (int, 1024, "integration steps per forcing period"),
}
_OUT_OPTS = {
    "output": (str, _REQUIRED, "output file path"),
    "format": (str, "csv", "tabular output format: csv or json"),
}

_COMMAND_OPTS = {
    "boundary": {**_PARAM_OPTS, **_OUT_OPTS,
                 "theta_count": (int, 720, "theta samples per curve")},
    "critical-forcing": {
        "omega": (float, _REQUIRED, "forcing frequency Omega"),
        "xi_max": (float, 1.0 / 6.0, "escape energy threshold"),
        "omega_min": (float, None, "omega sweep start (optional)"),
        "omega_max": (float, None, "omega sweep end"),
        "omega_steps": (int, None, "omega sweep point count"),
        **_OUT_OPTS,
    },
    "erosion": {
        "omega": (float, _REQUIRED, "forcing frequency Omega"),
        "xi_max": (float, 1.0 / 6.0, "escape energy threshold"),
        "f_min": (float, _REQUIRED, "forcing sweep start"),
        "f_max": (float, _REQUIRED, "forcing sweep end"),
        "f_steps": (int, _REQUIRED, "forcing sweep point count"),
        **_OUT_OPTS,
    },
    "simulate-basin": {
        **_PARAM_OPTS, **_SIM_OPTS, **_OUT_OPTS,
        "plane": (str, "qp", "grid plane: qp or cylinder"),
        "nx": (int, 400, "grid columns"),
        "ny": (int, 400, "grid rows"),
    },
    "true-basin": {
        **_PARAM_OPTS, **_SIM_OPTS, **_OUT_OPTS,
        "plane": (str, "qp", "grid plane: qp or cylinder"),
        "nx": (int, 400, "grid columns"),
        "ny": (int, 400, "grid rows"),
        "psi_count": (int, 21, "number of forcing phases intersected"),
    },
    "calibrate-threshold": {
        "omega": (float, _REQUIRED, "forcing frequency Omega"),
        "psi": (float, 0.0, "forcing phase used by the escape classifier"),
        "f_min": (float, _REQUIRED, "forcing sweep start"),
        "f_max": (float, _REQUIRED, "forcing sweep end"),
        "f_steps": (int, _REQUIRED, "forcing sweep point count"),
        "epsilon": (float, 0.001, "bisection tolerance"),
        "delta": (float, 0.01, "curve discretization step (theta)"),
        **_SIM_OPTS, **_OUT_OPTS,
    },
    "trajectory": {
        **_PARAM_OPTS, **_SIM_OPTS, **_OUT_OPTS,
        "q0": (float, _REQUIRED, "initial position"),
        "p0": (float, _REQUIRED, "initial momentum"),
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wellescape",
        description="Safe basins and erosion of the forced cubic-well escape problem.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {wellescape.__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, opts in _COMMAND_OPTS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="flat key=value config file; flags override")
        for dest, (typ, _default, help_text) in opts.items():
            p.add_argument("--" + dest.replace("_", "-"), dest=dest,
                           type=typ, default=None, help=help_text)
    return parser


def _read_config_file(path: str, opts: dict) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        raw = raw.strip()
        if key not in opts:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        typ = opts[key][0]
        try:
            values[key] = typ(raw)
        except ValueError as exc:
            raise ConfigError(
                f"{path}:{lineno}: invalid value for {key!r}: {raw!r}"
            ) from exc
    return values


def parse_config(argv) -> RunConfig:
    """Resolve argv plus an optional config file into a RunConfig.

    Precedence: explicit flag > config file > built-in default; missing
    required options and unknown config keys raise ConfigError.
    """
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise ConfigError("no command given; see --help")
    opts = _COMMAND_OPTS[args.command]
    file_values = {}
    if args.config is not None:
        file_values = _read_config_file(args.config, opts)
    values = {}
    for dest, (_typ, default, _help) in opts.items():
        flag = getattr(args, dest)
        if flag is not None:
            values[dest] = flag
        elif dest in file_values:
            values[dest] = file_values[dest]
        elif default is _REQUIRED:
            raise ConfigError(f"missing required option --{dest.replace('_', '-')}")
        else:
            values[dest] = default
    _validate(args.command, values)
    return RunConfig(command=args.command, values=values)


def _validate(command: str, v: dict) -> None:
    def bad(key: str, why: str):
        return ConfigError(f"invalid --{key.replace('_', '-')}: {why}")

    if "xi_max" in v and not (0.0 < v["xi_max"] <= 1.0 / 6.0):
        raise bad("xi_max", f"{v['xi_max']} outside (0, 1/6]")
    if "f" in v and v["f"] < 0.0:
        raise bad("f", "must be >= 0")
    if "omega" in v and v["omega"] <= 0.0:
        raise bad("omega", "must be > 0")
    for key in ("t_max_periods", "dt_per_period", "nx", "ny", "psi_count",
                "theta_count", "f_steps", "omega_steps"):
        if v.get(key) is not None and v[key] < 1:
            raise bad(key, "must be >= 1")
    for key in ("epsilon", "delta"):
        if key in v and v[key] <= 0.0:
            raise bad(key, "must be > 0")
    if v.get("format") not in (None, "csv", "json"):
        raise bad("format", f"{v['format']!r} is not 'csv' or 'json'")
    if v.get("plane") not in (None, "qp", "cylinder"):
        raise bad("plane", f"{v['plane']!r} is not 'qp' or 'cylinder'")
    if command == "erosion" or command == "calibrate-threshold":
        if v["f_max"] <= v["f_min"]:
            raise bad("f_max", "must exceed --f-min")
    if command == "critical-forcing":
        sweep = [v["omega_min"], v["omega_max"], v["omega_steps"]]
        if any(x is not None for x in sweep) and any(x is None for x in sweep):
            raise bad("omega_min", "omega sweep needs all of min, max, steps")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_table(path: str, fmt: str, header: list[str], rows: list[tuple]) -> None:
    if fmt == "json":
        # json floats use repr, which is already round-trip exact.
        records = [
            {k: (v if isinstance(v, str) else float(v)) for k, v in zip(header, row)}
            for row in rows
        ]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(records, fh, indent=1)
            fh.write("\n")
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(float(v))
                              for v in row) + "\n")


def read_table(path: str) -> tuple[list[str], list[tuple]]:
    """Read back a CSV or JSON table written by this tool: (header, rows).

    Floats are serialized with 17 significant digits, so the round trip is
    lossless.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        records = json.loads(text)
        header = list(records[0]) if records else []
        return header, [tuple(rec[k] for k in header) for rec in records]
    lines = text.splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append(tuple(
            cell if cell and not _is_number(cell) else float(cell)
            for cell in cells
        ))
    return header, rows


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_grid(path: str) -> np.ndarray:
    """Read back a 0/1 raster file as a boolean array (ny, nx)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    return np.array([[c == "1" for c in line] for line in lines], dtype=bool)


def _write_grid(path: str, grid: BasinGrid) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in grid.safe:
            fh.write("".join("1" if cell else "0" for cell in row) + "\n")


def _write_sidecar(path: str, config: RunConfig, wall_time: float, extra=None) -> None:
    meta = {
        "version": wellescape.__version__,
        "command": config.command,
        "config": dict(sorted(config.values.items())),
        "wall_time_s": wall_time,
    }
    if extra:
        meta.update(extra)
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _params(v: dict) -> SystemParams:
    return SystemParams(F=v.get("f", 0.0), Omega=v["omega"],
                        psi=v.get("psi", 0.0), xi_max=v.get("xi_max", 1.0 / 6.0))


def _plane(v: dict):
    if v["plane"] == "cylinder":
        return CylinderWindow(xi_top=1.0 / 6.0)
    return default_qp_window()


def _boundary_rows(params: SystemParams, theta_count: int) -> list[tuple]:
    sb = sb_boundaries(params, theta_count=theta_count)
    rows = []

    def emit(samples, kind):
        for pt in samples:
            pp = to_phase_plane(pt, angle_offset=params.psi)
            rows.append((pt.theta, pt.xi, pp.q, pp.p, kind))

    emit(sb.sbst.samples, "sbst")
    if sb.sbmt.kind == SBMT_I:
        emit(sb.sbmt.samples, "sbmt_upper")
        emit(sb.sbmt.lower_samples or [], "sbmt_lower")
    else:
        emit(sb.sbmt.samples, "sbmt")
    return rows


def _contour_rows(params: SystemParams, theta_count: int = 720) -> list[tuple]:
    xi_hat = true_sb_level(params)
    rows = []
    for theta in np.linspace(0.0, 2.0 * math.pi, theta_count, endpoint=False):
        pp = to_phase_plane(CylinderPoint(theta=float(theta), xi=xi_hat),
                            angle_offset=params.psi)
        rows.append((float(theta), xi_hat, pp.q, pp.p, "true_sb"))
    return rows


def execute(config: RunConfig) -> int:
    """Run one resolved command, writing its data files and sidecar."""
    v = config.values
    t0 = time.monotonic()
    cmd = config.command
    out = v["output"]
    fmt = v.get("format", "csv")
    header = ["theta", "xi", "q", "p", "branch_kind"]
    extra = None

    if cmd == "boundary":
        _write_table(out, fmt, header, _boundary_rows(_params(v), v["theta_count"]))
    elif cmd == "critical-forcing":
        if v["omega_min"] is not None:
            omegas = np.linspace(v["omega_min"], v["omega_max"], v["omega_steps"])
        else:
            omegas = [v["omega"]]
        rows = [(float(om), v["xi_max"], critical_forcing(float(om), v["xi_max"]))
                for om in omegas]
        _write_table(out, fmt, ["omega", "xi_max", "f_hat"], rows)
    elif cmd == "erosion":
        f_grid = np.linspace(v["f_min"], v["f_max"], v["f_steps"])
        profile = erosion_profile(f_grid, v["omega"], v["xi_max"])
        rows = [(e.F, e.xi_hat, e.mu) for e in profile.entries]
        _write_table(out, fmt, ["F", "xi_hat", "mu"], rows)
        extra = {"f_hat": profile.f_hat}
    elif cmd == "simulate-basin":
        grid = basin_grid(_plane(v), v["nx"], v["ny"], _params(v),
                          v["t_max_periods"], v["dt_per_period"])
        _write_grid(out, grid)
        extra = {"safe_cells": int(np.count_nonzero(grid.safe))}
    elif cmd == "true-basin":
        params = _params(v)
        grid = true_basin_grid(_plane(v), v["nx"], v["ny"], params,
                               v["psi_count"], v["t_max_periods"],
                               v["dt_per_period"])
        _write_grid(out, grid)
        stem = out.rsplit(".", 1)[0] if "." in out.rsplit("/", 1)[-1] else out
        contour_path = stem + "_contour.csv"
        _write_table(contour_path, "csv", header, _contour_rows(params))
        extra = {
            "safe_cells": int(np.count_nonzero(grid.safe)),
            "contour_file": contour_path,
            "psi_list": grid.meta["psi_list"],
        }
    elif cmd == "calibrate-threshold":
        f_grid = np.linspace(v["f_min"], v["f_max"], v["f_steps"])
        outcome = threshold_sweep(f_grid, v["omega"], v["psi"], v["epsilon"],
                                  v["delta"], v["t_max_periods"])
        rows = [(r.F, r.xi_star, r.iterations) for r in outcome.results]
        _write_table(out, fmt, ["F", "xi_star", "iterations"], rows)
        extra = {"failures": [list(f) for f in outcome.failures]}
    elif cmd == "trajectory":
        t, q, p, energy = integrate_trajectory(
            PhasePoint(q=v["q0"], p=v["p0"]), _params(v),
            v["t_max_periods"], v["dt_per_period"],
        )
        rows = list(zip(t, q, p, energy))
        _write_table(out, fmt, ["t", "q", "p", "E"], rows)
    else:  # pragma: no cover - parser restricts commands
        raise ConfigError(f"unknown command {cmd!r}")

    _write_sidecar(out, config, time.monotonic() - t0, extra)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return execute(config)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _CONVERGENCE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
