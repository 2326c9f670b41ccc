"""Run configuration files and CSV/text exports.

Config format, one ``key = value`` per line, ``#`` comments, then a
``[vortices]`` section with one ``x y gamma`` triple per line::

    radius = 1
    t_final = 20
    [vortices]
    0.0  0.3  1
    0.5 -0.4 -1
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable

import numpy as np

from .cylinder import Configuration, Cylinder, SingularConfigurationError, unwrap_series
from .dynamics import IntegratorConfig, Trajectory
from .reduced import LevelGrid

FMT = "%.17g"


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


@dataclass(frozen=True)
class RunConfig:
    radius: float
    x: tuple[float, ...]
    y: tuple[float, ...]
    gamma: tuple[float, ...]
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    t_final: float | None = None
    samples: int | None = None
    output: str | None = None

    @property
    def cylinder(self) -> Cylinder:
        return Cylinder(self.radius)

    def configuration(self) -> Configuration:
        return Configuration(self.cylinder, self.x, self.y, self.gamma)


_INTEGRATOR_KEYS = {
    "scheme": str, "rtol": float, "atol": float, "step": float,
    "max_move": float, "guard": float, "max_steps": int,
}
_RUN_KEYS = {"radius": float, "t_final": float, "samples": int, "output": str}


def _num(text: str, kind, lineno: int, key: str):
    try:
        val = kind(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key}: cannot parse {text!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(val):
        raise ConfigError(f"line {lineno}: {key}: value must be finite")
    return val


def parse_config(text: str) -> RunConfig:
    """Parse config text; see the module docstring for the format."""
    run: dict = {}
    integ: dict = {}
    vort: list[tuple[float, float, float]] = []
    in_vortices = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[vortices]":
                raise ConfigError(f"line {lineno}: unknown section {line}")
            if in_vortices:
                raise ConfigError(f"line {lineno}: duplicate [vortices] section")
            in_vortices = True
            continue
        if in_vortices:
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(f"line {lineno}: expected 'x y gamma', got {line!r}")
            vort.append(tuple(_num(p, float, lineno, "vortex") for p in parts))  # type: ignore[arg-type]
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in run or key in integ:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        if key in _RUN_KEYS:
            kind = _RUN_KEYS[key]
            run[key] = val if kind is str else _num(val, kind, lineno, key)
        elif key in _INTEGRATOR_KEYS:
            kind = _INTEGRATOR_KEYS[key]
            integ[key] = val if kind is str else _num(val, kind, lineno, key)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if "radius" not in run:
        raise ConfigError("missing required key 'radius'")
    if not vort:
        raise ConfigError("no vortices given ([vortices] section missing or empty)")
    try:
        icfg = IntegratorConfig(**integ)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"integrator settings: {exc}") from None
    xs, ys, gs = zip(*vort)
    cfg = RunConfig(run["radius"], xs, ys, gs, icfg, run.get("t_final"), run.get("samples"), run.get("output"))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Raise :class:`ConfigError` naming the first violated precondition."""
    try:
        cfg.configuration()
    except SingularConfigurationError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.t_final is not None and cfg.t_final < 0:
        raise ConfigError("t_final must be nonnegative")
    if cfg.samples is not None and cfg.samples < 2:
        raise ConfigError("samples must be at least 2")


def read_config(path: str | os.PathLike) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        return parse_config(p.read_text())
    except ConfigError as exc:
        raise ConfigError(f"{p}: {exc}") from None


def format_config(cfg: RunConfig) -> str:
    lines = [f"radius = {FMT % cfg.radius}"]
    if cfg.t_final is not None:
        lines.append(f"t_final = {FMT % cfg.t_final}")
    if cfg.samples is not None:
        lines.append(f"samples = {cfg.samples}")
    if cfg.output is not None:
        lines.append(f"output = {cfg.output}")
    default = IntegratorConfig()
    for f in fields(IntegratorConfig):
        if f.name not in _INTEGRATOR_KEYS:
            continue
        val = getattr(cfg.integrator, f.name)
        if val != getattr(default, f.name):
            lines.append(f"{f.name} = {val if isinstance(val, str) else FMT % val}")
    lines.append("[vortices]")
    for x, y, g in zip(cfg.x, cfg.y, cfg.gamma):
        lines.append(f"{FMT % x} {FMT % y} {FMT % g}")
    return "\n".join(lines) + "\n"


def write_config(cfg: RunConfig, path: str | os.PathLike) -> None:
    Path(path).write_text(format_config(cfg))


def config_from(config: Configuration, **kw) -> RunConfig:
    return RunConfig(config.cylinder.radius, tuple(config.x), tuple(config.y), tuple(config.gamma), **kw)


def _write_rows(path: Path, header: Iterable[str], rows: np.ndarray) -> None:
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(rows):
            fh.write(",".join(FMT % v for v in row) + "\n")


def write_trajectory_csv(traj: Trajectory, path: str | os.PathLike) -> list[Path]:
    """Wrapped trajectory CSV plus a ``.unwrapped.csv`` companion.

    Columns ``t,x1,y1,...,xN,yN,H,Px,Py``; momentum uses the unwrapped chart
    in both files.
    """
    path = Path(path)
    n = traj.gamma.size
    header = ["t"] + [f"{c}{k}" for k in range(1, n + 1) for c in ("x", "y")] + ["H", "Px", "Py"]

    def rows(xs):
        xy = np.empty((traj.t.size, 2 * n))
        xy[:, 0::2] = xs
        xy[:, 1::2] = traj.y
        return np.column_stack((traj.t, xy, traj.energy, traj.momentum.real, traj.momentum.imag))

    companion = path.with_name(path.stem + ".unwrapped" + path.suffix)
    _write_rows(path, header, rows(traj.x))
    _write_rows(companion, header, rows(traj.x_unwrapped))
    return [path, companion]


def read_trajectory_csv(path: str | os.PathLike, gamma, radius: float) -> Trajectory:
    """Load a trajectory CSV (the unwrapped companion is used when present)."""
    path = Path(path)
    companion = path.with_name(path.stem + ".unwrapped" + path.suffix)
    src = path
    if not path.stem.endswith(".unwrapped") and companion.is_file():
        src = companion
    data = np.loadtxt(src, delimiter=",", skiprows=1, ndmin=2)
    gamma = np.asarray(gamma, dtype=np.float64)
    n = gamma.size
    if data.shape[1] != 2 * n + 4:
        raise ConfigError(f"{src}: expected {2 * n + 4} columns for {n} vortices, found {data.shape[1]}")
    cyl = Cylinder(radius)
    x = data[:, 1:2 * n + 1:2]
    y = data[:, 2:2 * n + 2:2]
    if src is path:
        x = unwrap_series(x, cyl)
    return Trajectory(cyl, gamma, data[:, 0], x, y, data[:, -3], data[:, -2] + 1j * data[:, -1])


def write_rpo_csv(reports, path: str | os.PathLike) -> None:
    rows = []
    for rep in reports:
        w = math.nan if rep.winding is None else rep.winding
        rows.append((rep.period, rep.drift.real, rep.drift.imag, rep.residual, w))
    _write_rows(Path(path), ["T", "drift_x", "drift_y", "residual", "winding"], np.array(rows).reshape(-1, 5))


def format_equilibrium_report(result) -> str:
    cfg = result.configuration
    lines = [
        f"radius {FMT % cfg.cylinder.radius}",
        f"residual {result.residual:.3e}",
        f"iterations {result.iterations}",
        f"certified {'yes' if result.certified else 'no (' + str(result.certificate.reason) + ')'}",
        "spectrum " + " ".join(f"{v:.6e}" for v in result.hessian_spectrum),
        "x y gamma",
    ]
    lines += [f"{FMT % a} {FMT % b} {FMT % g}" for a, b, g in zip(cfg.x, cfg.y, cfg.gamma)]
    return "\n".join(lines) + "\n"


def write_equilibrium_csv(result, path: str | os.PathLike) -> None:
    cfg = result.configuration
    _write_rows(Path(path), ["x", "y", "gamma"], np.column_stack((cfg.x, cfg.y, cfg.gamma)))


def write_level_grid(grid: LevelGrid, path: str | os.PathLike) -> list[Path]:
    """Matrix text file (rows in decreasing eta, ``nan`` where masked) plus ``.header`` sidecar."""
    path = Path(path)
    vals = grid.masked()[::-1]
    with path.open("w") as fh:
        for row in vals:
            fh.write(" ".join("nan" if not math.isfinite(v) else FMT % v for v in row) + "\n")
    side = path.with_name(path.name + ".header")
    meta = [f"kind = {grid.kind}"]
    meta += [f"{k} = {v if isinstance(v, str) else FMT % v}" for k, v in sorted(grid.params.items())]
    meta += [
        f"xi = {FMT % grid.xi[0]} {FMT % grid.xi[-1]} {grid.xi.size}",
        f"eta = {FMT % grid.eta[-1]} {FMT % grid.eta[0]} {grid.eta.size}",
        "rows = eta descending; columns = xi ascending",
    ]
    side.write_text("\n".join(meta) + "\n")
    return [path, side]


__all__ = [
    "ConfigError", "RunConfig", "parse_config", "read_config", "format_config", "write_config",
    "config_from", "validate", "write_trajectory_csv", "read_trajectory_csv", "write_rpo_csv",
    "format_equilibrium_report", "write_equilibrium_csv", "write_level_grid",
]
