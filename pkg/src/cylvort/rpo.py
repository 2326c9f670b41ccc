"""Relative equilibria and relative periodic orbits: detection and families."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from .cylinder import Configuration, CylPoint, Cylinder, shape_alignment, shape_distance
from .dynamics import IntegratorConfig, Trajectory, Velocity, integrate, velocities


@dataclass(frozen=True)
class RelativePeriodReport:
    """Result of :func:`detect_relative_period`.

    ``period == 0`` with ``continuous=True`` marks a relative equilibrium:
    the shape never leaves tolerance, and ``drift`` is then the drift
    velocity rather than a per-period translation.
    """

    period: float
    drift: complex
    residual: float
    winding: float | None = None
    continuous: bool = False


def _config_from_state(traj: Trajectory, x, y) -> Configuration:
    return Configuration(traj.cylinder, x, y, traj.gamma, check=False)


def detect_relative_period(
    traj: Trajectory,
    tol: float | None = None,
    *,
    icfg: IntegratorConfig | None = None,
    zeta: NDArray[np.complex128] | None = None,
) -> RelativePeriodReport | None:
    """Smallest ``T`` after which the shape returns to its initial value.

    Sampled shape distances to the first configuration are scanned for local
    minima after the orbit has left the ``tol`` neighbourhood; each
    candidate is refined by re-integrating from the preceding sample and
    minimizing over the continuous time. ``zeta`` (a split-variable series
    aligned with the samples) adds the winding over one period to the report.
    """
    if len(traj) < 3:
        raise ValueError("trajectory needs at least 3 samples")
    r = traj.cylinder.radius
    tol = 1e-6 * r if tol is None else tol
    icfg = icfg or traj.meta.get("icfg") or IntegratorConfig()
    c0 = traj.config(0)
    d = np.array([shape_distance(c0, traj.config(i)) for i in range(len(traj))])

    if d.max() < tol:
        horizon = traj.t[-1] - traj.t[0]
        disp = np.mean(traj.z_unwrapped[-1] - traj.z_unwrapped[0])
        return RelativePeriodReport(0.0, complex(disp / horizon), float(d.max()), None, True)

    departed = np.nonzero(d > 10 * tol)[0]
    if departed.size == 0:
        departed = np.nonzero(d > tol)[0]
    start = int(departed[0])
    running_max = np.maximum.accumulate(d)
    for i in range(start + 1, len(traj) - 1):
        if not (d[i] <= d[i - 1] and d[i] <= d[i + 1]):
            continue
        if d[i] > 0.5 * running_max[i]:
            continue
        base = i - 1
        span = traj.t[i + 1] - traj.t[base]
        xb, yb = traj.x_unwrapped[base], traj.y[base]
        cfg_b = _config_from_state(traj, xb, yb)

        def dist_at(s: float) -> float:
            if s <= 0:
                return shape_distance(c0, cfg_b)
            tr = integrate(cfg_b, s, icfg, t_eval=[s], x_start=xb)
            return shape_distance(c0, tr.config(-1))

        res = minimize_scalar(dist_at, bounds=(0.0, span), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, span)})
        if res.fun >= tol:
            continue
        period = float(traj.t[base] - traj.t[0] + res.x)
        tr = integrate(cfg_b, res.x, icfg, t_eval=[res.x], x_start=xb) if res.x > 0 else None
        x_end = tr.x_unwrapped[-1] if tr is not None else xb
        y_end = tr.y[-1] if tr is not None else yb
        _, shift = shape_alignment(c0, _config_from_state(traj, x_end, y_end))
        # lift the translation next to the mean unwrapped displacement
        mean_disp = np.mean((x_end - traj.x_unwrapped[0]) + 1j * (y_end - traj.y[0]))
        period_len = traj.cylinder.circumference
        lift = shift.real + period_len * round((mean_disp.real - shift.real) / period_len)
        drift = complex(lift, shift.imag)
        wind = None
        if zeta is not None:
            upto = zeta[: i + 1]
            wind = winding_angle(upto)
        return RelativePeriodReport(period, drift, float(res.fun), wind, False)
    return None


class WindingError(ValueError):
    """Winding of a sampled curve cannot be determined reliably."""


def winding_angle(zeta_series, *, min_abs: float = 1e-10) -> float:
    """Total change of ``arg zeta`` along the series (radians)."""
    z = np.asarray(zeta_series, dtype=np.complex128)
    if z.size < 2:
        return 0.0
    if np.min(np.abs(z)) < min_abs * max(1.0, float(np.max(np.abs(z)))):
        raise WindingError("series passes too close to zeta = 0")
    inc = np.angle(z[1:] / z[:-1])
    if np.max(np.abs(inc)) > 0.9 * math.pi:
        raise WindingError("angle increment between samples too large; sample more densely")
    return float(np.sum(inc))


@dataclass(frozen=True)
class PairDrift:
    velocity: Velocity
    slope: float


def pair_slope(z1: CylPoint, z2: CylPoint, cyl: Cylinder) -> float:
    """``-sin((x2 - x1)/r) / sinh((y2 - y1)/r)`` (inf for a vertical drift)."""
    r = cyl.radius
    num = -math.sin((z2.x - z1.x) / r)
    den = math.sinh((z2.y - z1.y) / r)
    if den == 0.0:
        return math.copysign(math.inf, num) if num != 0.0 else math.nan
    return num / den


def vortex_pair_drift(z1: CylPoint, z2: CylPoint, gamma: float, cyl: Cylinder) -> PairDrift:
    """Common velocity of a pair ``(z1, gamma), (z2, -gamma)`` and the slope of its path."""
    cfg = Configuration(cyl, [z1.x, z2.x], [z1.y, z2.y], [gamma, -gamma])
    v = velocities(cfg)
    vx, vy = float(v[0, 0]), float(v[0, 1])
    if vx == 0.0:
        slope = math.copysign(math.inf, vy) if vy != 0.0 else math.nan
    else:
        slope = vy / vx
    return PairDrift(Velocity(vx, vy), slope)


def vortex_street_family(n: int, a: float, b: float, gamma: float, cyl: Cylinder) -> Configuration:
    """``n`` vortices ``gamma`` at ``ib + 2 pi r k/n`` and ``n`` vortices ``-gamma`` at ``a - ib + 2 pi r k/n``."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    k = np.arange(int(n))
    xs = cyl.circumference * k / n
    x = np.concatenate((xs, a + xs))
    y = np.concatenate((np.full(n, b), np.full(n, -b)))
    g = np.concatenate((np.full(n, gamma), np.full(n, -gamma)))
    return Configuration(cyl, x, y, g)


class TheoremViolation(AssertionError):
    """A relative equilibrium with nonzero drift and nonzero total vorticity was found."""


def verify_relative_equilibrium(config: Configuration, tol: float = 1e-9) -> tuple[bool, Velocity]:
    """Whether all vortices move with one common velocity, and that velocity.

    With nonzero total vorticity a relative equilibrium must be an
    equilibrium; a passing configuration drifting faster than ``tol``
    raises :class:`TheoremViolation`.
    """
    v = velocities(config)
    mean = v.mean(axis=0)
    spread = float(np.max(np.hypot(*(v - mean).T)))
    common = Velocity(float(mean[0]), float(mean[1]))
    ok = spread < tol
    scale = float(np.abs(config.gamma).sum())
    if ok and abs(config.total_vorticity) > 1e-12 * scale and common.speed > tol:
        raise TheoremViolation(
            f"relative equilibrium drifting at {common.speed:.3g} with total vorticity "
            f"{config.total_vorticity:.3g}"
        )
    return ok, common


def cotan_sum(z, n: int):
    """``(1/n) sum_{l=1..n} cot((z + pi l)/n)``, which equals ``cot z``."""
    z = np.asarray(z, dtype=np.complex128)
    l = np.arange(1, n + 1).reshape((-1,) + (1,) * z.ndim)
    w = (z + math.pi * l) / n
    return np.mean(np.cos(w) / np.sin(w), axis=0)
