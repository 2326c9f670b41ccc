"""Hamiltonian, velocity field and time integration for vortices on a cylinder."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import DOP853, RK45

from .cylinder import (
    Configuration,
    CylPoint,
    Cylinder,
    FloatArray,
    SingularConfigurationError,
    pairwise_distances,
    wrap,
)

# Evaluation inside this distance (times r) of a vortex is treated as singular.
EVAL_GUARD = 1e-12


class Velocity(NamedTuple):
    vx: float
    vy: float

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


class IntegrationError(RuntimeError):
    """The integrator could not continue (step-size underflow, too many steps)."""


def _kernel(du: FloatArray, dv: FloatArray):
    """Stable pieces of the cylinder Green's function.

    With ``u = dx/2r``, ``v = dy/2r`` and ``w = exp(-2|v|)`` this returns
    ``(den, w)`` where ``sin^2 u + sinh^2 v = den / (4 w)``; the form stays
    accurate both near collisions and at large vertical separation.
    """
    w = np.exp(-2.0 * np.abs(dv))
    one_minus_w = -np.expm1(-2.0 * np.abs(dv))
    den = one_minus_w * one_minus_w + 4.0 * w * np.sin(du) ** 2
    return den, w, one_minus_w


def log_sin2_sinh2(du, dv):
    """``log(sin(du)**2 + sinh(dv)**2)`` without overflow for large ``|dv|``."""
    du = np.asarray(du, dtype=np.float64)
    dv = np.asarray(dv, dtype=np.float64)
    den, _, _ = _kernel(du, dv)
    with np.errstate(divide="ignore"):
        return np.log(den) + 2.0 * np.abs(dv) - math.log(4.0)


def _check_guard(d: FloatArray, r: float, what: str) -> None:
    if d.size and float(np.min(d)) < EVAL_GUARD * r:
        raise SingularConfigurationError(f"{what}: evaluation at a vortex position")


def _pair_velocity_terms(x, y, gamma, r):
    """Velocity of every vortex on the cylinder (arrays of shape (N,))."""
    du = (x[:, None] - x[None, :]) / (2.0 * r)
    dv = (y[:, None] - y[None, :]) / (2.0 * r)
    den, w, omw = _kernel(du, dv)
    np.fill_diagonal(den, np.inf)
    if den.shape[0] > 1:
        off = den[~np.eye(den.shape[0], dtype=bool)]
        if np.min(off) <= 0.0:
            raise SingularConfigurationError("collision: two vortices coincide")
    sx = 2.0 * np.sign(dv) * omw * (2.0 - omw) / den  # sinh(y_k-y_l / r) / D
    sy = 4.0 * w * np.sin(2.0 * du) / den  # sin(x_k-x_l / r) / D
    vx = -(sx @ gamma) / (8.0 * math.pi * r)
    vy = (sy @ gamma) / (8.0 * math.pi * r)
    return vx, vy


def hamiltonian(config: Configuration) -> float:
    r"""Energy ``-(1/4pi) sum_{k<l} G_k G_l log(sin^2(dx/2r) + sinh^2(dy/2r))``."""
    if config.n < 2:
        return 0.0
    r = config.cylinder.radius
    d = pairwise_distances(config.x, config.y, config.cylinder)
    iu = np.triu_indices(config.n, 1)
    _check_guard(d[iu], r, "hamiltonian")
    x, y, g = config.x, config.y, config.gamma
    du = (x[:, None] - x[None, :])[iu] / (2.0 * r)
    dv = (y[:, None] - y[None, :])[iu] / (2.0 * r)
    gg = (g[:, None] * g[None, :])[iu]
    return float(-np.sum(gg * log_sin2_sinh2(du, dv)) / (4.0 * math.pi))


def hamiltonian_complex(config: Configuration) -> float:
    """Same energy written as ``-(1/2pi) sum G_k G_l log|sin((z_k - z_l)/2r)|``.

    Direct complex evaluation; overflows for vertical separations beyond ~700 r.
    """
    if config.n < 2:
        return 0.0
    r = config.cylinder.radius
    z = config.z
    iu = np.triu_indices(config.n, 1)
    dz = (z[:, None] - z[None, :])[iu]
    gg = (config.gamma[:, None] * config.gamma[None, :])[iu]
    return float(-np.sum(gg * np.log(np.abs(np.sin(dz / (2.0 * r))))) / (2.0 * math.pi))


def velocities(config: Configuration) -> FloatArray:
    """Velocities of all vortices as an ``(N, 2)`` array."""
    if config.n < 2:
        return np.zeros((config.n, 2))
    r = config.cylinder.radius
    d = pairwise_distances(config.x, config.y, config.cylinder)
    np.fill_diagonal(d, np.inf)
    _check_guard(d, r, "velocity")
    vx, vy = _pair_velocity_terms(config.x, config.y, config.gamma, r)
    return np.column_stack((vx, vy))


def velocity(config: Configuration, k: int) -> Velocity:
    if not 0 <= k < config.n:
        raise IndexError(f"vortex index {k} out of range for N={config.n}")
    vx, vy = velocities(config)[k]
    return Velocity(float(vx), float(vy))


def induced_velocity_at(config: Configuration, p: CylPoint) -> Velocity:
    """Velocity of a passive tracer at ``p`` (sum over all vortices)."""
    r = config.cylinder.radius
    px = wrap(p.x, config.cylinder)
    du = (px - config.x) / (2.0 * r)
    dv = (p.y - config.y) / (2.0 * r)
    dist = np.hypot(2.0 * r * (du - math.pi * np.round(du / math.pi)), 2.0 * r * dv)
    _check_guard(dist, r, "induced_velocity_at")
    den, w, omw = _kernel(du, dv)
    sx = 2.0 * np.sign(dv) * omw * (2.0 - omw) / den
    sy = 4.0 * w * np.sin(2.0 * du) / den
    g = config.gamma
    return Velocity(
        float(-(sx @ g) / (8.0 * math.pi * r)),
        float((sy @ g) / (8.0 * math.pi * r)),
    )


def induced_velocity_complex(config: Configuration, z: complex) -> complex:
    """``(i/4pi r) sum_l G_l cot(conj(z - z_l)/2r)`` evaluated directly."""
    r = config.cylinder.radius
    w = np.conj(z - config.z) / (2.0 * r)
    return complex(1j / (4.0 * math.pi * r) * np.sum(config.gamma / np.tan(w)))


# ---------------------------------------------------------------- integration


@dataclass(frozen=True)
class IntegratorConfig:
    """Settings for :func:`integrate`.

    ``scheme`` is ``"rk45"`` or ``"dop853"`` (adaptive embedded pairs) or
    ``"rk4"`` (fixed step ``step``). Every step is capped so that no vortex
    moves further than ``max_move`` times ``pi*r``.
    """

    scheme: Literal["rk45", "dop853", "rk4"] = "rk45"
    rtol: float = 1e-10
    atol: float = 1e-12
    step: float = 1e-2
    max_move: float = 0.25
    guard: float = 1e-6
    max_steps: int = 2_000_000
    min_step: float = 1e-14

    def __post_init__(self) -> None:
        if self.scheme not in ("rk45", "dop853", "rk4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        for name in ("rtol", "atol", "step", "max_move", "guard", "min_step"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if self.max_move > 1.0:
            raise ValueError("max_move must not exceed 1 (half a circumference per step)")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class CollisionReport:
    t: float
    pair: tuple[int, int]
    distance: float


class Sample(NamedTuple):
    """One trajectory sample in the lifted (unwrapped) chart."""

    t: float
    x: FloatArray
    y: FloatArray
    gamma: FloatArray


@dataclass
class Trajectory:
    """Time series of a vortex system.

    ``x_unwrapped`` is the continuous lift of the horizontal coordinates,
    so ``sum(gamma * (x_unwrapped + i y))`` is a well-defined momentum.
    """

    cylinder: Cylinder
    gamma: FloatArray
    t: FloatArray
    x_unwrapped: FloatArray
    y: FloatArray
    energy: FloatArray
    momentum: NDArray[np.complex128]
    status: Literal["completed", "collision"] = "completed"
    collision: CollisionReport | None = None
    nfev: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.size

    @property
    def x(self) -> FloatArray:
        return wrap(self.x_unwrapped, self.cylinder)

    @property
    def z_unwrapped(self) -> NDArray[np.complex128]:
        return self.x_unwrapped + 1j * self.y

    def config(self, i: int) -> Configuration:
        return Configuration(self.cylinder, self.x_unwrapped[i], self.y[i], self.gamma, check=False)

    def sample(self, i: int) -> Sample:
        return Sample(float(self.t[i]), self.x_unwrapped[i], self.y[i], self.gamma)

    def translated(self, dx: float, dy: float) -> Trajectory:
        xu = self.x_unwrapped + dx
        y = self.y + dy
        return Trajectory(
            self.cylinder, self.gamma, self.t.copy(), xu, y, self.energy.copy(),
            np.sum(self.gamma * (xu + 1j * y), axis=1), self.status, self.collision,
            self.nfev, dict(self.meta),
        )


def momentum(sample: Sample | Configuration) -> complex:
    """``sum_k G_k z_k`` in the chart carried by the sample."""
    return complex(np.sum(sample.gamma * (np.asarray(sample.x) + 1j * np.asarray(sample.y))))


@dataclass(frozen=True)
class Partition:
    first: tuple[int, ...]
    second: tuple[int, ...]

    def validate(self, gamma: Sequence[float]) -> None:
        n = len(gamma)
        idx = sorted(self.first + self.second)
        if idx != list(range(n)):
            raise ValueError("partition groups must be disjoint and cover all vortices")
        g = np.asarray(gamma)
        for grp in (self.first, self.second):
            if not grp or abs(g[list(grp)].sum()) < 1e-14 * np.abs(g).sum():
                raise ValueError(f"group {grp} has zero total vorticity")


def center_vector(sample: Sample | Configuration, part: Partition) -> complex:
    """Vector between the vorticity centres of the two groups of ``part``.

    Requires the total vorticity to vanish; then it equals
    ``sum(G z) / sum(G')`` and is conserved along the flow.
    """
    g = np.asarray(sample.gamma)
    part.validate(g)
    if abs(g.sum()) > 1e-12 * np.abs(g).sum():
        raise ValueError("center_vector needs zero total vorticity")
    z = np.asarray(sample.x) + 1j * np.asarray(sample.y)
    a, b = list(part.first), list(part.second)
    ca = np.sum(g[a] * z[a]) / g[a].sum()
    cb = np.sum(g[b] * z[b]) / g[b].sum()
    return complex(ca - cb)


def _rhs_factory(gamma: FloatArray, r: float):
    n = gamma.size

    def rhs(_t: float, s: FloatArray) -> FloatArray:
        vx, vy = _pair_velocity_terms(s[:n], s[n:], gamma, r)
        return np.concatenate((vx, vy))

    return rhs


def _energy_state(x, y, gamma, cyl) -> float:
    return hamiltonian(Configuration(cyl, x, y, gamma, check=False))


def _closest_pair(x, y, cyl) -> tuple[float, tuple[int, int]]:
    d = pairwise_distances(x, y, cyl)
    np.fill_diagonal(d, np.inf)
    k, l = np.unravel_index(np.argmin(d), d.shape)
    return float(d[k, l]), (min(int(k), int(l)), max(int(k), int(l)))


def integrate(
    config: Configuration,
    t_final: float,
    icfg: IntegratorConfig | None = None,
    *,
    t_eval: Sequence[float] | None = None,
    x_start: Sequence[float] | None = None,
) -> Trajectory:
    """Integrate the vortex system from ``t=0`` to ``t_final``.

    Samples are taken at accepted steps, or at ``t_eval`` (dense output)
    when given. ``x_start`` supplies an unwrapped initial chart; by default
    the canonical coordinates are used. Integration stops early, with
    ``status="collision"``, once two vortices come within ``guard*r``.
    """
    if not (math.isfinite(t_final) and t_final > 0):
        raise ValueError("t_final must be positive")
    icfg = icfg or IntegratorConfig()
    cyl = config.cylinder
    r = cyl.radius
    n = config.n
    gamma = np.array(config.gamma)
    x0 = np.array(config.x if x_start is None else x_start, dtype=np.float64)
    if x0.shape != (n,):
        raise ValueError("x_start has the wrong shape")
    offset = x0 - config.x
    if not np.allclose(offset, cyl.circumference * np.round(offset / cyl.circumference), atol=1e-9 * r):
        raise ValueError("x_start is not a lift of the configuration")
    state = np.concatenate((x0, np.array(config.y)))
    rhs = _rhs_factory(gamma, r)
    ceiling_len = icfg.max_move * math.pi * r

    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=np.float64)
        if np.any(np.diff(t_eval) <= 0) or t_eval[0] < 0 or t_eval[-1] > t_final:
            raise ValueError("t_eval must be increasing within [0, t_final]")

    ts: list[float] = []
    states: list[FloatArray] = []

    def record(t: float, s: FloatArray) -> None:
        ts.append(t)
        states.append(s.copy())

    def step_ceiling(s: FloatArray) -> float:
        v = rhs(0.0, s)
        speed = float(np.max(np.hypot(v[:n], v[n:]))) if n > 1 else 0.0
        return math.inf if speed == 0.0 else ceiling_len / speed

    eval_pos = 0
    if t_eval is None or t_eval[0] == 0.0:
        record(0.0, state)
        eval_pos = 1 if t_eval is not None else 0

    status: Literal["completed", "collision"] = "completed"
    collision = None
    nfev = 0
    t = 0.0
    steps = 0
    solver = None
    if icfg.scheme != "rk4":
        cls = DOP853 if icfg.scheme == "dop853" else RK45
        solver = cls(
            rhs, 0.0, state, t_final, rtol=icfg.rtol, atol=icfg.atol,
            max_step=min(step_ceiling(state), t_final),
        )
    while t < t_final:
        steps += 1
        if steps > icfg.max_steps:
            raise IntegrationError(f"exceeded max_steps={icfg.max_steps} at t={t}")
        if solver is not None:
            solver.max_step = min(step_ceiling(solver.y), t_final)
            msg = solver.step()
            if solver.status == "failed":
                raise IntegrationError(f"step failed at t={solver.t}: {msg}")
            t_old, t, new = solver.t_old, solver.t, solver.y
            dense = solver.dense_output() if t_eval is not None else None
            if solver.step_size is not None and solver.step_size < icfg.min_step and t < t_final:
                raise IntegrationError(f"step size underflow at t={t}")
        else:
            h = min(icfg.step, step_ceiling(state), t_final - t)
            if h < icfg.min_step:
                raise IntegrationError(f"step size underflow at t={t}")
            k1 = rhs(t, state)
            k2 = rhs(t, state + 0.5 * h * k1)
            k3 = rhs(t, state + 0.5 * h * k2)
            k4 = rhs(t, state + h * k3)
            new = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            nfev += 4
            t_old, t = t, (t + h if t_final - t > h else t_final)
            prev_state = state
            dense = None
            if t_eval is not None:
                k_new = rhs(t, new)

                def dense(tt, a=t_old, s0=prev_state, s1=new, f0=k1, f1=k_new, hh=h):
                    # cubic Hermite between step ends
                    th = (tt - a) / hh
                    h00 = 2 * th**3 - 3 * th**2 + 1
                    h10 = th**3 - 2 * th**2 + th
                    h01 = -2 * th**3 + 3 * th**2
                    h11 = th**3 - th**2
                    return h00 * s0 + h10 * hh * f0 + h01 * s1 + h11 * hh * f1

        state = np.array(new)
        dmin, pair = _closest_pair(state[:n], state[n:], cyl)
        if t_eval is None:
            record(t, state)
        else:
            while eval_pos < t_eval.size and t_eval[eval_pos] <= t:
                record(float(t_eval[eval_pos]), np.asarray(dense(t_eval[eval_pos])))
                eval_pos += 1
        if dmin < icfg.guard * r:
            status = "collision"
            collision = CollisionReport(float(t), pair, float(dmin))
            break

    if solver is not None:
        nfev = solver.nfev
    tt = np.array(ts)
    ss = np.array(states).reshape(len(states), 2 * n)
    xu, yy = ss[:, :n], ss[:, n:]
    energy = np.array([_energy_state(a, b, gamma, cyl) for a, b in zip(xu, yy)])
    mom = np.sum(gamma * (xu + 1j * yy), axis=1)
    return Trajectory(cyl, gamma, tt, xu, yy, energy, mom, status, collision, nfev, {"icfg": icfg})


def flow(config: Configuration, t: float, icfg: IntegratorConfig | None = None) -> Configuration:
    """Configuration after time ``t`` (single endpoint)."""
    if t == 0:
        return config
    traj = integrate(config, t, icfg, t_eval=[t])
    if traj.status != "completed":
        raise SingularConfigurationError(f"collision before t={t}: {traj.collision}")
    return traj.config(-1)
