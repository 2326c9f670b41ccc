"""Equilibria of vortices on a cylinder.

Same-sign vorticities: one equilibrium per cyclic ordering, all vortices on
a horizontal circle, found by minimizing the restricted energy. Three
vortices with mixed signs: place the third vortex at a stagnation point of
the first two and solve for its vorticity.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .cylinder import Configuration, CylPoint, Cylinder, FloatArray, wrap
from .dynamics import induced_velocity_at, velocities


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, last=None):
        super().__init__(message)
        self.last = last


@dataclass(frozen=True)
class Certificate:
    ok: bool
    reason: str | None
    eigenvalues: FloatArray


@dataclass(frozen=True)
class EquilibriumResult:
    configuration: Configuration
    residual: float
    hessian_spectrum: FloatArray
    certified: bool
    certificate: Certificate
    iterations: int = 0


@dataclass(frozen=True)
class CyclicOrder:
    """Order of the vortices around the horizontal circle (0-based labels)."""

    perm: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")

    @classmethod
    def identity(cls, n: int) -> CyclicOrder:
        return cls(tuple(range(n)))

    def rotated(self) -> CyclicOrder:
        """Same cyclic order, read starting from vortex 0."""
        i = self.perm.index(0)
        return CyclicOrder(self.perm[i:] + self.perm[:i])

    def canonical(self) -> CyclicOrder:
        """Representative of the order up to rotation and reversal.

        Starts at vortex 0 and is oriented so that vortex 1 comes before
        vortex N-1.
        """
        p = self.rotated().perm
        n = len(p)
        if n > 2 and p.index(1) > p.index(n - 1):
            p = (p[0],) + tuple(reversed(p[1:]))
        return CyclicOrder(p)


def cyclic_orders(n: int) -> Iterator[CyclicOrder]:
    """All canonical cyclic orders of ``n`` labelled vortices."""
    seen = set()
    for tail in itertools.permutations(range(1, n)):
        c = CyclicOrder((0,) + tail).canonical()
        if c.perm not in seen:
            seen.add(c.perm)
            yield c


# ------------------------------------------------------------ certificates


def gershgorin_certificate(a, *, tol: float = 1e-10) -> Certificate:
    """Check the sign pattern that forces a simple zero eigenvalue.

    Hypotheses: symmetric, strictly negative off-diagonal entries, positive
    diagonal, zero row sums. Then 0 is a simple eigenvalue and the rest are
    positive; the computed eigenvalues are returned for cross-checking.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return Certificate(False, "matrix is not square", np.array([]))
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    eig = np.sort(np.linalg.eigvalsh(0.5 * (a + a.T))) if a.size else np.array([])
    n = a.shape[0]
    if not np.allclose(a, a.T, rtol=0.0, atol=tol * max(scale, 1.0)):
        return Certificate(False, "matrix is not symmetric", eig)
    if n == 0 or scale == 0.0:
        return Certificate(False, "matrix is empty or zero", eig)
    off = a[~np.eye(n, dtype=bool)]
    if off.size and np.any(off >= 0.0):
        return Certificate(False, "off-diagonal entry is not negative", eig)
    if np.any(np.diag(a) <= 0.0):
        return Certificate(False, "diagonal entry is not positive", eig)
    rows = np.abs(a.sum(axis=1))
    if np.any(rows > tol * scale * n):
        return Certificate(False, f"row sums do not vanish (max {rows.max():.3g})", eig)
    # the conclusion, confirmed numerically
    if abs(eig[0]) > tol * scale * n or (n > 1 and eig[1] <= tol * scale * n):
        return Certificate(False, "spectrum disagrees with the hypotheses", eig)
    return Certificate(True, None, eig)


# --------------------------------------------------------- ring equilibria


def _circle_derivatives(x: FloatArray, g: FloatArray, r: float):
    """Energy, gradient and Hessian of vortices restricted to one horizontal circle."""
    n = x.size
    half = (x[:, None] - x[None, :]) / (2.0 * r)
    eye = np.eye(n, dtype=bool)
    s = np.sin(half)
    s[eye] = 1.0
    gg = g[:, None] * g[None, :]
    iu = np.triu_indices(n, 1)
    energy = -np.sum(gg[iu] * np.log(s[iu] ** 2)) / (4.0 * math.pi)
    cot = np.cos(half) / s
    cot[eye] = 0.0
    grad = -np.sum(gg * cot, axis=1) / (4.0 * math.pi * r)
    csc2 = 1.0 / s**2
    hess = -gg * csc2 / (8.0 * math.pi * r * r)
    hess[eye] = 0.0
    hess[eye] = -hess.sum(axis=1)
    return energy, grad, hess


def restricted_hessian(config: Configuration) -> FloatArray:
    """Hessian in the horizontal coordinates of a configuration on one circle."""
    _, _, hess = _circle_derivatives(np.array(config.x), np.array(config.gamma), config.cylinder.radius)
    return hess


def is_equilibrium(config: Configuration, tol: float = 1e-9) -> tuple[bool, float]:
    """``(max speed < tol, max speed)``."""
    v = velocities(config)
    res = float(np.max(np.hypot(v[:, 0], v[:, 1]))) if config.n else 0.0
    return res < tol, res


def _gaps(p: FloatArray, period: float) -> FloatArray:
    return np.diff(np.concatenate(([0.0], p, [period])))


def ring_equilibrium(
    vorticities: Sequence[float],
    order: CyclicOrder | None,
    cyl: Cylinder,
    *,
    x_init: Sequence[float] | None = None,
    grad_tol: float = 1e-12,
    residual_tol: float = 1e-9,
    barrier_steps: int = 4,
    max_iter: int = 200,
) -> EquilibriumResult:
    """Equilibrium of same-sign vortices on the circle ``y = 0`` in a given cyclic order.

    Gauge: the first vortex of ``order`` sits at ``x = 0``. ``x_init`` gives
    the starting positions of the remaining vortices (increasing, inside
    ``(0, 2*pi*r)``); equal spacing by default. A log-barrier on the gaps
    with a decreasing weight is used for the first ``barrier_steps`` Newton
    iterations, then plain damped Newton.
    """
    g_all = np.asarray(vorticities, dtype=np.float64)
    n = g_all.size
    if n < 2:
        raise ValueError("need at least two vortices")
    if not (np.all(g_all > 0) or np.all(g_all < 0)):
        raise ValueError("ring equilibria need vorticities of one sign")
    order = (order or CyclicOrder.identity(n)).rotated()
    if len(order.perm) != n:
        raise ValueError("cyclic order has the wrong length")
    perm = np.array(order.perm)
    g = g_all[perm]
    r = cyl.radius
    period = cyl.circumference

    if x_init is None:
        p = period * np.arange(1, n) / n
    else:
        p = np.asarray(x_init, dtype=np.float64).copy()
        if p.shape != (n - 1,) or np.any(_gaps(p, period) <= 0):
            raise ValueError("x_init must be n-1 increasing positions inside (0, 2*pi*r)")

    scale = float(np.sum(g * g)) / (4.0 * math.pi * r)

    def objective(q: FloatArray, mu: float):
        e, gr, he = _circle_derivatives(np.concatenate(([0.0], q)), g, r)
        gr, he = gr[1:], he[1:, 1:]
        if mu > 0:
            gaps = _gaps(q, period)
            e = e - mu * np.sum(np.log(gaps))
            # gap_i = q_i - q_{i-1}
            dg = np.zeros((n, n - 1))
            dg[np.arange(n - 1), np.arange(n - 1)] = 1.0
            dg[np.arange(1, n), np.arange(n - 1)] = -1.0
            gr = gr - mu * dg.T @ (1.0 / gaps)
            he = he + mu * dg.T @ np.diag(1.0 / gaps**2) @ dg
        return e, gr, he

    it = 0
    mu = 0.1 * scale
    converged = False
    for it in range(1, max_iter + 1):
        mu_now = mu * 0.1 ** (it - 1) if it <= barrier_steps else 0.0
        e, gr, he = objective(p, mu_now)
        if mu_now == 0.0 and np.linalg.norm(gr) < grad_tol * max(1.0, scale):
            converged = True
            break
        try:
            step = -np.linalg.solve(he, gr)
            if gr @ step >= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = -gr  # gradient-descent fallback
        cand = p + step
        if np.all(_gaps(cand, period) > 0) and (
            np.linalg.norm(objective(cand, mu_now)[1]) < np.linalg.norm(gr)
        ):
            p = cand
            continue
        t = 1.0
        while True:
            cand = p + t * step
            if np.all(_gaps(cand, period) > 0):
                e_new = objective(cand, mu_now)[0]
                if e_new <= e + 1e-4 * t * (gr @ step):
                    break
            t *= 0.5
            if t < 1e-16:
                break
        if t < 1e-16:
            # no descent left in floating point
            break
        p = cand
    if not converged:
        _, gr, _ = objective(p, 0.0)
        if np.linalg.norm(gr) > 1e3 * grad_tol * max(1.0, scale):
            raise ConvergenceError(
                f"ring equilibrium did not converge (|grad|={np.linalg.norm(gr):.3g})", last=p
            )

    x = np.empty(n)
    x[perm] = np.concatenate(([0.0], p))
    cfg = Configuration(cyl, x, np.zeros(n), g_all)
    ok, res = is_equilibrium(cfg, residual_tol)
    hess = restricted_hessian(cfg)
    cert = gershgorin_certificate(hess)
    return EquilibriumResult(cfg, res, cert.eigenvalues, bool(ok and cert.ok), cert, it)


def thread_cap() -> int:
    """Worker cap from ``CYLVORT_THREADS`` (default 1)."""
    raw = os.environ.get("CYLVORT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"CYLVORT_THREADS must be an integer >= 1, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"CYLVORT_THREADS must be an integer >= 1, got {raw!r}")
    return n


def ring_multistart(
    vorticities: Sequence[float],
    order: CyclicOrder | None,
    cyl: Cylinder,
    starts: int,
    rng: np.random.Generator,
) -> list[EquilibriumResult]:
    """Run :func:`ring_equilibrium` from random gap distributions."""
    n = len(vorticities)
    inits = []
    for _ in range(starts):
        gaps = rng.uniform(0.05, 1.0, n)
        gaps *= cyl.circumference / gaps.sum()
        inits.append(np.cumsum(gaps)[:-1])
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        return list(pool.map(lambda q: ring_equilibrium(vorticities, order, cyl, x_init=q), inits))


# -------------------------------------------------- three-vortex equilibria


def _cot(w):
    return np.cos(w) / np.sin(w)


def stagnation_points(
    z1: CylPoint, z2: CylPoint, gamma1: float, gamma2: float, cyl: Cylinder, *, tol: float = 1e-10
) -> tuple[CylPoint, CylPoint]:
    """The two points where the flow induced by two vortices vanishes.

    With ``q = exp(i z / r)`` the condition
    ``G1 cot((z - z1)/2r) + G2 cot((z - z2)/2r) = 0`` is a quadratic in ``q``;
    its roots are polished by complex Newton and checked against the
    velocity field.
    """
    if gamma1 + gamma2 == 0:
        raise ValueError("stagnation points need gamma1 + gamma2 != 0")
    r = cyl.radius
    w1, w2 = z1.z, z2.z
    if abs(np.sin((w1 - w2) / (2 * r))) < 1e-12:
        raise ValueError("z1 and z2 coincide on the cylinder")
    a1, a2 = np.exp(1j * w1 / r), np.exp(1j * w2 / r)
    s = gamma1 + gamma2
    roots = np.roots([s, (gamma1 - gamma2) * (a1 - a2), -s * a1 * a2])
    out = []
    for q in roots:
        z = -1j * r * np.log(q)
        for _ in range(20):
            f = gamma1 * _cot((z - w1) / (2 * r)) + gamma2 * _cot((z - w2) / (2 * r))
            df = -(gamma1 / np.sin((z - w1) / (2 * r)) ** 2 + gamma2 / np.sin((z - w2) / (2 * r)) ** 2) / (2 * r)
            dz = f / df
            z = z - dz
            if abs(dz) < 1e-16 * max(1.0, abs(z)):
                break
        p = CylPoint(wrap(z.real, cyl), float(z.imag))
        probe = Configuration(cyl, [w1.real, w2.real], [w1.imag, w2.imag], [gamma1, gamma2])
        speed = induced_velocity_at(probe, p).speed
        if speed > tol * max(1.0, (abs(gamma1) + abs(gamma2)) / r):
            raise ConvergenceError(f"stagnation point residual {speed:.3g} above tolerance", last=p)
        out.append(p)
    return out[0], out[1]


def completing_vorticity(
    z1: CylPoint,
    z2: CylPoint,
    gamma1: float,
    gamma2: float,
    z3: CylPoint,
    cyl: Cylinder,
    *,
    tol: float = 1e-9,
) -> float:
    """Vorticity to place at the stagnation point ``z3`` so that all three vortices are fixed.

    Solves ``G2 cot((z1-z2)/2r) + G3 cot((z1-z3)/2r) = 0`` and checks that
    ``z2`` is then stationary as well.
    """
    r = cyl.radius
    c13 = _cot((z1.z - z3.z) / (2 * r))
    if abs(c13) < 1e-12:
        raise ValueError("cot((z1 - z3)/2r) vanishes: z3 cannot immobilize z1")
    g3c = -gamma2 * _cot((z1.z - z2.z) / (2 * r)) / c13
    if abs(g3c.imag) > tol * max(1.0, abs(g3c)):
        raise ValueError(
            f"no real vorticity immobilizes z1 from z3 (ratio {g3c:.6g}); "
            "z3 must be a stagnation point and z1, z2 aligned horizontally or vertically"
        )
    g3 = float(g3c.real)
    check = g3 * _cot((z2.z - z3.z) / (2 * r)) + gamma1 * _cot((z2.z - z1.z) / (2 * r))
    if abs(check) > tol * max(1.0, abs(gamma1) + abs(g3)):
        raise ValueError(f"z2 is not immobilized (residual {abs(check):.3g})")
    return g3


def complete3(
    z1: CylPoint, z2: CylPoint, gamma1: float, gamma2: float, cyl: Cylinder, which: int = 0
) -> Configuration:
    """Three-vortex equilibrium built on stagnation point ``which`` (0 or 1)."""
    z3 = stagnation_points(z1, z2, gamma1, gamma2, cyl)[which]
    g3 = completing_vorticity(z1, z2, gamma1, gamma2, z3, cyl)
    return Configuration(cyl, [z1.x, z2.x, z3.x], [z1.y, z2.y, z3.y], [gamma1, gamma2, g3])


def vertical_completion(gamma: float, b: float, r: float) -> float:
    """Closed form for two vortices ``2ib`` apart, third at their midpoint."""
    return gamma * (0.5 / math.cosh(b / (2 * r)) ** 2 - 1.0)


def horizontal_completion(gamma: float, a: float, r: float) -> float:
    """Closed form for two vortices ``2a`` apart horizontally, third at their midpoint."""
    return gamma * (0.5 / math.cos(a / (2 * r)) ** 2 - 1.0)
