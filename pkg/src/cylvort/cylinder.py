"""Geometry of the cylinder C / 2*pi*r*Z.

Horizontal coordinate ``x`` is periodic with period ``2*pi*r``; vertical
coordinate ``y`` is unbounded. Positions are canonicalized to
``0 <= x < 2*pi*r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

# Configurations closer than this (times r) are rejected at construction.
COLLISION_EXCLUSION = 1e-9


class SingularConfigurationError(ValueError):
    """Two vortices (or a vortex and a probe point) coincide on the cylinder."""


class UnwrapAmbiguityError(ValueError):
    """Nearest lift is not unique: the step moved by half a circumference."""


@dataclass(frozen=True)
class Cylinder:
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive and finite, got {self.radius!r}")

    @property
    def circumference(self) -> float:
        return 2.0 * math.pi * self.radius


@dataclass(frozen=True)
class CylPoint:
    x: float
    y: float

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def wrap(x_raw, cyl: Cylinder):
    """Return the representative of ``x_raw`` modulo ``2*pi*r`` in ``[0, 2*pi*r)``.

    Works elementwise on arrays.
    """
    arr = np.asarray(x_raw, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("wrap: non-finite coordinate")
    period = cyl.circumference
    out = np.mod(arr, period)
    # np.mod can round a tiny negative up to exactly `period`
    out = np.where(out >= period, out - period, out)
    if out.ndim == 0:
        return float(out)
    return out


def _horizontal_offset(dx, cyl: Cylinder):
    """Signed offset in (-pi*r, pi*r] equivalent to dx."""
    period = cyl.circumference
    return dx - period * np.round(dx / period)


def quotient_distance(p: CylPoint, q: CylPoint, cyl: Cylinder) -> float:
    """Shortest distance between two points on the cylinder."""
    for v in (p.x, p.y, q.x, q.y):
        if not math.isfinite(v):
            raise ValueError("quotient_distance: non-finite coordinate")
    dx = float(_horizontal_offset(p.x - q.x, cyl))
    return math.hypot(dx, p.y - q.y)


def pairwise_distances(x: FloatArray, y: FloatArray, cyl: Cylinder) -> FloatArray:
    """Matrix of quotient distances between all pairs of points."""
    dx = _horizontal_offset(x[:, None] - x[None, :], cyl)
    dy = y[:, None] - y[None, :]
    return np.hypot(dx, dy)


def unwrap_step(prev: float, new_wrapped: float, cyl: Cylinder, *, tol: float = 1e-12) -> float:
    """Lift ``new_wrapped`` to the real line, choosing the lift nearest ``prev``."""
    period = cyl.circumference
    n = round((prev - new_wrapped) / period)
    lifted = new_wrapped + n * period
    gap = abs(lifted - prev)
    if abs(gap - 0.5 * period) <= tol * period:
        raise UnwrapAmbiguityError(
            f"lift of {new_wrapped} relative to {prev} is ambiguous (step of half a period)"
        )
    return lifted


def unwrap_series(x_wrapped: FloatArray, cyl: Cylinder, start: float | None = None) -> FloatArray:
    """Continuous lift of a sampled wrapped coordinate series (axis 0 is time)."""
    xw = np.asarray(x_wrapped, dtype=np.float64)
    out = np.empty_like(xw)
    out[0] = xw[0] if start is None else start
    flat_prev = np.atleast_1d(out[0])
    for i in range(1, xw.shape[0]):
        cur = np.atleast_1d(xw[i])
        lifted = np.array([unwrap_step(p, c, cyl) for p, c in zip(flat_prev, cur)])
        out[i] = lifted if xw.ndim > 1 else lifted[0]
        flat_prev = lifted
    return out


class Configuration:
    """Vortex positions on a cylinder together with their vorticities.

    Arrays are stored read-only; ``x`` is canonical in ``[0, 2*pi*r)``.
    """

    __slots__ = ("cylinder", "x", "y", "gamma")

    def __init__(
        self,
        cylinder: Cylinder,
        x: Sequence[float] | FloatArray,
        y: Sequence[float] | FloatArray,
        gamma: Sequence[float] | FloatArray,
        *,
        check: bool = True,
    ) -> None:
        xs = np.array(x, dtype=np.float64, ndmin=1)
        ys = np.array(y, dtype=np.float64, ndmin=1)
        gs = np.array(gamma, dtype=np.float64, ndmin=1)
        if not (xs.shape == ys.shape == gs.shape) or xs.ndim != 1:
            raise ValueError("x, y and gamma must be 1-D with equal length")
        if xs.size == 0:
            raise ValueError("a configuration needs at least one vortex")
        if not (np.all(np.isfinite(ys)) and np.all(np.isfinite(gs))):
            raise ValueError("non-finite coordinate or vorticity")
        if np.any(gs == 0.0):
            raise ValueError("vorticities must be nonzero")
        xs = np.atleast_1d(wrap(xs, cylinder))
        if check and xs.size > 1:
            d = pairwise_distances(xs, ys, cylinder)
            np.fill_diagonal(d, np.inf)
            k, l = np.unravel_index(np.argmin(d), d.shape)
            if d[k, l] < COLLISION_EXCLUSION * cylinder.radius:
                i, j = sorted((int(k), int(l)))
                raise SingularConfigurationError(
                    f"vortices {i + 1} and {j + 1} coincide (distance {d[k, l]:.3g})"
                )
        for arr in (xs, ys, gs):
            arr.flags.writeable = False
        object.__setattr__(self, "cylinder", cylinder)
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)
        object.__setattr__(self, "gamma", gs)

    def __setattr__(self, name, value):
        raise AttributeError("Configuration is immutable")

    @classmethod
    def from_complex(cls, cylinder: Cylinder, z, gamma, *, check: bool = True) -> Configuration:
        z = np.asarray(z, dtype=np.complex128)
        return cls(cylinder, z.real, z.imag, gamma, check=check)

    def __len__(self) -> int:
        return self.x.size

    def __repr__(self) -> str:
        return (
            f"Configuration(r={self.cylinder.radius}, x={self.x.tolist()}, "
            f"y={self.y.tolist()}, gamma={self.gamma.tolist()})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.cylinder == other.cylinder
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.gamma, other.gamma)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def z(self) -> NDArray[np.complex128]:
        return self.x + 1j * self.y

    @property
    def points(self) -> tuple[CylPoint, ...]:
        return tuple(CylPoint(float(a), float(b)) for a, b in zip(self.x, self.y))

    @property
    def total_vorticity(self) -> float:
        return float(self.gamma.sum())

    def translated(self, dx: float, dy: float) -> Configuration:
        return Configuration(self.cylinder, self.x + dx, self.y + dy, self.gamma, check=False)

    def min_separation(self) -> float:
        if self.n < 2:
            return math.inf
        d = pairwise_distances(self.x, self.y, self.cylinder)
        np.fill_diagonal(d, np.inf)
        return float(d.min())


def nfold_copy(config: Configuration, n: int) -> Configuration:
    """``n`` side-by-side copies of ``config`` on a cylinder ``n`` times wider.

    Copy ``m`` of vortex ``k`` sits at ``z_k + 2*pi*r*m``; ordering is
    copy-major (all vortices of copy 0, then copy 1, ...).
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    period = config.cylinder.circumference
    shifts = period * np.arange(n)
    x = (config.x[None, :] + shifts[:, None]).ravel()
    y = np.tile(config.y, n)
    g = np.tile(config.gamma, n)
    return Configuration(Cylinder(config.cylinder.radius * n), x, y, g)


def project(config: Configuration, cyl: Cylinder) -> Configuration:
    """Map a configuration onto a narrower cylinder it covers (no collision check)."""
    return Configuration(cyl, config.x, config.y, config.gamma, check=False)


def _min_enclosing_circle(pts: NDArray[np.complex128]) -> tuple[complex, float]:
    """Smallest circle containing all planar points (incremental Welzl)."""

    def circle2(a: complex, b: complex) -> tuple[complex, float]:
        c = 0.5 * (a + b)
        return c, abs(a - c)

    def circle3(a: complex, b: complex, c: complex) -> tuple[complex, float]:
        bx, by = b.real - a.real, b.imag - a.imag
        cx, cy = c.real - a.real, c.imag - a.imag
        d = 2.0 * (bx * cy - by * cx)
        if abs(d) < 1e-300:
            # collinear: widest pair
            cands = [circle2(a, b), circle2(a, c), circle2(b, c)]
            return max(cands, key=lambda t: t[1])
        ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d
        uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d
        center = complex(a.real + ux, a.imag + uy)
        return center, abs(a - center)

    def inside(c: complex, rad: float, p: complex) -> bool:
        return abs(p - c) <= rad * (1 + 1e-12) + 1e-15

    p = [complex(v) for v in pts]
    c, rad = p[0], 0.0
    for i in range(1, len(p)):
        if inside(c, rad, p[i]):
            continue
        c, rad = p[i], 0.0
        for j in range(i):
            if inside(c, rad, p[j]):
                continue
            c, rad = circle2(p[i], p[j])
            for k in range(j):
                if not inside(c, rad, p[k]):
                    c, rad = circle3(p[i], p[j], p[k])
    return c, rad


def _max_quotient_offset(d: NDArray[np.complex128], t: complex, cyl: Cylinder) -> float:
    dx = _horizontal_offset(d.real - t.real, cyl)
    return float(np.max(np.hypot(dx, d.imag - t.imag)))


def shape_alignment(a: Configuration, b: Configuration) -> tuple[float, complex]:
    """Best translation ``t`` taking ``a`` onto ``b`` and the residual distance.

    ``min_t max_k dist(z_k + t, z'_k)`` over all translations ``t`` of the
    cylinder. The inner problem is the smallest enclosing circle of the
    offsets ``z'_k - z_k``; the horizontal lift of each offset is chosen
    relative to every vortex in turn, then refined against the centre found.
    """
    if a.cylinder != b.cylinder:
        raise ValueError("configurations live on different cylinders")
    if a.n != b.n or not np.array_equal(a.gamma, b.gamma):
        raise ValueError("configurations differ in vortex count or vorticities")
    cyl = a.cylinder
    d = (b.x - a.x) + 1j * (b.y - a.y)
    if a.n == 1:
        return 0.0, complex(d[0])
    best, best_t = math.inf, 0j
    for j in range(a.n):
        ref = d[j].real
        for _ in range(4):
            lifted = ref + _horizontal_offset(d.real - ref, cyl) + 1j * d.imag
            center, _ = _min_enclosing_circle(lifted)
            val = _max_quotient_offset(d, center, cyl)
            if val < best:
                best, best_t = val, center
            if abs(_horizontal_offset(center.real - ref, cyl)) < 1e-15 * cyl.circumference:
                break
            ref = center.real
    return best, complex(wrap(best_t.real, cyl), best_t.imag)


def shape_distance(a: Configuration, b: Configuration) -> float:
    """Distance between the translation orbits of two labelled configurations."""
    return shape_alignment(a, b)[0]
