"""Reduced Hamiltonians of a split vortex pair (radius normalized to 1).

A vortex pair at ``c, -c`` is split into three vortices (one member split)
or four (both members split, mirror-symmetric). Modulo translations the
motion is governed by one complex variable ``zeta = xi + i*eta`` and the
energy becomes a function of ``zeta`` alone. Lengths here are in units of
the radius; :func:`rho_critical` accepts a ``radius`` to restore units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from .cylinder import Configuration, Cylinder, FloatArray
from .dynamics import Trajectory, log_sin2_sinh2

UNIT = Cylinder(1.0)
GUARD = 1e-6
_RTOL = 4 * np.finfo(float).eps  # tightest rtol brentq accepts


class DivergenceError(ValueError):
    """The reduced Hamiltonian is evaluated on one of its singular loci."""


def _log_abs_sin(w):
    w = np.asarray(w, dtype=np.complex128)
    return 0.5 * log_sin2_sinh2(w.real, w.imag)


def _check_same_sign(gamma: float, gamma_p: float) -> None:
    if not gamma * gamma_p > 0:
        raise ValueError("gamma and gamma' must be nonzero and of the same sign")


@dataclass(frozen=True)
class Split3:
    c: complex
    gamma: float
    gamma_p: float
    zeta: complex

    def __post_init__(self) -> None:
        _check_same_sign(self.gamma, self.gamma_p)
        if self.c == 0:
            raise ValueError("pair offset c must be nonzero")


@dataclass(frozen=True)
class Split4:
    b: float
    gamma: float
    gamma_p: float
    zeta: complex

    def __post_init__(self) -> None:
        _check_same_sign(self.gamma, self.gamma_p)
        if self.b == 0:
            raise ValueError("b must be nonzero")

    @property
    def ratio(self) -> float:
        return self.gamma / self.gamma_p

    def canonical(self) -> Split4:
        """Same split with ``-pi/2 < xi <= pi/2`` (``zeta`` is defined modulo pi)."""
        xi = self.zeta.real
        xi = xi - math.pi * math.ceil((xi - math.pi / 2) / math.pi)
        return Split4(self.b, self.gamma, self.gamma_p, complex(xi, self.zeta.imag))


def split_strengths(ratio: float) -> tuple[float, float]:
    """``(gamma, gamma')`` with the given ratio and unit product."""
    if not ratio > 0:
        raise ValueError("ratio must be positive")
    g = math.sqrt(ratio)
    return g, 1.0 / g


# ------------------------------------------------------------ three vortices


def _h3(c, gamma, gamma_p, zeta):
    q = gamma / gamma_p
    log_e = (
        (1 + q) * _log_abs_sin(c + zeta / (1 + q))
        + (1 + 1 / q) * _log_abs_sin(c - zeta / (1 + 1 / q))
        - _log_abs_sin(zeta)
    )
    return gamma * gamma_p / (2 * math.pi) * log_e


def reduced_h3(s: Split3) -> float:
    """Energy of the three-vortex split as a function of ``zeta``."""
    val = float(_h3(s.c, s.gamma, s.gamma_p, s.zeta))
    if not math.isfinite(val) or abs(np.sin(s.zeta)) < 1e-300:
        raise DivergenceError(f"reduced_h3 diverges at zeta={s.zeta}")
    return val


def embed3(s: Split3) -> Configuration:
    """Vortices ``c + 2G'z/(G+G')``, ``c - 2Gz/(G+G')``, ``-c`` with vorticities ``G, G', -G-G'``."""
    g, gp = s.gamma, s.gamma_p
    z = np.array([
        s.c + 2 * gp / (g + gp) * s.zeta,
        s.c - 2 * g / (g + gp) * s.zeta,
        -s.c,
    ])
    return Configuration.from_complex(UNIT, z, [g, gp, -g - gp])


def _h3_dlog(c, q, zeta):
    """Complex derivative of the holomorphic log whose real part is ``2 pi H / (G G')``."""
    u = c + zeta / (1 + q)
    v = c - zeta / (1 + 1 / q)
    with np.errstate(all="ignore"):
        return np.cos(u) / np.sin(u) - np.cos(v) / np.sin(v) - np.cos(zeta) / np.sin(zeta)


def h3_saddles(c: complex, gamma: float, gamma_p: float, *, seeds: int = 40) -> list[CriticalPoint]:
    """Saddles of the three-vortex reduced energy near the origin.

    The energy is the real part of a holomorphic function, so every
    nondegenerate critical point is a saddle and they are the zeros of its
    complex derivative. These are found by complex Newton from a seed grid
    over one horizontal period window.
    """
    _check_same_sign(gamma, gamma_p)
    q = gamma / gamma_p
    span = math.pi * max(1 + q, 1 + 1 / q)
    height = 2.0 * (abs(complex(c).imag) + 1.0) * max(1 + q, 1 + 1 / q)
    found: list[complex] = []
    for x0 in np.linspace(-span, span, seeds):
        for y0 in np.linspace(-height, height, seeds):
            z = complex(x0, y0)
            for _ in range(60):
                f = _h3_dlog(c, q, z)
                h = 1e-6 * max(1.0, abs(z))
                df = (_h3_dlog(c, q, z + h) - _h3_dlog(c, q, z - h)) / (2 * h)
                if not (np.isfinite(f) and np.isfinite(df)) or df == 0:
                    break
                step = f / df
                z -= step
                if abs(step) < 1e-14 * max(1.0, abs(z)):
                    break
            else:
                continue
            if not (abs(z.real) <= span and abs(z.imag) <= height):
                continue
            if not abs(_h3_dlog(c, q, z)) < 1e-9:
                continue
            if abs(np.sin(z)) < 1e-6 or any(abs(z - w) < 1e-7 for w in found):
                continue
            found.append(z)
    out = []
    for z in sorted(found, key=lambda w: (round(w.real, 9), w.imag)):
        val = _h3(c, gamma, gamma_p, z)
        if np.isfinite(val):
            out.append(CriticalPoint(complex(z), "saddle", float(val)))
    return out


def h3_periodic_threshold(c: complex, gamma: float, gamma_p: float) -> float:
    """Largest saddle value: energies above it give closed level curves around ``zeta = 0``."""
    pts = h3_saddles(c, gamma, gamma_p)
    if not pts:
        raise ValueError("no saddle found in the search window")
    return max(p.value for p in pts)


# ------------------------------------------------------------- four vortices


def singular_circles(b: float, gamma: float, gamma_p: float) -> tuple[float, float]:
    """Heights ``eta`` where a vortex meets its mirror partner (lower, upper)."""
    return -b * (1 + gamma / gamma_p) / 2, b * (1 + gamma_p / gamma) / 2


def h4_grid(xi, eta, b: float, gamma: float, gamma_p: float):
    """Reduced four-vortex energy, vectorized over ``xi`` and ``eta``."""
    zeta = np.asarray(xi, dtype=np.float64) + 1j * np.asarray(eta, dtype=np.float64)
    zb = np.conj(zeta)
    q = gamma / gamma_p
    with np.errstate(divide="ignore", invalid="ignore"):
        log_e = (
            2 * _log_abs_sin(1j * b + (gamma_p * zeta + gamma * zb) / (gamma + gamma_p))
            - 2 * _log_abs_sin(zeta)
            + q * _log_abs_sin(1j * b + (zeta - zb) / (1 + q))
            + (1 / q) * _log_abs_sin(1j * b - (zeta - zb) / (1 + 1 / q))
        )
    return gamma * gamma_p / (2 * math.pi) * log_e


def h4_equal(xi, eta, b: float, gamma: float = 1.0):
    """Closed form of the four-vortex energy when both halves are equal."""
    xi = np.asarray(xi, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_e = (
            log_sin2_sinh2(xi, b)
            - log_sin2_sinh2(xi, eta)
            + np.log(np.abs(np.sinh(b + eta) * np.sinh(b - eta)))
        )
    return gamma * gamma / (2 * math.pi) * log_e


def reduced_h4(s: Split4) -> float:
    """Energy of the mirror-symmetric four-vortex split as a function of ``zeta``."""
    val = float(h4_grid(s.zeta.real, s.zeta.imag, s.b, s.gamma, s.gamma_p))
    if not math.isfinite(val):
        raise DivergenceError(f"reduced_h4 diverges at zeta={s.zeta}")
    return val


def embed4(s: Split4) -> Configuration:
    """Vortices ``G, G', -G', -G`` at ``ib + a z, ib - b' z, -ib - b' conj(z), -ib + a conj(z)``."""
    g, gp = s.gamma, s.gamma_p
    al, be = 2 * gp / (g + gp), 2 * g / (g + gp)
    z, zb = s.zeta, s.zeta.conjugate()
    pos = np.array([
        1j * s.b + al * z,
        1j * s.b - be * z,
        -1j * s.b - be * zb,
        -1j * s.b + al * zb,
    ])
    return Configuration.from_complex(UNIT, pos, [g, gp, -gp, -g])


def extract_zeta(traj: Trajectory, zeta0: complex | None = None) -> NDArray[np.complex128]:
    """Split variable along a trajectory of an embedded split (first two vortices).

    Uses the unwrapped chart, so the series is continuous; the branch
    (``zeta`` is defined modulo pi) is chosen to match ``zeta0`` at the
    first sample.
    """
    z = traj.z_unwrapped
    zeta = 0.5 * (z[:, 0] - z[:, 1])
    if zeta0 is not None:
        zeta = zeta + math.pi * round((zeta0 - zeta[0]).real / math.pi)
    return zeta


# ------------------------------------------------------- saddles and rho


def _eta_re_equation(eta: float, b: float, g: float, gp: float) -> float:
    q = g / gp
    return (
        (g + gp) * math.tanh(eta)
        + (g - gp) * math.tanh(b - (g - gp) / (g + gp) * eta)
        - g / math.tanh(b + 2 * eta / (1 + q))
        + gp / math.tanh(b - 2 * eta / (1 + 1 / q))
    )


def eta_re(b: float, gamma: float, gamma_p: float) -> float:
    """Height of the saddle on ``xi = pi/2``: the antipodal pairs move together."""
    if not b > 0:
        raise ValueError("b must be positive")
    _check_same_sign(gamma, gamma_p)
    if gamma == gamma_p:
        return 0.0
    lo, hi = singular_circles(b, gamma, gamma_p)
    a, c = lo + GUARD, hi - GUARD
    fa, fc = _eta_re_equation(a, b, gamma, gamma_p), _eta_re_equation(c, b, gamma, gamma_p)
    if fa * fc > 0:
        raise ValueError("eta_re: no sign change between the singular circles")
    return brentq(_eta_re_equation, a, c, args=(b, gamma, gamma_p), xtol=1e-15, rtol=_RTOL)


def eta_re_perturbative(b: float, eps: float) -> float:
    """Second-order expansion of :func:`eta_re` for ``gamma/gamma' = 1 + eps``."""
    sech2 = 1.0 / math.cosh(b) ** 2
    return math.tanh(b) * sech2 * (eps / 2 - (1 + sech2 * sech2 / 2) * eps * eps / 4)


def rho_equal(b: float) -> float:
    """Leapfrog threshold for equal halves: ``sqrt(2) tanh(rho) = tanh(b)``."""
    return math.atanh(math.tanh(b) / math.sqrt(2.0))


def rho_perturbative(b: float, eps: float) -> float:
    """Second-order expansion of the threshold for ``gamma/gamma' = 1 + eps``."""
    sech2 = 1.0 / math.cosh(b) ** 2
    return rho_equal(b) - math.tanh(b) * sech2 / (1 + math.cosh(b) ** 2) * eps * eps / (4 * math.sqrt(2.0))


@dataclass(frozen=True)
class SeparatrixResult:
    zeta_re: complex
    rho: float
    h_saddle: float
    direction: int = 1  # +1: crossing above the origin, -1: below


def rho_critical(b: float, gamma: float, gamma_p: float, *, radius: float = 1.0) -> SeparatrixResult:
    """Where the separatrix through the saddle at ``xi = pi/2`` crosses ``xi = 0``.

    The crossing is sought between the origin and the nearer singular
    circle. ``radius`` rescales ``b`` in and ``rho``/``zeta_re`` out.
    """
    if not (b > 0 and radius > 0):
        raise ValueError("b and radius must be positive")
    _check_same_sign(gamma, gamma_p)
    bn = b / radius
    e_re = eta_re(bn, gamma, gamma_p)
    h_s = float(h4_grid(math.pi / 2, e_re, bn, gamma, gamma_p))
    if gamma == gamma_p:
        return SeparatrixResult(complex(math.pi / 2, 0.0) * radius, rho_equal(bn) * radius, h_s, 1)
    lo, hi = singular_circles(bn, gamma, gamma_p)
    direction, edge = (1, hi) if hi <= -lo else (-1, -lo)

    def f(t: float) -> float:
        return float(h4_grid(0.0, direction * t, bn, gamma, gamma_p)) - h_s

    a, c = GUARD, edge - GUARD
    if f(a) * f(c) > 0:
        raise ValueError("rho_critical: separatrix crossing not bracketed")
    rho = brentq(f, a, c, xtol=1e-15, rtol=_RTOL)
    return SeparatrixResult(complex(math.pi / 2, e_re) * radius, rho * radius, h_s, direction)


Regime = Literal["leapfrog", "pair-escape", "near-separatrix", "trunk-periodic"]


def classify_regime(s: Split4, *, band: float = 1e-6) -> Regime:
    """Leapfrogging (inside the separatrix around the origin) or not.

    Outside the middle band between the singular circles there is no
    leapfrogging; for equal halves bounded motion there is reported as
    ``"trunk-periodic"`` when ``pi H / G^2 < log sinh|b|``.
    """
    lo, hi = singular_circles(abs(s.b), s.gamma, s.gamma_p)
    eta = s.zeta.imag if s.b > 0 else -s.zeta.imag
    h0 = reduced_h4(s)
    if not lo < eta < hi:
        if s.gamma == s.gamma_p and math.pi * h0 / s.gamma**2 < math.log(math.sinh(abs(s.b))):
            return "trunk-periodic"
        return "pair-escape"
    h_s = rho_critical(abs(s.b), s.gamma, s.gamma_p).h_saddle
    if abs(h0 - h_s) <= band * max(1.0, abs(h_s)):
        return "near-separatrix"
    return "leapfrog" if h0 > h_s else "pair-escape"


# --------------------------------------------------------- critical points


def _dh_deta(xi: float, eta: float, b, g, gp, h=1e-6) -> float:
    return float((h4_grid(xi, eta + h, b, g, gp) - h4_grid(xi, eta - h, b, g, gp)) / (2 * h))


def hessian4(zeta: complex, b: float, gamma: float, gamma_p: float, h: float = 1e-4) -> FloatArray:
    """Central-difference Hessian of the reduced energy in ``(xi, eta)``."""
    x, y = zeta.real, zeta.imag

    def f(a, c):
        return float(h4_grid(a, c, b, gamma, gamma_p))

    fxx = (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / h**2
    fyy = (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / h**2
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h)
    return np.array([[fxx, fxy], [fxy, fyy]])


@dataclass(frozen=True)
class CriticalPoint:
    zeta: complex
    kind: Literal["saddle", "maximum", "minimum"]
    value: float


def critical_points_on_line(
    xi: float, eta_lo: float, eta_hi: float, b: float, gamma: float, gamma_p: float, samples: int = 4000
) -> list[CriticalPoint]:
    """Critical points on a symmetry line ``xi = 0`` or ``xi = pi/2``.

    On these lines ``dH/dxi`` vanishes by symmetry, so zeros of ``dH/deta``
    are critical points; each is classified by its Hessian.
    """
    etas = np.linspace(eta_lo, eta_hi, samples)
    d = np.array([_dh_deta(xi, e, b, gamma, gamma_p) for e in etas])
    floor = 1e-8 * max(1.0, abs(gamma * gamma_p))
    out = []
    for i in range(samples - 1):
        if not (np.isfinite(d[i]) and np.isfinite(d[i + 1])) or d[i] * d[i + 1] > 0:
            continue
        if max(abs(d[i]), abs(d[i + 1])) < floor:
            continue  # difference quotient is roundoff where H is flat
        e = brentq(lambda t: _dh_deta(xi, t, b, gamma, gamma_p), etas[i], etas[i + 1], xtol=1e-13)
        z = complex(xi, e)
        hs = hessian4(z, b, gamma, gamma_p)
        ev = np.linalg.eigvalsh(hs)
        kind = "saddle" if ev[0] * ev[1] < 0 else ("maximum" if ev[1] < 0 else "minimum")
        out.append(CriticalPoint(z, kind, float(h4_grid(xi, e, b, gamma, gamma_p))))
    return out


def critical_points_upper_trunk(b: float, gamma: float, gamma_p: float, eta_max: float = 40.0) -> list[CriticalPoint]:
    """Critical points above the upper singular circle (the trunk ``C+``)."""
    _, hi = singular_circles(b, gamma, gamma_p)
    pts: list[CriticalPoint] = []
    for xi in (0.0, math.pi / 2):
        breaks = [hi]
        if xi == 0.0 and gamma != gamma_p:
            pole = b * (gamma + gamma_p) / (gamma - gamma_p)
            if hi < pole < eta_max:
                breaks.append(pole)
        breaks.append(eta_max)
        for a, c in zip(breaks[:-1], breaks[1:]):
            pts += critical_points_on_line(xi, a + 1e-4, c - 1e-4, b, gamma, gamma_p)
    return pts


# -------------------------------------------------------------- level grids


@dataclass
class LevelGrid:
    """Reduced energy sampled on a rectangle of ``zeta`` values.

    ``values[i, j]`` is at ``eta[i]``, ``xi[j]`` (both ascending); ``mask``
    marks singular or clipped cells.
    """

    kind: Literal["split3", "split4"]
    xi: FloatArray
    eta: FloatArray
    values: FloatArray
    mask: NDArray[np.bool_]
    params: dict = field(default_factory=dict)

    def masked(self) -> FloatArray:
        return np.where(self.mask, np.nan, self.values)


def _symmetric_axis(lo: float, hi: float, n: int) -> FloatArray:
    ax = np.linspace(lo, hi, n)
    if lo == -hi:
        ax = 0.5 * (ax - ax[::-1])  # exact mirror symmetry about 0
    return ax


def level_grid(
    kind: Literal["split3", "split4"],
    params: dict,
    window: tuple[float, float, float, float],
    resolution: tuple[int, int],
) -> LevelGrid:
    """Sample the reduced energy of a split on ``window = (xi0, xi1, eta0, eta1)``.

    ``params`` holds ``b, gamma, gamma_p`` (split4) or ``c, gamma, gamma_p``
    (split3). Cells where ``|H|`` exceeds ``50 G G'/2pi`` are masked.
    """
    nx, ny = resolution
    if nx < 1 or ny < 1:
        raise ValueError("resolution must be positive")
    xi0, xi1, eta0, eta1 = window
    xi = _symmetric_axis(xi0, xi1, nx)
    eta = _symmetric_axis(eta0, eta1, ny)
    g, gp = float(params["gamma"]), float(params["gamma_p"])
    _check_same_sign(g, gp)
    X, Y = np.meshgrid(xi, eta)
    if kind == "split4":
        vals = h4_grid(X, Y, float(params["b"]), g, gp)
    elif kind == "split3":
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = _h3(complex(params["c"]), g, gp, X + 1j * Y)
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    cap = 50 * abs(g * gp) / (2 * math.pi)
    mask = ~np.isfinite(vals) | (np.abs(vals) > cap)
    return LevelGrid(kind, xi, eta, np.asarray(vals, dtype=np.float64), mask, dict(params))
