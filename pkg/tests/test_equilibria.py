from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import minimize

from cylvort.cylinder import Configuration, CylPoint, Cylinder, quotient_distance, shape_distance
from cylvort.dynamics import induced_velocity_at, velocities
from cylvort.equilibria import (
    ConvergenceError,
    CyclicOrder,
    complete3,
    completing_vorticity,
    cyclic_orders,
    gershgorin_certificate,
    horizontal_completion,
    is_equilibrium,
    restricted_hessian,
    ring_equilibrium,
    ring_multistart,
    stagnation_points,
    thread_cap,
    vertical_completion,
)

UNIT = Cylinder(1.0)


class TestCyclicOrder:
    def test_canonical_form(self):
        assert CyclicOrder((2, 0, 1)).canonical().perm == (0, 1, 2)
        assert CyclicOrder((0, 2, 1)).canonical().perm == (0, 1, 2)  # reversal
        assert CyclicOrder((3, 1, 0, 2)).canonical() == CyclicOrder((0, 2, 3, 1)).canonical()

    def test_count(self):
        # (n-1)!/2 classes for n >= 3
        assert [len(list(cyclic_orders(n))) for n in (3, 4, 5)] == [1, 3, 12]

    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            CyclicOrder((0, 0, 1))


class TestGershgorin:
    def test_smallest_instance(self):
        c = gershgorin_certificate([[1.0, -1.0], [-1.0, 1.0]])
        assert c.ok
        np.testing.assert_allclose(c.eigenvalues, [0.0, 2.0], atol=1e-15)

    @pytest.mark.parametrize(
        "a, reason",
        [
            ([[1.0, 0.5, -1.5], [0.5, 1.0, -1.5], [-1.5, -1.5, 3.0]], "off-diagonal"),
            ([[1.0, -1.0], [-2.0, 2.0]], "symmetric"),
            ([[2.0, -1.0], [-1.0, 2.0]], "row sums"),
            ([[0.0, 0.0], [0.0, 0.0]], "zero"),
        ],
    )
    def test_violations(self, a, reason):
        c = gershgorin_certificate(a)
        assert not c.ok and reason in c.reason

    def test_random_laplacians(self):
        rng = np.random.default_rng(0)
        for n in range(2, 8):
            w = rng.uniform(0.1, 2.0, (n, n))
            w = w + w.T
            a = -w
            np.fill_diagonal(a, 0.0)
            np.fill_diagonal(a, -a.sum(axis=1))
            c = gershgorin_certificate(a)
            assert c.ok
            assert abs(c.eigenvalues[0]) < 1e-12 and c.eigenvalues[1] > 0


class TestRingEquilibrium:
    @pytest.mark.parametrize("n", [2, 3, 5, 7])
    def test_equal_vorticities_equal_spacing(self, n):
        r = 1.3
        res = ring_equilibrium([2.0] * n, None, Cylinder(r))
        expected = 2 * math.pi * r * np.arange(n) / n
        np.testing.assert_allclose(res.configuration.x, expected, atol=1e-10)
        assert res.certified

    def test_two_vortices_antipodal(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            g = rng.uniform(0.1, 5, 2)
            res = ring_equilibrium(g, None, UNIT, x_init=[rng.uniform(0.1, 6.1)])
            assert res.configuration.x[1] - res.configuration.x[0] == pytest.approx(math.pi, abs=1e-10)

    def test_against_independent_minimizer(self):
        g = np.array([1.0, 1.0, 2.0])
        res = ring_equilibrium(g, None, UNIT)
        assert res.residual < 1e-10

        def energy(q):
            x = np.concatenate(([0.0], q))
            s2 = np.sin((x[:, None] - x[None, :]) / 2) ** 2
            iu = np.triu_indices(3, 1)
            return -np.sum(np.outer(g, g)[iu] * np.log(s2[iu])) / (4 * math.pi)

        best = None
        rng = np.random.default_rng(2)
        for _ in range(5):
            q0 = np.sort(rng.uniform(0.5, 5.8, 2))
            sol = minimize(energy, q0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
            if best is None or sol.fun < best.fun:
                best = sol
        np.testing.assert_allclose(res.configuration.x[1:], np.sort(np.mod(best.x, 2 * math.pi)), atol=1e-6)

    def test_certificate_and_spectrum(self):
        res = ring_equilibrium([1.0, 2.5, 0.7, 1.9], CyclicOrder((0, 2, 1, 3)), UNIT)
        assert res.certified and res.certificate.ok
        ev = res.hessian_spectrum
        assert np.all(np.diff(ev) >= 0)
        assert abs(ev[0]) < 1e-10 and ev[1] > 0
        h = restricted_hessian(res.configuration)
        off = h[~np.eye(4, dtype=bool)]
        assert np.all(off < 0) and np.all(np.diag(h) > 0)

    def test_order_is_respected(self):
        order = CyclicOrder((0, 2, 1, 3))
        res = ring_equilibrium([1.0, 2.5, 0.7, 1.9], order, UNIT)
        x = res.configuration.x
        assert list(np.argsort(x)) == [0, 2, 1, 3]

    def test_multistart_agrees(self):
        g = [0.5, 1.0, 1.7, 2.2, 0.9]
        for order in list(cyclic_orders(5))[:3]:
            results = ring_multistart(g, order, UNIT, 10, np.random.default_rng(3))
            base = results[0].configuration
            assert max(shape_distance(base, r.configuration) for r in results) < 1e-8

    def test_negative_vorticities(self):
        res = ring_equilibrium([-1.0, -2.0, -3.0], None, UNIT)
        assert res.certified and res.residual < 1e-10

    def test_preconditions(self):
        with pytest.raises(ValueError):
            ring_equilibrium([1.0, -1.0], None, UNIT)
        with pytest.raises(ValueError):
            ring_equilibrium([1.0], None, UNIT)
        with pytest.raises(ValueError):
            ring_equilibrium([1.0, 1.0, 1.0], None, UNIT, x_init=[3.0, 2.0])

    def test_nonconvergence_reports_last_iterate(self):
        with pytest.raises(ConvergenceError) as info:
            ring_equilibrium([1.0, 2.0, 3.0], None, UNIT, max_iter=1, barrier_steps=1)
        assert info.value.last is not None

    def test_thread_cap(self, monkeypatch):
        monkeypatch.setenv("CYLVORT_THREADS", "3")
        assert thread_cap() == 3
        monkeypatch.setenv("CYLVORT_THREADS", "0")
        with pytest.raises(ValueError):
            thread_cap()


class TestNonexistenceOffCircle:
    def test_top_and_bottom_move_oppositely(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            sign = rng.choice([-1.0, 1.0])
            y = rng.uniform(-1, 1, n)
            if np.ptp(y) < 1e-3:
                continue
            c = Configuration(UNIT, rng.uniform(0, 6.28, n), y, sign * rng.uniform(0.2, 2, n))
            if c.min_separation() < 1e-3:
                continue
            v = velocities(c)
            top, bottom = int(np.argmax(c.y)), int(np.argmin(c.y))
            assert v[top, 0] * v[bottom, 0] < 0
            assert not is_equilibrium(c)[0]


class TestIsEquilibrium:
    def test_examples(self):
        ok, res = is_equilibrium(Configuration(UNIT, [0, math.pi], [0, 0], [1, 1]))
        assert ok and res < 1e-15
        ok, res = is_equilibrium(Configuration(UNIT, [0, 1, 2.5], [0.2, -0.3, 0.8], [1, 2, -1]))
        assert not ok and res > 1e-3


class TestStagnation:
    def test_vertical_pair(self):
        r, b = 1.5, 0.7
        cyl = Cylinder(r)
        pts = stagnation_points(CylPoint(0, b), CylPoint(0, -b), 1.0, 1.0, cyl)
        expected = [CylPoint(0, 0), CylPoint(math.pi * r, 0)]
        for e in expected:
            assert min(quotient_distance(e, p, cyl) for p in pts) < 1e-12

    def test_horizontal_pair(self):
        a = 0.6
        pts = stagnation_points(CylPoint(-a, 0), CylPoint(a, 0), 2.0, 2.0, UNIT)
        for e in (CylPoint(0, 0), CylPoint(math.pi, 0)):
            assert min(quotient_distance(e, p, UNIT) for p in pts) < 1e-12

    def test_defining_property_general_position(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            r = rng.uniform(0.5, 3)
            cyl = Cylinder(r)
            z1 = CylPoint(rng.uniform(0, 6), rng.uniform(-2, 2))
            z2 = CylPoint(rng.uniform(0, 6), rng.uniform(-2, 2))
            g1, g2 = rng.uniform(0.2, 3, 2)
            pts = stagnation_points(z1, z2, g1, g2, cyl)
            probe = Configuration(cyl, [z1.x, z2.x], [z1.y, z2.y], [g1, g2])
            for p in pts:
                assert induced_velocity_at(probe, p).speed < 1e-10
            assert quotient_distance(pts[0], pts[1], cyl) > 1e-6

    def test_coincident_rejected(self):
        with pytest.raises(ValueError):
            stagnation_points(CylPoint(0, 0), CylPoint(2 * math.pi, 0), 1, 1, UNIT)


class TestCompletion:
    def test_vertical_closed_form(self):
        for r in (0.7, 1.0, 2.0):
            cyl = Cylinder(r)
            for b in (0.1, 0.5, 1.3, 4.0):
                g = 1.7
                z1, z2, z3 = CylPoint(0.3, b), CylPoint(0.3, -b), CylPoint(0.3, 0)
                g3 = completing_vorticity(z1, z2, g, g, z3, cyl)
                expected = g * (0.5 / math.cosh(b / (2 * r)) ** 2 - 1)
                assert g3 == pytest.approx(expected, abs=1e-12)
                assert vertical_completion(g, b, r) == pytest.approx(expected, abs=1e-15)
                assert g3 < -g / 2

    def test_horizontal_closed_form_and_zero(self):
        r = 1.2
        cyl = Cylinder(r)
        g = 0.9
        for a in (0.2, 0.8, math.pi * r / 2, 1.6):
            g3 = completing_vorticity(CylPoint(-a, 0), CylPoint(a, 0), g, g, CylPoint(0, 0), cyl)
            assert g3 == pytest.approx(horizontal_completion(g, a, r), abs=1e-12)
        assert completing_vorticity(
            CylPoint(-math.pi * r / 2, 0), CylPoint(math.pi * r / 2, 0), g, g, CylPoint(0, 0), cyl
        ) == pytest.approx(0.0, abs=1e-12)

    def test_limits(self):
        g = 1.0
        assert vertical_completion(g, 1.0, 1e3) == pytest.approx(-g / 2, abs=1e-5)
        assert horizontal_completion(g, 1.0, 1e3) == pytest.approx(-g / 2, abs=1e-5)
        assert vertical_completion(g, 20.0, 1.0) == pytest.approx(-g, abs=1e-8)

    def test_complete3_is_equilibrium(self):
        for z1, z2, g1, g2 in [
            (CylPoint(0, 0.8), CylPoint(0, -0.4), 1.0, 2.0),
            (CylPoint(0.2, 0), CylPoint(1.5, 0), 1.5, 0.5),
        ]:
            for which in (0, 1):
                cfg = complete3(z1, z2, g1, g2, UNIT, which)
                assert is_equilibrium(cfg, 1e-9)[0]

    def test_general_position_has_no_real_completion(self):
        z1, z2 = CylPoint(0.0, 0.5), CylPoint(1.0, -0.3)
        z3 = stagnation_points(z1, z2, 1.0, 1.0, UNIT)[0]
        with pytest.raises(ValueError, match="no real vorticity"):
            completing_vorticity(z1, z2, 1.0, 1.0, z3, UNIT)
