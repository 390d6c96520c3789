import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmmnufi import interp
from cmmnufi.interp import CUBIC_SPLINE, LAGRANGE3, LINEAR, Scheme
from cmmnufi.phasegrid import PhaseGrid

SCHEMES = [LINEAR, LAGRANGE3, Scheme.parse("lagrange4"), Scheme.parse("lagrange5"), CUBIC_SPLINE]
L = 2 * np.pi


def test_scheme_parsing():
    assert Scheme.parse("cubic_spline") == CUBIC_SPLINE
    assert Scheme.parse("linear") == LINEAR
    assert Scheme.parse("lagrange3") == LAGRANGE3
    for bad in ("cubic", "lagrange0", "lagrange99", "spline5"):
        with pytest.raises(ValueError):
            Scheme.parse(bad)


@pytest.mark.parametrize("scheme", SCHEMES, ids=str)
def test_constant_reproduced(scheme):
    itp = interp.build_1d(np.full(16, 3.25), L, scheme)
    x = np.linspace(-7, 20, 301)
    np.testing.assert_allclose(interp.eval_1d(itp, x), 3.25, rtol=0, atol=1e-13)


def test_cos_midpoint_errors():
    n = 64
    x = np.arange(n) * L / n
    mid = x + 0.5 * L / n
    lag = interp.eval_1d(interp.build_1d(np.cos(x), L, LAGRANGE3), mid)
    spl = interp.eval_1d(interp.build_1d(np.cos(x), L, CUBIC_SPLINE), mid)
    assert np.abs(lag - np.cos(mid)).max() <= 1e-5
    assert np.abs(spl - np.cos(mid)).max() <= 2e-6


@pytest.mark.parametrize("scheme", SCHEMES, ids=str)
def test_nodal_exactness_and_periodicity(scheme):
    rng = np.random.default_rng(1)
    vals = rng.normal(size=40)
    itp = interp.build_1d(vals, L, scheme)
    x = np.arange(40) * L / 40
    np.testing.assert_allclose(interp.eval_1d(itp, x), vals, rtol=1e-12, atol=1e-12)
    q = rng.uniform(-10, 10, 1000)
    np.testing.assert_allclose(interp.eval_1d(itp, q + L), interp.eval_1d(itp, q), rtol=0, atol=1e-12)


def test_cubic_lagrange_reproduces_cubic_on_stencil():
    n, h = 32, L / 32
    x = np.arange(n) * h
    p = lambda s: s * (s - h) * (s - 2 * h)
    # the stencil for queries in [h, 2h) is nodes 0..3; only those need to match p
    vals = np.zeros(n)
    vals[:4] = p(x[:4])
    itp = interp.build_1d(vals, L, LAGRANGE3)
    q = np.linspace(h, 2 * h, 50, endpoint=False)
    np.testing.assert_allclose(interp.eval_1d(itp, q), p(q), rtol=0, atol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6, 7])
def test_lagrange_polynomial_reproduction(m):
    sch = Scheme("lagrange", m)
    n, h = 64, 1.0
    x = np.arange(n) * h
    coef = np.random.default_rng(m).normal(size=m + 1)
    poly = np.polynomial.Polynomial(coef)
    vals = poly(x)
    itp = interp.build_1d(vals, n * h, sch)
    # away from the periodic seam every stencil sees the polynomial
    q = np.random.default_rng(0).uniform(10, 50, 200)
    np.testing.assert_allclose(interp.eval_1d(itp, q), poly(q), rtol=1e-10, atol=1e-8)


@pytest.mark.parametrize("scheme", [LAGRANGE3, CUBIC_SPLINE, Scheme.parse("lagrange5")], ids=str)
def test_convergence_order(scheme):
    f = lambda s: np.exp(np.sin(s))
    q = np.random.default_rng(3).uniform(0, L, 2000)
    errs = []
    ns = [32, 64, 128, 256]
    for n in ns:
        x = np.arange(n) * L / n
        errs.append(np.abs(interp.eval_1d(interp.build_1d(f(x), L, scheme), q) - f(q)).max())
    order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert order >= 3.5


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 1000))
def test_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    u, w = rng.normal(size=24), rng.normal(size=24)
    q = rng.uniform(-3, 10, 50)
    for scheme in (LAGRANGE3, CUBIC_SPLINE):
        lhs = interp.eval_1d(interp.build_1d(a * u + b * w, L, scheme), q)
        rhs = a * interp.eval_1d(interp.build_1d(u, L, scheme), q) + b * interp.eval_1d(interp.build_1d(w, L, scheme), q)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


def test_spline_coefficients_solve_cyclic_system():
    y = np.random.default_rng(5).normal(size=37)
    c = interp.spline_coefficients(y)
    np.testing.assert_allclose((np.roll(c, 1) + 4 * c + np.roll(c, -1)) / 6, y, atol=1e-13)


def test_spline_is_c2():
    n = 16
    y = np.random.default_rng(2).normal(size=n)
    itp = interp.build_1d(y, float(n), CUBIC_SPLINE)
    h = 1e-4
    for node in (3.0, 7.0, 15.0):
        # one-sided second differences from both sides of a knot agree for a C2 spline
        left = (interp.eval_1d(itp, node) - 2 * interp.eval_1d(itp, node - h) + interp.eval_1d(itp, node - 2 * h)) / h**2
        right = (interp.eval_1d(itp, node + 2 * h) - 2 * interp.eval_1d(itp, node + h) + interp.eval_1d(itp, node)) / h**2
        assert abs(left - right) < 1e-2


def test_build_rejects_bad_input():
    with pytest.raises(ValueError):
        interp.build_1d(np.array([1.0, np.nan, 2.0, 3.0, 4.0]), L)
    with pytest.raises(ValueError):
        interp.build_1d(np.ones(4), L, Scheme("lagrange", 5))
    with pytest.raises(ValueError):
        interp.build_1d(np.ones((4, 4)), L)


GRID = PhaseGrid(2 * np.pi, 2 * np.pi, 64, 64)


@pytest.mark.parametrize("scheme", [LINEAR, LAGRANGE3, CUBIC_SPLINE], ids=str)
def test_2d_nodes_and_separable(scheme):
    X, V = GRID.mesh
    g = np.cos(GRID.x) + 0.3 * np.sin(2 * GRID.x)
    h = np.exp(np.cos(GRID.v))
    itp = interp.build_2d(np.outer(g, h), GRID, scheme)
    np.testing.assert_allclose(interp.eval_2d(itp, X, V), np.outer(g, h), rtol=1e-12, atol=1e-12)
    rng = np.random.default_rng(0)
    xq, vq = rng.uniform(-10, 10, 500), rng.uniform(-10, 10, 500)
    i1 = interp.build_1d(g, GRID.Lx, scheme)
    i2 = interp.build_1d(h, GRID.Lv, scheme, origin=GRID.v_min)
    np.testing.assert_allclose(interp.eval_2d(itp, xq, vq), interp.eval_1d(i1, xq) * interp.eval_1d(i2, vq),
                               rtol=1e-12, atol=1e-12)


def test_2d_smooth_accuracy():
    X, V = GRID.mesh
    rng = np.random.default_rng(4)
    xq, vq = rng.uniform(0, 2 * np.pi, 2000), rng.uniform(-np.pi, np.pi, 2000)
    for scheme in (LAGRANGE3, CUBIC_SPLINE):
        itp = interp.build_2d(np.sin(X) * np.cos(V), GRID, scheme)
        assert np.abs(interp.eval_2d(itp, xq, vq) - np.sin(xq) * np.cos(vq)).max() <= 1e-4


def test_displacement_eval():
    X, V = GRID.mesh
    z = np.zeros(GRID.shape)
    rng = np.random.default_rng(7)
    xq, vq = rng.uniform(-20, 20, 300), rng.uniform(-20, 20, 300)
    a, b = interp.eval_displacement_2d(z, z, GRID, xq, vq)
    assert not a.any() and not b.any()
    dx = np.sin(2 * np.pi * V / GRID.Lv)
    a, b = interp.eval_displacement_2d(dx, z, GRID, xq, vq)
    assert np.abs(a - np.sin(2 * np.pi * vq / GRID.Lv)).max() < 1e-5
    perm = rng.permutation(300)
    a2, _ = interp.eval_displacement_2d(dx, z, GRID, xq[perm], vq[perm])
    assert np.array_equal(a2, a[perm])


def test_displacement_convergence():
    errs, ns = [], [32, 64, 128, 256]
    rng = np.random.default_rng(8)
    for n in ns:
        g = PhaseGrid(2 * np.pi, 2.0, n, n)
        X, V = g.mesh
        xq, vq = rng.uniform(0, 2 * np.pi, 1000), rng.uniform(-1, 1, 1000)
        a, _ = interp.eval_displacement_2d(np.sin(np.pi * V) * np.cos(X), np.zeros(g.shape), g, xq, vq)
        errs.append(np.abs(a - np.sin(np.pi * vq) * np.cos(xq)).max())
    assert -np.polyfit(np.log(ns), np.log(errs), 1)[0] >= 3.5
