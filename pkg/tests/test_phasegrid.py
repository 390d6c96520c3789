import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from cmmnufi.phasegrid import (CUSTOM, InitialCondition, PhaseGrid, eval_f0, landau, quad_v, quad_xv,
                               two_stream)

SQ = math.sqrt(2 * math.pi)


def test_nodes_follow_periodic_convention():
    g = PhaseGrid(4 * np.pi, 12.0, 16, 8)
    assert g.x[0] == 0.0 and g.v[0] == -6.0
    np.testing.assert_allclose(g.x, np.arange(16) * g.dx, rtol=0, atol=0)
    np.testing.assert_allclose(g.v, np.arange(8) * g.dv - 6.0, rtol=0, atol=0)
    assert abs(g.dx * g.Nx - g.Lx) < 1e-14 and abs(g.dv * g.Nv - g.Lv) < 1e-14
    X, V = g.mesh
    assert X.shape == (16, 8) and not X.flags.writeable


def test_nodes_idempotent():
    a, b = PhaseGrid(3.3, 7.1, 33, 17), PhaseGrid(3.3, 7.1, 33, 17)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v)


@pytest.mark.parametrize("nx,nv", [(3, 8), (8, 2)])
def test_too_small_grid_rejected(nx, nv):
    with pytest.raises(ValueError):
        PhaseGrid(1.0, 1.0, nx, nv)


def test_f0_examples():
    assert eval_f0(landau(), 0.0, 0.0) == pytest.approx(1.01 / SQ, abs=1e-12)
    assert eval_f0(landau(), np.pi / 0.5, 0.0) == pytest.approx(0.99 / SQ, abs=1e-12)
    val = eval_f0(two_stream(), 0.0, 3.0)
    assert val == pytest.approx(1.05 * (1 + math.exp(-18)) / (2 * SQ), abs=1e-12)
    # commonly quoted rounded values carry a ~2e-5 error in sqrt(2 pi)
    for got, quoted in ((1.01 / SQ, 0.402911), (0.99 / SQ, 0.394932), (val, 0.209454)):
        assert abs(got - quoted) < 5e-5


def test_ic_validation():
    with pytest.raises(ValueError):
        InitialCondition("landau", 0.01, 0.5, v0=1.0)
    with pytest.raises(ValueError):
        InitialCondition("plasma", 0.01, 0.5)
    with pytest.raises(ValueError):
        InitialCondition(CUSTOM, 1.5, 0.5)
    with pytest.raises(ValueError):
        InitialCondition(CUSTOM, 0.1, 0.0)
    assert landau().Lx == pytest.approx(4 * np.pi)
    assert two_stream().Lx == pytest.approx(10 * np.pi)


@given(x=st.floats(-50, 50), v=st.floats(-30, 30), eps=st.floats(-1, 1), v0=st.floats(0, 5))
def test_f0_nonnegative_and_bounded(x, v, eps, v0):
    ic = InitialCondition(CUSTOM, eps, 0.3, v0)
    val = eval_f0(ic, x, v)
    assert 0.0 <= val <= ic.f0_max()


@pytest.mark.parametrize("ic", [landau(), two_stream(), InitialCondition(CUSTOM, 0.2, 0.4, 0.7)])
def test_f0_max_is_attained_bound(ic):
    v = np.linspace(-8, 8, 200001)
    peak = eval_f0(ic, 0.0, v).max()
    assert peak <= ic.f0_max() <= peak * (1 + 1e-9)


def test_quad_v_examples():
    g = PhaseGrid(1.0, 12.0, 4, 256)
    assert quad_v(np.full(256, 2.5), g) == pytest.approx(2.5 * 12.0, rel=1e-14)
    maxw = np.exp(-0.5 * g.v**2) / SQ
    # the remaining difference is the rectangle-rule endpoint term dv f(-6) / 2
    assert abs(quad_v(maxw, g) - (1.0 - oracles.maxwell_tail(6.0))) < 0.5 * g.dv * maxw[0] * 1.01
    assert abs(quad_v(maxw, g) - 1.0) < 1e-8
    # nodes -Lv/2 .. Lv/2 - dv: every node but -Lv/2 has a mirror partner
    assert abs(quad_v(g.v * maxw, g) - g.dv * g.v[0] * maxw[0]) < 1e-12
    g16 = PhaseGrid(1.0, 16.0, 4, 256)
    assert abs(quad_v(g16.v * np.exp(-0.5 * g16.v**2) / SQ, g16)) < 1e-12
    with pytest.raises(ValueError):
        quad_v(np.ones(10), g)


def test_quad_xv_examples():
    g = PhaseGrid(4 * np.pi, 12.0, 256, 256)
    assert abs(quad_xv(eval_f0(landau(), *g.mesh), g) - 4 * np.pi) < 1e-7
    assert quad_xv(np.ones(g.shape), g) == pytest.approx(g.Lx * g.Lv, rel=1e-14)
    # the two-beam tail beyond |v| = 8 holds ~9e-6 of the mass; compare against the exact truncated integral
    g2 = PhaseGrid(10 * np.pi, 16.0, 256, 256)
    m = quad_xv(eval_f0(two_stream(), *g2.mesh), g2)
    assert abs(m - oracles.two_stream_mass(g2.Lx, -8.0, 8.0)) < 1e-7
    assert abs(m - 10 * np.pi) < 1e-5
    g3 = PhaseGrid(10 * np.pi, 20.0, 256, 256)
    assert abs(quad_xv(eval_f0(two_stream(), *g3.mesh), g3) - 10 * np.pi) < 1e-6


@given(seed=st.integers(0, 2**31 - 1))
def test_quad_separable(seed):
    rng = np.random.default_rng(seed)
    g = PhaseGrid(rng.uniform(1, 10), rng.uniform(1, 10), 16, 12)
    a, b = rng.normal(size=16), rng.normal(size=12)
    lhs = quad_xv(np.outer(a, b), g)
    rhs = g.dx * a.sum() * quad_v(b, g)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("ic,lv", [(landau(), 16.0), (two_stream(), 20.0)])
def test_mass_normalisation(ic, lv):
    g = PhaseGrid(ic.Lx, lv, 128, 256)
    assert quad_xv(eval_f0(ic, *g.mesh), g) == pytest.approx(ic.Lx, abs=1e-7)
