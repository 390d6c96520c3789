import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmmnufi import interp
from cmmnufi.field import FieldHistory, charge_density, history_append, history_eval, poisson_solve, spectral_derivative
from cmmnufi.phasegrid import PhaseGrid, eval_f0, landau

from oracles import landau_epot

LX = 4 * np.pi
K = 0.5


def test_uniform_maxwellian_is_neutral():
    g = PhaseGrid(LX, 12.0, 64, 256)
    X, V = g.mesh
    rho = charge_density(np.exp(-V**2 / 2) / math.sqrt(2 * math.pi) + 0 * X, g)
    assert np.abs(rho).max() <= 1e-9


def test_landau_density_and_field():
    g = PhaseGrid(LX, 16.0, 128, 256)
    ic = landau(0.01, K)
    rho = charge_density(eval_f0(ic, *g.mesh), g)
    np.testing.assert_allclose(rho, -0.01 * np.cos(K * g.x), rtol=0, atol=1e-9)
    E = poisson_solve(rho, g.Lx)
    np.testing.assert_allclose(E, -(0.01 / K) * np.sin(K * g.x), rtol=0, atol=1e-9)
    epot = 0.5 * np.sum(E**2) * g.dx
    assert abs(epot - landau_epot(0.01, K)) <= 1e-8
    assert abs(epot - 4 * np.pi * 1e-4) <= 1e-8


def test_zero_density():
    g = PhaseGrid(LX, 12.0, 32, 32)
    rho = charge_density(np.zeros(g.shape), g)
    assert np.abs(rho).max() == 0.0
    assert np.abs(poisson_solve(rho, LX)).max() == 0.0


def test_poisson_cosine():
    x = np.arange(256) * LX / 256
    np.testing.assert_allclose(poisson_solve(np.cos(K * x), LX), np.sin(K * x) / K, rtol=0, atol=1e-12)


def test_non_finite_rejected():
    g = PhaseGrid(LX, 12.0, 16, 16)
    f = np.ones(g.shape)
    f[3, 4] = np.nan
    with pytest.raises(ValueError):
        charge_density(f, g)
    with pytest.raises(ValueError):
        poisson_solve(np.array([0.0, np.inf, 0.0, 0.0]), LX)


@given(seed=st.integers(0, 10_000), n=st.sampled_from([16, 32, 64, 128]))
def test_spectral_derivative_recovers_rho(seed, n):
    rng = np.random.default_rng(seed)
    rho = rng.normal(size=n)
    rho -= rho.mean()
    E = poisson_solve(rho, LX)
    assert abs(E.mean()) <= 1e-12
    # dE/dx = -phi'' = rho, up to the Nyquist mode which the derivative drops on even n
    rho_hat = np.fft.rfft(rho)
    rho_hat[-1] = 0
    np.testing.assert_allclose(spectral_derivative(E, LX), np.fft.irfft(rho_hat, n), atol=1e-10)


@given(a=st.floats(-10, 10), b=st.floats(-10, 10), seed=st.integers(0, 10_000))
def test_poisson_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    r1, r2 = rng.normal(size=(2, 64))
    lhs = poisson_solve(a * r1 + b * r2, LX)
    rhs = a * poisson_solve(r1, LX) + b * poisson_solve(r2, LX)
    np.testing.assert_allclose(lhs, rhs, atol=1e-11)


def test_fft_round_trip():
    u = np.random.default_rng(0).normal(size=100)
    assert np.abs(np.fft.irfft(np.fft.rfft(u), n=100) - u).max() <= 1e-13


def make_history(n=3, nx=256, start=0):
    x = np.arange(nx) * LX / nx
    h = FieldHistory(0.1, LX, nx, interp.CUBIC_SPLINE, start=start, capacity=2)
    for j in range(n):
        history_append(h, np.sin(K * x) / K * (1 + j))
    return h, x


def test_history_nodes_periodicity_and_midpoints():
    h, x = make_history()
    assert len(h) == 3 and h.stop == 3
    for n in range(3):
        np.testing.assert_allclose(history_eval(h, n, x), h.field(n), atol=1e-12)
        np.testing.assert_allclose(history_eval(h, n, x + LX), history_eval(h, n, x), atol=1e-12)
    mid = x + 0.5 * LX / 256
    np.testing.assert_allclose(history_eval(h, 0, mid), np.sin(K * mid) / K, atol=1e-6)


def test_history_out_of_range_and_offset():
    h, x = make_history(2, 32, start=1)
    assert h.start == 1 and h.stop == 3
    for bad in (0, 3, -1):
        with pytest.raises(IndexError):
            history_eval(h, bad, x)
    np.testing.assert_array_equal(h.field(2), 2 * np.sin(K * x) / K)


def test_history_entries_immutable_and_validated():
    h, x = make_history(1, 32)
    e = h.field(0)
    with pytest.raises(ValueError):
        e[0] = 1.0
    before = h.field(0).copy()
    src = np.cos(K * x)
    h.append(src)
    src[:] = 99
    np.testing.assert_array_equal(h.field(0), before)
    np.testing.assert_array_equal(h.field(1), np.cos(K * x))
    with pytest.raises(ValueError):
        h.append(np.ones(32))
    with pytest.raises(ValueError):
        h.append(np.zeros(31))
    with pytest.raises(ValueError):
        h.append(np.full(32, np.nan))


def test_history_growth_keeps_entries():
    h, x = make_history(40, 64)
    for j in (0, 17, 39):
        np.testing.assert_array_equal(h.field(j), np.sin(K * x) / K * (1 + j))


def test_seeded_history():
    x = np.arange(32) * LX / 32
    h = FieldHistory.seeded(np.sin(K * x), 0.2, LX, start=1)
    assert (h.start, h.stop, h.tau) == (1, 2, 0.2)
