"""Independent reference values, computed without touching the solver code."""
import math

import numpy as np
from scipy.optimize import fsolve
from scipy.special import erfc, wofz


def plasma_z(zeta):
    return 1j * math.sqrt(math.pi) * wofz(zeta)


def landau_root(k=0.5, guess=(1.4, -0.15)):
    """Least-damped root of 1 + (1 + zeta Z(zeta)) / k^2 = 0, zeta = omega / (sqrt 2 k)."""

    def eps(w):
        om = complex(w[0], w[1])
        zeta = om / (math.sqrt(2) * k)
        d = 1 + (1 + zeta * plasma_z(zeta)) / k**2
        return [d.real, d.imag]

    wr, wi = fsolve(eps, guess, xtol=1e-14)
    return wr, -wi


def maxwell_tail(a):
    """Mass of the unit Maxwellian outside [-a, a]."""
    return erfc(a / math.sqrt(2))


def two_stream_mass(Lx, v_lo, v_hi, v0=3.0):
    """Exact integral over [0, Lx) x [v_lo, v_hi) of the two-beam f0 (eps drops out)."""
    def cdf(v):
        return 0.5 * (1 + math.erf(v / math.sqrt(2)))
    inside = 0.5 * (cdf(v_hi - v0) - cdf(v_lo - v0) + cdf(v_hi + v0) - cdf(v_lo + v0))
    return Lx * inside


def landau_epot(eps, k):
    """0.5 int E^2 dx for E = -(eps/k) sin(kx) over one wavelength."""
    Lx = 2 * math.pi / k
    return eps**2 * Lx / (4 * k**2)


def shear_map(x, v, n, Lv):
    """n-fold composition of the area-preserving shear (x + sin(2 pi v / Lv), v)."""
    return x + n * np.sin(2 * np.pi * v / Lv), v


def free_stream(f0, x, v, t):
    return f0(x - v * t, v)
