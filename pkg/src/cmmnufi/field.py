"""Charge density, periodic spectral Poisson solve and the electric-field history."""
from __future__ import annotations

import numpy as np

from . import interp
from .phasegrid import PhaseGrid, quad_v


def charge_density(f_samples, grid: PhaseGrid) -> np.ndarray:
    """rho = 1 - int f dv on the x nodes, neutralised (zero spatial mean)."""
    f_samples = np.asarray(f_samples, dtype=float)
    if not np.all(np.isfinite(f_samples)):
        raise ValueError("distribution samples contain non-finite values")
    rho = 1.0 - quad_v(f_samples, grid)
    return rho - rho.mean()


def wavenumbers(n: int, L: float) -> np.ndarray:
    return 2 * np.pi * np.fft.rfftfreq(n, d=L / n)


def poisson_solve(rho, Lx: float) -> np.ndarray:
    """Solve -phi'' = rho and return E = -phi' on the nodes.

    The k=0 mode is dropped, so a non-neutral ``rho`` is implicitly neutralised.
    """
    rho = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(rho)):
        raise ValueError("charge density contains non-finite values")
    kappa = wavenumbers(rho.size, Lx)
    rho_hat = np.fft.rfft(rho)
    E_hat = np.zeros_like(rho_hat)
    # phi_hat = rho_hat / kappa^2 and E_hat = -i kappa phi_hat
    E_hat[1:] = -1j * rho_hat[1:] / kappa[1:]
    return np.fft.irfft(E_hat, n=rho.size)


def spectral_derivative(u, L: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    kappa = wavenumbers(u.size, L)
    return np.fft.irfft(1j * kappa * np.fft.rfft(u), n=u.size)


class FieldHistory:
    """Append-only sequence of E arrays indexed ``start, start+1, ...``.

    Index ``n`` is the field ``n`` steps into the current segment.  Before the
    first remap ``start`` is 0 (E^0 is the initial field); after a remap the
    segment is re-seeded at index 1 with the field at the remap instant.
    Spline (or Lagrange) coefficients are computed once per entry and kept in a
    padded 2D slab the tracing kernel reads directly.
    """

    def __init__(self, tau: float, Lx: float, nx: int, scheme: interp.Scheme = interp.CUBIC_SPLINE,
                 start: int = 0, capacity: int = 32):
        self.tau = float(tau)
        self.Lx = float(Lx)
        self.nx = int(nx)
        self.scheme = scheme
        self.start = int(start)
        self._count = 0
        self._values = np.empty((capacity, nx))
        self._cpad = np.empty((capacity, nx + 2 * scheme.pad))

    def __len__(self):
        return self._count

    @property
    def stop(self) -> int:
        """One past the last stored index."""
        return self.start + self._count

    def append(self, E) -> None:
        E = np.asarray(E, dtype=float)
        if E.shape != (self.nx,):
            raise ValueError(f"field must have shape ({self.nx},), got {E.shape}")
        if not np.all(np.isfinite(E)):
            raise ValueError("field contains non-finite values")
        if abs(E.mean()) > 1e-12 * max(1.0, float(np.abs(E).max())):
            raise ValueError("field must have zero spatial mean")
        if self._count == self._values.shape[0]:
            cap = 2 * self._values.shape[0]
            self._values = np.concatenate([self._values, np.empty_like(self._values)])[:cap]
            self._cpad = np.concatenate([self._cpad, np.empty_like(self._cpad)])[:cap]
        self._values[self._count] = E
        self._cpad[self._count] = interp.padded(interp.coefficients(E, self.scheme), self.scheme)
        self._count += 1

    def field(self, n: int) -> np.ndarray:
        self._check(n)
        out = self._values[n - self.start].copy()
        out.flags.writeable = False
        return out

    @property
    def fields(self) -> np.ndarray:
        """All stored fields as an (len, nx) read-only array."""
        out = self._values[: self._count].copy()
        out.flags.writeable = False
        return out

    @property
    def padded_coefs(self) -> np.ndarray:
        return self._cpad[: self._count]

    def _check(self, n: int):
        if not self.start <= n < self.stop:
            raise IndexError(f"field index {n} outside stored range [{self.start}, {self.stop})")

    def interpolant(self, n: int) -> interp.Interpolant1D:
        self._check(n)
        k = n - self.start
        return interp.Interpolant1D(self.Lx, self.nx, self.scheme, self._values[k], 0.0, self._cpad[k])

    def eval(self, n: int, x):
        return interp.eval_1d(self.interpolant(n), x)

    @classmethod
    def seeded(cls, E, tau, Lx, scheme=interp.CUBIC_SPLINE, start=0) -> "FieldHistory":
        E = np.asarray(E, dtype=float)
        h = cls(tau, Lx, E.size, scheme, start)
        h.append(E)
        return h


def history_append(h: FieldHistory, E) -> FieldHistory:
    h.append(E)
    return h


def history_eval(h: FieldHistory, n: int, x):
    return h.eval(n, x)
