"""Free group ``U(t) = exp(-t(d_x^3 + d_y^3))`` and the Duhamel integral.

On the Fourier side ``U(t)`` multiplies the coefficient at ``(xi, eta)`` by
``exp(i t (xi**3 + eta**3))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spacetime import cumulative_integral
from .spectral import Field2, Grid2, SpecField2, fft_forward, fft_inverse

__all__ = [
    "Propagator",
    "phase_factor",
    "phase_factors",
    "free_evolve",
    "free_solution",
    "duhamel",
    "duhamel_spectral",
]

_TWO_PI = 2 * np.pi
_TWO_PI_LD = np.longdouble(2) * np.arccos(np.longdouble(-1))


def _reduced_phase(t, omega):
    # reduce t*omega mod 2*pi before exponentiating; |omega| reaches ~1e5
    theta = np.longdouble(t) * omega.astype(np.longdouble)
    theta = np.fmod(theta, _TWO_PI_LD)
    return theta.astype(float)


def phase_factor(grid, t):
    """Unit-modulus multiplier ``exp(i t omega)`` on ``grid``."""
    return np.exp(1j * _reduced_phase(t, grid.dispersion))


def phase_factors(grid, times):
    """Stack of :func:`phase_factor` for each entry of ``times``."""
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size,) + grid.shape, dtype=complex)
    omega = grid.dispersion.astype(np.longdouble)
    step = max(1, 2**20 // omega.size)
    for j in range(0, times.size, step):
        t = times[j : j + step].astype(np.longdouble)[:, None, None]
        theta = np.fmod(t * omega[None], _TWO_PI_LD).astype(float)
        out[j : j + step] = np.exp(1j * theta)
    return out


@dataclass(frozen=True)
class Propagator:
    grid: Grid2

    @property
    def omega(self):
        return self.grid.dispersion

    def multiplier(self, t):
        return phase_factor(self.grid, t)

    def __call__(self, F, t):
        return free_evolve(F, t)


def free_evolve(F, t):
    return SpecField2(F.grid, F.coeffs * phase_factor(F.grid, t))


def free_solution(phi, times, phases=None):
    """Real slices of ``U(t) phi`` at the given times, shape ``(nt, nx, ny)``.

    ``phases`` may carry a precomputed ``phase_factors(grid, times)``.
    """
    F = fft_forward(phi) if isinstance(phi, Field2) else phi
    g = F.grid
    if phases is None:
        phases = phase_factors(g, times)
    coeffs = F.coeffs[None] * phases
    return np.fft.ifft2(coeffs, axes=(1, 2)).real * (g.nx * g.ny / g.area)


def duhamel_spectral(grid, forcing_hat, times, origin=0):
    """``int_{t_origin}^{t_j} U(t_j - s) f(s) ds`` for every sample ``j``.

    ``forcing_hat`` holds coefficient slices ``(nt, nx, ny)`` at the uniform
    ``times``.  The integrand is pulled back by ``U(-s)``, integrated with
    :func:`cumulative_integral` and pushed forward by ``U(t_j)``.  Returns the
    coefficient stack and the per-sample quadrature rules.
    """
    times = np.asarray(times, dtype=float)
    nt = times.size
    if forcing_hat.shape != (nt,) + grid.shape:
        raise ValueError(f"forcing shape {forcing_hat.shape} does not match {(nt,) + grid.shape}")
    dt = (times[-1] - times[0]) / (nt - 1)
    phases = phase_factors(grid, times)
    integ, rules = cumulative_integral(forcing_hat * np.conj(phases), dt, origin=origin)
    return integ * phases, rules


def duhamel(forcing, t, origin=0.0):
    """``int_origin^t U(t - s) f(s) ds`` for a sampled forcing ``f``.

    Both ``t`` and ``origin`` must be sample instants of ``forcing``.  The
    quadrature rule is stored in ``result.meta["quadrature"]``.
    """
    j = forcing.index_of(t)
    j0 = forcing.index_of(origin)
    g = forcing.grid
    lo, hi = min(j, j0), max(j, j0)
    sub = forcing.values[lo : hi + 1]
    times = forcing.times[lo : hi + 1]
    fhat = np.fft.fft2(sub, axes=(1, 2)) * (g.area / (g.nx * g.ny))
    if hi == lo:
        return Field2(g, np.zeros(g.shape), meta={"quadrature": "none"})
    integ, rules = duhamel_spectral(g, fhat, times, origin=j0 - lo)
    k = j - lo
    out = fft_inverse(SpecField2(g, integ[k]))
    out.meta["quadrature"] = rules[k]
    return out
