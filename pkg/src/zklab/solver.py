"""Nonlinear solvers for the symmetrised equation

    v_t + (d_x^3 + d_y^3) v = 4^(-1/3) (d_x + d_y)(v^2)

on the periodic box: Picard iteration on the Duhamel formulation and an
integrating-factor RK4 reference integrator.  Both work on Fourier
coefficients and return real trajectories.

Conserved along smooth solutions (the nonlinearity is a derivative and the
linear part is skew):

* the mean and the L^2 norm,
* ``E(v) = int (v_x^2 - v_x v_y + v_y^2)/2 + 4^(-1/3) v^3 / 3 dx dy``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .propagator import duhamel_spectral, phase_factor, phase_factors
from .spacetime import SpaceTimeField
from .spectral import Field2, Grid2, dealias_mask, derivative_symbol, fft_forward
from .symmetrizer import NONLIN_COEFF

__all__ = [
    "SolveConfig",
    "SolveResult",
    "SolverError",
    "nonlinearity",
    "picard_solve",
    "reference_solve",
    "energy",
    "l2_norm",
]

log = logging.getLogger(__name__)


class SolverError(FloatingPointError):
    """A solve produced non-finite values."""


@dataclass(frozen=True)
class SolveConfig:
    grid: Grid2
    T: float = 0.5
    nt: int = 64
    max_picard_iters: int = 50
    picard_tol: float = 1e-12
    nonlinearity_on: bool = True

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("time horizon T must be positive")
        if self.T > 4:
            raise ValueError("time horizon T must be at most 4")
        if int(self.nt) != self.nt or self.nt < 2 or self.nt % 2:
            raise ValueError(f"nt (number of time steps) must be a positive even integer, got {self.nt}")
        if self.max_picard_iters < 1 or not self.picard_tol > 0:
            raise ValueError("max_picard_iters and picard_tol must be positive")

    @property
    def times(self):
        return np.linspace(0.0, self.T, self.nt + 1)

    @property
    def dt(self):
        return self.T / self.nt


@dataclass
class SolveResult:
    trajectory: SpaceTimeField
    picard_residuals: list = field(default_factory=list)
    l2_drift: float = 0.0
    energy_drift: float = 0.0
    converged: bool = True
    divergent: bool = False
    method: str = "picard"

    @property
    def final(self):
        return self.trajectory.slice(-1)


class _Ops:
    """Precomputed multipliers for one grid."""

    def __init__(self, grid):
        self.grid = grid
        self.mask = dealias_mask(grid)
        self.ddiag = derivative_symbol(grid, "x", 1) + derivative_symbol(grid, "y", 1)
        self.to_coef = grid.area / (grid.nx * grid.ny)

    def nonlinear_hat(self, vhat):
        """``4^(-1/3) (d_x + d_y) P(v^2)`` on coefficient arrays ``(..., nx, ny)``."""
        v = np.fft.ifft2(vhat * self.mask, axes=(-2, -1)).real / self.to_coef
        sq = np.fft.fft2(v * v, axes=(-2, -1)) * self.to_coef
        return NONLIN_COEFF * self.ddiag * sq * self.mask

    def to_values(self, vhat):
        return np.fft.ifft2(vhat, axes=(-2, -1)).real / self.to_coef


def nonlinearity(v):
    """``4^(-1/3) (d_x + d_y)`` of the dealiased square of ``v``."""
    ops = _Ops(v.grid)
    return Field2(v.grid, ops.to_values(ops.nonlinear_hat(fft_forward(v).coeffs)))


def _check_finite(arr, where):
    if not np.all(np.isfinite(arr)):
        raise SolverError(f"non-finite values encountered in {where}; reduce data size or T")


def _sup_l2(diff_hat, area):
    return float(np.sqrt(np.max(np.sum(np.abs(diff_hat) ** 2, axis=(-2, -1)) / area)))


def picard_solve(phi, cfg):
    """Iterate ``u <- U(t) phi + I(u)`` on the sampled window ``[0, T]``.

    ``I(u)(t) = 4^(-1/3) int_0^t U(t - s)(d_x + d_y) u(s)^2 ds`` is evaluated by
    :func:`zklab.propagator.duhamel_spectral` at every sample.  Iteration stops
    when the sup-in-time L^2 change drops below ``cfg.picard_tol``; otherwise
    the result is flagged divergent.
    """
    g = cfg.grid
    ops = _Ops(g)
    times = cfg.times
    phi_hat = fft_forward(phi).coeffs
    free = phi_hat[None] * phase_factors(g, times)
    u = free
    residuals = []
    converged = False
    for it in range(cfg.max_picard_iters):
        if cfg.nonlinearity_on:
            forcing = ops.nonlinear_hat(u)
            duh, _ = duhamel_spectral(g, forcing, times)
            new = free + duh
        else:
            new = free
        _check_finite(new, f"Picard iterate {it + 1}")
        res = _sup_l2(new - u, g.area)
        residuals.append(res)
        u = new
        log.debug("picard iter %d residual %.3e", it + 1, res)
        if res < cfg.picard_tol:
            converged = True
            break
    result = _finish(u, phi_hat, cfg, ops, method="picard")
    result.picard_residuals = residuals
    result.converged = converged
    result.divergent = not converged
    if not converged:
        log.warning("Picard iteration did not converge in %d iterations", cfg.max_picard_iters)
    return result


def reference_solve(phi, cfg):
    """Integrating-factor RK4 for ``w = U(-t) v`` on the same time partition."""
    g = cfg.grid
    ops = _Ops(g)
    dt = cfg.dt
    times = cfg.times
    phi_hat = fft_forward(phi).coeffs
    out = np.empty((cfg.nt + 1,) + g.shape, dtype=complex)
    out[0] = phi_hat
    if not cfg.nonlinearity_on:
        out[1:] = phi_hat[None] * phase_factors(g, times[1:])
        return _finish(out, phi_hat, cfg, ops, method="if-rk4")

    half = phase_factor(g, dt / 2)
    full = phase_factor(g, dt)
    v = phi_hat.copy()
    # stages in the interaction picture, expressed through v = U(t) w
    for n in range(cfg.nt):
        k1 = ops.nonlinear_hat(v)
        a = half * (v + 0.5 * dt * k1)
        k2 = ops.nonlinear_hat(a)
        b = half * v + 0.5 * dt * k2
        k3 = ops.nonlinear_hat(b)
        c = full * v + dt * half * k3
        k4 = ops.nonlinear_hat(c)
        v = full * (v + dt / 6 * k1) + half * (dt / 3 * (k2 + k3)) + dt / 6 * k4
        _check_finite(v, f"RK4 step {n + 1}")
        out[n + 1] = v
    return _finish(out, phi_hat, cfg, ops, method="if-rk4")


def _finish(traj_hat, phi_hat, cfg, ops, method):
    g = cfg.grid
    values = ops.to_values(traj_hat)
    traj = SpaceTimeField(g, values, (0.0, cfg.T))
    n0 = np.sum(np.abs(phi_hat) ** 2)
    nT = np.sum(np.abs(traj_hat[-1]) ** 2)
    l2_drift = float(abs(nT - n0) / n0) if n0 > 0 else float(nT)
    e0 = energy(Field2(g, values[0]))
    eT = energy(Field2(g, values[-1]))
    e_drift = float(abs(eT - e0) / abs(e0)) if e0 != 0 else float(abs(eT))
    return SolveResult(traj, l2_drift=l2_drift, energy_drift=e_drift, method=method)


def l2_norm(v):
    return v.l2()


def energy(v):
    """``int (v_x^2 - v_x v_y + v_y^2)/2 + 4^(-1/3) v^3/3``, evaluated spectrally."""
    g = v.grid
    V = fft_forward(v).coeffs
    vx = np.fft.ifft2(derivative_symbol(g, "x", 1) * V).real
    vy = np.fft.ifft2(derivative_symbol(g, "y", 1) * V).real
    scale = g.nx * g.ny / g.area
    vx, vy = vx * scale, vy * scale
    cell = g.dx * g.dy
    quad = 0.5 * np.sum(vx**2 - vx * vy + vy**2) * cell
    cubic = NONLIN_COEFF / 3.0 * np.sum(v.values**3) * cell
    return float(quad + cubic)
