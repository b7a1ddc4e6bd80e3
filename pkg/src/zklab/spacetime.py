"""Time-sampled fields and the time quadratures shared by the solvers and norms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Field2, Grid2

__all__ = ["SpaceTimeField", "cumulative_integral", "trapezoid_weights"]


@dataclass
class SpaceTimeField:
    """Real slices ``values[j] = u(t_j, ., .)`` at ``t_j = linspace(t0, t1, nt)[j]``."""

    grid: Grid2
    values: np.ndarray
    t_window: tuple[float, float]

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 3 or values.shape[1:] != self.grid.shape:
            raise ValueError(
                f"slices must have shape (nt, {self.grid.nx}, {self.grid.ny}), got {values.shape}"
            )
        if values.shape[0] < 2:
            raise ValueError("need at least two time samples")
        if np.iscomplexobj(values):
            raise TypeError("SpaceTimeField holds real samples")
        t0, t1 = map(float, self.t_window)
        if not t1 > t0:
            raise ValueError(f"empty time window {self.t_window!r}")
        self.values = values.astype(float, copy=False)
        self.t_window = (t0, t1)

    @classmethod
    def from_slices(cls, slices, t_window):
        slices = list(slices)
        return cls(slices[0].grid, np.stack([s.values for s in slices]), t_window)

    @property
    def nt(self):
        return self.values.shape[0]

    @property
    def times(self):
        return np.linspace(self.t_window[0], self.t_window[1], self.nt)

    @property
    def dt(self):
        return (self.t_window[1] - self.t_window[0]) / (self.nt - 1)

    def slice(self, j):
        return Field2(self.grid, self.values[j])

    def index_of(self, t, rtol=1e-9):
        """Index of the sample at time ``t``; raises if ``t`` is off the partition."""
        t0, t1 = self.t_window
        span = t1 - t0
        if t < t0 - rtol * span or t > t1 + rtol * span:
            raise ValueError(f"t={t} outside sampled window [{t0}, {t1}]")
        pos = (t - t0) / self.dt
        j = int(round(pos))
        if abs(pos - j) > 1e-6:
            raise ValueError(f"t={t} is not aligned with a sample instant (dt={self.dt})")
        return j


def trapezoid_weights(n, dt):
    w = np.full(n, dt)
    w[0] = w[-1] = dt / 2
    return w


def _forward_cumulative(f, dt):
    n = f.shape[0]
    out = np.zeros_like(f)
    rules = ["none"] * n
    if n == 1:
        return out, rules
    if n == 2:
        out[1] = 0.5 * dt * (f[0] + f[1])
        rules[1] = "trapezoid"
        return out, rules
    pairs = dt / 3.0 * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
    out[2::2] = np.cumsum(pairs, axis=0)
    for j in range(2, n, 2):
        rules[j] = "simpson"
    out[1] = dt / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
    rules[1] = "quadratic-start"
    odd = np.arange(3, n, 2)
    if odd.size:
        out[odd] = out[odd - 3] + 3.0 * dt / 8.0 * (
            f[odd - 3] + 3.0 * f[odd - 2] + 3.0 * f[odd - 1] + f[odd]
        )
        for j in odd:
            rules[j] = "simpson+3/8"
    return out, rules


def cumulative_integral(f, dt, origin=0):
    """Integrals ``int_{t_origin}^{t_j} f`` for every sample ``j``.

    Even panel counts use composite Simpson; odd counts of at least three end
    with one Simpson 3/8 panel, and a single panel uses the quadratic through
    the first three samples.  Returns the integrals (same shape as ``f``) and a
    per-sample list naming the rule used.
    """
    f = np.asarray(f)
    n = f.shape[0]
    if not 0 <= origin < n:
        raise ValueError(f"origin index {origin} outside 0..{n - 1}")
    out = np.zeros_like(f)
    rules = ["none"] * n
    fwd, r = _forward_cumulative(f[origin:], dt)
    out[origin:] = fwd
    rules[origin:] = r
    if origin > 0:
        bwd, r = _forward_cumulative(f[origin::-1], dt)
        out[origin::-1] = -bwd
        rules[origin::-1] = r
    return out, rules
