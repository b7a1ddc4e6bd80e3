"""Sobolev, mixed Lebesgue and Bourgain ``X^{s,b}`` norms, time cutoffs and
the bilinear pseudoproducts ``I^s_{x,-}``, ``I^s_{x,+}``, ``I^s_{y,-}``,
``I^s_{y,+}``.

The space-time transform uses the convention

    u_hat(tau, xi, eta) = int exp(-i(t*tau + x*xi + y*eta)) u dt dx dy,

so a free solution ``U(t)phi`` concentrates on ``tau = xi**3 + eta**3`` and
the modulation is ``sigma = tau - xi**3 - eta**3``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .parallel import worker_count
from .spacetime import SpaceTimeField, trapezoid_weights
from .spectral import SpecField2, dealias, fft_forward, fft_inverse, japanese

__all__ = [
    "SpaceTimeField",
    "NormSpec",
    "TimeCutoff",
    "ResolutionError",
    "bump",
    "temporal_weight",
    "temporal_weight_samples",
    "spatial_weight",
    "sobolev_norm",
    "mixed_norm",
    "mixed_norm_values",
    "required_nt",
    "xsb_norm_direct",
    "xsb_norm_factorized",
    "modulation_weight",
    "bilinear_symbol",
    "bilinear_pseudoproduct",
    "pseudoproduct_hat",
    "bilinear_bruteforce",
    "BILINEAR_SYMBOLS",
]

BILINEAR_SYMBOLS = ("x_minus", "x_plus", "y_minus", "y_plus")


class ResolutionError(ValueError):
    """The time sampling cannot resolve the characteristic surface."""


@dataclass(frozen=True)
class NormSpec:
    s: float = 0.0
    b: float = 0.0
    b_prime: float = 0.0
    spatial_weight: str = "full"

    def __post_init__(self):
        if self.spatial_weight not in ("full", "x_only"):
            raise ValueError("spatial_weight must be 'full' or 'x_only'")

    def check_linear_hypotheses(self):
        """Raise unless ``-1/2 < b' <= 0 <= b <= b' + 1``."""
        if not (-0.5 < self.b_prime <= 0 <= self.b <= self.b_prime + 1):
            raise ValueError(
                f"need -1/2 < b' <= 0 <= b <= b'+1, got b={self.b}, b'={self.b_prime}"
            )


def _smooth_step(x):
    # 0 for x <= 0, 1 for x >= 1, C-infinity in between
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0) & (x < 1)
    a = np.exp(-1.0 / x[inside])
    c = np.exp(-1.0 / (1.0 - x[inside]))
    out[inside] = a / (a + c)
    out[x >= 1] = 1.0
    return out


def bump(t):
    """Even C-infinity cutoff: 1 on ``[-1, 1]``, 0 outside ``(-2, 2)``, values in ``[0, 1]``."""
    return _smooth_step(2.0 - np.abs(np.asarray(t, dtype=float)))


# zero padding so that the Bessel-kernel tail (decay exp(-|t|)) wraps negligibly
_PAD = 64.0
_SAMPLES_PER_T = 2048


def temporal_weight_samples(samples, h, b):
    """``((1/2pi) int <sigma>^{2b} |h_hat(sigma)|^2 dsigma)^(1/2)`` from uniform samples.

    The samples (spacing ``h``) must cover the support of the profile.  The
    transform is a zero-padded FFT and the sigma integral its Riemann sum.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size + int(np.ceil(_PAD / h))
    n += n % 2
    spec = np.abs(np.fft.fft(samples, n) * h) ** 2
    sigma = 2 * np.pi * np.fft.fftfreq(n, h)
    return float(np.sqrt(np.sum(japanese(sigma) ** (2 * b) * spec) / (n * h)))


def temporal_weight(profile, half_width, b):
    """:func:`temporal_weight_samples` for a callable supported in ``[-half_width, half_width]``."""
    h = half_width / _SAMPLES_PER_T
    t = np.arange(-_SAMPLES_PER_T, _SAMPLES_PER_T + 1) * h
    return temporal_weight_samples(profile(t), h, b)


@dataclass(frozen=True)
class TimeCutoff:
    """``psi_T(t) = psi(t / T)`` with the smooth bump :func:`bump`."""

    T: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("cutoff scale T must be positive")

    def __call__(self, t):
        return bump(np.asarray(t, dtype=float) / self.T)

    @property
    def support(self):
        return 2.0 * self.T

    def weight(self, b, modulation=0.0):
        """Temporal factor of the X^{s,b} norm of ``psi_T(t) cos(modulation t) U(t) phi``."""
        return _cutoff_weight(self.T, float(b), float(modulation))

    def l2(self):
        return self.weight(0.0)


@lru_cache(maxsize=256)
def _cutoff_weight(T, b, modulation):
    if modulation == 0.0:
        return temporal_weight(lambda t: bump(t / T), 2 * T, b)
    return temporal_weight(lambda t: bump(t / T) * np.cos(modulation * t), 2 * T, b)


def spatial_weight(grid, s, kind="full"):
    if kind == "full":
        return japanese(np.hypot(grid.xi[:, None], grid.eta[None, :])) ** s
    if kind == "x_only":
        return japanese(grid.xi)[:, None] ** s * np.ones((1, grid.ny))
    raise ValueError(f"unknown spatial weight {kind!r}")


def _weighted_l2(F, s, kind="full"):
    w = spatial_weight(F.grid, s, kind)
    return float(np.sqrt(np.sum((w * np.abs(F.coeffs)) ** 2) / F.grid.area))


def sobolev_norm(phi, s):
    """``|| <(xi, eta)>^s phi_hat ||_{L^2}``."""
    F = phi if isinstance(phi, SpecField2) else fft_forward(phi)
    return _weighted_l2(F, s, "full")


def mixed_norm_values(values, cell, dt, p, q):
    """``L^p_t L^q_{x,y}`` norm of samples ``values[j, i, k]``.

    ``cell`` is the spatial cell area; the time integral uses the trapezoid rule.
    """
    if p < 1 or q < 1:
        raise ValueError("mixed norm exponents must be >= 1")
    a = np.abs(values)
    inner = (np.sum(a**q, axis=(1, 2)) * cell) ** (1.0 / q)
    w = trapezoid_weights(values.shape[0], dt)
    return float(np.sum(w * inner**p) ** (1.0 / p))


def mixed_norm(u, p, q):
    g = u.grid
    return mixed_norm_values(u.values, g.dx * g.dy, u.dt, p, q)


def _period_spectrum(u):
    # one period of the periodic extension: the first nt-1 samples
    g = u.grid
    vals = u.values[:-1]
    coef = u.dt * g.dx * g.dy
    return sfft.fftn(vals, axes=(0, 1, 2), workers=worker_count()) * coef


def _sigma(u):
    g = u.grid
    n = u.nt - 1
    tau = 2 * np.pi * np.fft.fftfreq(n, u.dt)
    if n % 2 == 0:
        tau[n // 2] = 0.0
    return tau[:, None, None] - g.dispersion[None]


def _support_omega(u):
    g = u.grid
    F = np.fft.fft2(u.values, axes=(1, 2))
    energy = np.sum(np.abs(F) ** 2, axis=0)
    total = energy.sum()
    if total == 0:
        return 0.0
    live = energy > 1e-24 * total
    return float(np.max(np.abs(g.dispersion[live])))


def required_nt(t_window, omega_max):
    """Smallest admissible sample count ``4 (t1 - t0) omega_max / (2 pi)``."""
    width = t_window[1] - t_window[0]
    return int(np.ceil(4 * width * omega_max / (2 * np.pi)))


def _check_resolution(u):
    need = required_nt(u.t_window, _support_omega(u))
    if u.nt < need:
        raise ResolutionError(
            f"time sampling too coarse for the characteristic surface: nt={u.nt}, "
            f"need nt >= {need}"
        )


def xsb_norm_direct(u, spec):
    """X^{s,b} norm of ``u`` from its three-dimensional discrete transform.

    ``u`` should vanish near both ends of its window (e.g. be multiplied by a
    cutoff); the transform treats the first ``nt - 1`` samples as one period.
    """
    _check_resolution(u)
    uh = _period_spectrum(u)
    g = u.grid
    w = japanese(_sigma(u)) ** spec.b * spatial_weight(g, spec.s, spec.spatial_weight)[None]
    period = (u.nt - 1) * u.dt
    return float(np.sqrt(np.sum(np.abs(w * uh) ** 2) / (period * g.area)))


def xsb_norm_factorized(phi, cutoff, spec, modulation=0.0):
    """X^{s,b} norm of ``psi_T(t) cos(modulation t) U(t) phi``.

    The space-time transform is a product of a function of ``sigma`` and
    ``phi_hat``, so the norm splits into a temporal and a spatial factor.
    """
    F = phi if isinstance(phi, SpecField2) else fft_forward(phi)
    return cutoff.weight(spec.b, modulation) * _weighted_l2(F, spec.s, spec.spatial_weight)


def modulation_weight(u, b):
    """Apply ``Lambda^b`` (multiplier ``<sigma>^b``) to a windowed field."""
    if b == 0:
        return SpaceTimeField(u.grid, u.values.copy(), u.t_window)
    _check_resolution(u)
    uh = sfft.fftn(u.values[:-1], axes=(0, 1, 2), workers=worker_count())
    uh *= japanese(_sigma(u)) ** b
    out = sfft.ifftn(uh, axes=(0, 1, 2), workers=worker_count()).real
    return SpaceTimeField(u.grid, np.concatenate([out, out[:1]]), u.t_window)


def bilinear_symbol(symbol, a1, a2, s):
    """``|a1 - a2|^s`` for the ``*_minus`` symbols, ``|a1 + 2 a2|^s`` for ``*_plus``."""
    if s < 0:
        raise ValueError("bilinear symbols are only defined here for s >= 0")
    if symbol.endswith("minus"):
        r = np.abs(a1 - a2)
    elif symbol.endswith("plus"):
        r = np.abs(a1 + 2 * a2)
    else:
        raise ValueError(f"unknown bilinear symbol {symbol!r}; expected one of {BILINEAR_SYMBOLS}")
    if s == 0:
        return np.ones_like(r, dtype=float)
    return r**s


def pseudoproduct_hat(f, g, grid, symbol, s):
    """Coefficients of the bilinear operator on real samples ``(..., nx, ny)``.

    The symbol depends on one axis only, so that axis is convolved in Fourier
    space (with the weights) while the other stays physical, where the
    convolution is a pointwise product.  Columns of negligible size are
    skipped.  Returns undealiased coefficients with the normalisation of
    :func:`zklab.spectral.fft_forward`.
    """
    if symbol not in BILINEAR_SYMBOLS:
        raise ValueError(f"unknown bilinear symbol {symbol!r}; expected one of {BILINEAR_SYMBOLS}")
    along_y = symbol.startswith("y")
    if along_y:
        f = np.swapaxes(f, -1, -2)
        g = np.swapaxes(g, -1, -2)
        freqs, n = grid.eta, grid.ny
    else:
        freqs, n = grid.xi, grid.nx
    ft = np.fft.fft(f, axis=-2)
    gt = np.fft.fft(g, axis=-2)
    out = np.zeros(np.broadcast_shapes(ft.shape, gt.shape), dtype=complex)
    live1 = _live_columns(ft)
    live2 = _live_columns(gt)
    g_live = gt[..., live2, :]
    for i in live1:
        a = bilinear_symbol(symbol, freqs[i], freqs[live2], s)
        dest = (i + live2) % n
        out[..., dest, :] += ft[..., i : i + 1, :] * (a[:, None] * g_live)
    out /= n
    # remaining physical axis to Fourier; restore (x, y) order
    out = np.fft.fft(out, axis=-1)
    if along_y:
        out = np.swapaxes(out, -1, -2)
    return out * (grid.area / (grid.nx * grid.ny))


def _live_columns(a):
    mags = np.max(np.abs(a), axis=tuple(i for i in range(a.ndim) if i != a.ndim - 2))
    top = mags.max() if mags.size else 0.0
    return np.flatnonzero(mags > 1e-15 * top) if top > 0 else np.arange(0)


def bilinear_pseudoproduct(f, g, symbol, s):
    """Bilinear operator with symbol ``a(xi1, xi2)`` (or ``a(eta1, eta2)``).

    Output coefficients are ``sum a * f_hat(k1) g_hat(k2)`` over ``k1 + k2 = k``
    with the normalisation of the pointwise product, dealiased.  Inputs should
    already be band-limited by the 2/3 rule.
    """
    grid = f.grid
    coeffs = pseudoproduct_hat(f.values, g.values, grid, symbol, s)
    return fft_inverse(dealias(SpecField2(grid, coeffs)))


def bilinear_bruteforce(f, g, symbol, s):
    """Reference pseudoproduct by an explicit loop over all frequency pairs."""
    grid = f.grid
    F = fft_forward(f).coeffs
    G = fft_forward(g).coeffs
    kx, ky = grid.kx.astype(int), grid.ky.astype(int)
    out = np.zeros(grid.shape, dtype=complex)
    for i1 in range(grid.nx):
        for j1 in range(grid.ny):
            if F[i1, j1] == 0:
                continue
            for i2 in range(grid.nx):
                for j2 in range(grid.ny):
                    if symbol.startswith("x"):
                        a = bilinear_symbol(symbol, grid.xi[i1], grid.xi[i2], s)
                    else:
                        a = bilinear_symbol(symbol, grid.eta[j1], grid.eta[j2], s)
                    k, m = kx[i1] + kx[i2], ky[j1] + ky[j2]
                    if 3 * abs(k) >= grid.nx or 3 * abs(m) >= grid.ny:
                        continue
                    out[k % grid.nx, m % grid.ny] += a * F[i1, j1] * G[i2, j2]
    out /= grid.area
    return fft_inverse(SpecField2(grid, out))
