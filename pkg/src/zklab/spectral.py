"""Periodic grids, Fourier transforms and Fourier multipliers.

The plane is replaced by the periodic box ``[0, lx) x [0, ly)``.  Transforms
are normalised so that discrete sums approximate continuum integrals::

    F(xi, eta) = (lx*ly / (nx*ny)) * sum_{x,y} f(x, y) exp(-i(x*xi + y*eta))

which gives the Parseval identity

    ||f||_{L^2}^2 = sum_{x,y} |f|^2 dx dy = (1 / (lx*ly)) * sum_{xi,eta} |F|^2.

Coefficient arrays are stored in numpy FFT order (axis 0 is x / xi, axis 1 is
y / eta).  Symbols that are odd in a frequency variable (odd derivatives, the
dispersion relation) are evaluated with the Nyquist wavenumber replaced by 0,
so that they map Hermitian-symmetric coefficients to Hermitian-symmetric
coefficients and real fields stay real.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "Grid2",
    "Field2",
    "SpecField2",
    "fft_forward",
    "fft_inverse",
    "apply_derivative",
    "apply_potential",
    "dyadic_project",
    "dealias",
    "dealias_mask",
    "japanese",
    "POTENTIAL_KINDS",
]

POTENTIAL_KINDS = ("riesz_x", "riesz_y", "riesz_xy", "bessel_x", "bessel_y", "bessel_xy")


def japanese(a):
    """Return ``<a> = (1 + a**2)**(1/2)``."""
    return np.sqrt(1.0 + np.square(a))


def _odd_safe(k, n):
    k = k.copy()
    k[n // 2] = 0.0
    return k


@dataclass(frozen=True)
class Grid2:
    """Rectangular periodic grid with ``nx * ny`` points on ``[0,lx) x [0,ly)``."""

    nx: int
    ny: int
    lx: float = 2 * np.pi
    ly: float = 2 * np.pi

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n!r}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("periods lx, ly must be positive")

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def area(self):
        return self.lx * self.ly

    @cached_property
    def x(self):
        return np.arange(self.nx) * self.dx

    @cached_property
    def y(self):
        return np.arange(self.ny) * self.dy

    @cached_property
    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def kx(self):
        """Integer mode indices along x, in FFT order."""
        return np.fft.fftfreq(self.nx, 1.0 / self.nx)

    @cached_property
    def ky(self):
        return np.fft.fftfreq(self.ny, 1.0 / self.ny)

    @cached_property
    def xi(self):
        """Angular frequencies ``2*pi*k/lx`` along x, in FFT order."""
        return 2 * np.pi / self.lx * self.kx

    @cached_property
    def eta(self):
        return 2 * np.pi / self.ly * self.ky

    @cached_property
    def xi_odd(self):
        return _odd_safe(self.xi, self.nx)

    @cached_property
    def eta_odd(self):
        return _odd_safe(self.eta, self.ny)

    @cached_property
    def dispersion(self):
        """Phase speed table ``xi**3 + eta**3`` (odd-safe at Nyquist)."""
        return self.xi_odd[:, None] ** 3 + self.eta_odd[None, :] ** 3

    def zeros(self):
        return Field2(self, np.zeros(self.shape))


@dataclass
class Field2:
    """Real samples ``values[i, j] = f(x_i, y_j)`` on a :class:`Grid2`."""

    grid: Grid2
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if np.iscomplexobj(values):
            raise TypeError("Field2 holds real samples; use SpecField2 for coefficients")
        self.values = values.astype(float, copy=False)

    @classmethod
    def from_function(cls, grid, func):
        X, Y = grid.mesh
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape).astype(float))

    def l2(self):
        return float(np.sqrt(np.sum(self.values**2) * self.grid.dx * self.grid.dy))

    def __add__(self, other):
        return Field2(self.grid, self.values + other.values)

    def __sub__(self, other):
        return Field2(self.grid, self.values - other.values)

    def __mul__(self, c):
        return Field2(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass
class SpecField2:
    """Fourier coefficients ``coeffs[k, m]`` at ``(grid.xi[k], grid.eta[m])``."""

    grid: Grid2
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != self.grid.shape:
            raise ValueError(f"coeffs shape {coeffs.shape} does not match grid {self.grid.shape}")
        self.coeffs = coeffs

    def l2(self):
        """L^2 norm of the represented field (Parseval)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2) / self.grid.area))

    def __add__(self, other):
        return SpecField2(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return SpecField2(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, c):
        return SpecField2(self.grid, self.coeffs * c)

    __rmul__ = __mul__


def fft_forward(f):
    """Transform samples to coefficients; raises on non-finite input."""
    if not np.all(np.isfinite(f.values)):
        bad = int(np.count_nonzero(~np.isfinite(f.values)))
        raise ValueError(f"fft_forward: {bad} non-finite sample(s) in input field")
    g = f.grid
    return SpecField2(g, np.fft.fft2(f.values) * (g.area / (g.nx * g.ny)))


def fft_inverse(F):
    """Transform coefficients back to real samples.

    The imaginary part of the inverse transform is discarded; it vanishes up
    to rounding whenever ``F`` is Hermitian symmetric.
    """
    if not np.all(np.isfinite(F.coeffs)):
        raise ValueError("fft_inverse: non-finite coefficients")
    g = F.grid
    return Field2(g, np.fft.ifft2(F.coeffs).real * (g.nx * g.ny / g.area))


def derivative_symbol(grid, axis, order):
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if int(order) != order or not 1 <= order <= 3:
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order!r}")
    if axis == "x":
        k = grid.xi_odd if order % 2 else grid.xi
        return ((1j * k) ** order)[:, None] * np.ones((1, grid.ny))
    k = grid.eta_odd if order % 2 else grid.eta
    return np.ones((grid.nx, 1)) * ((1j * k) ** order)[None, :]


def apply_derivative(F, axis, order=1):
    """Multiply by ``(i xi)**order`` or ``(i eta)**order``; order is at most 3."""
    return SpecField2(F.grid, F.coeffs * derivative_symbol(F.grid, axis, order))


def _magnitudes(grid, kind):
    xi = np.abs(grid.xi)[:, None] * np.ones((1, grid.ny))
    eta = np.ones((grid.nx, 1)) * np.abs(grid.eta)[None, :]
    if kind.endswith("_x"):
        return xi
    if kind.endswith("_y"):
        return eta
    return np.hypot(xi, eta)


def potential_symbol(grid, kind, s):
    if kind not in POTENTIAL_KINDS:
        raise ValueError(f"unknown potential kind {kind!r}; expected one of {POTENTIAL_KINDS}")
    r = _magnitudes(grid, kind)
    if kind.startswith("bessel"):
        return japanese(r) ** s
    if s == 0:
        return np.ones_like(r)
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = r[nz] ** s
    return out


def apply_potential(F, kind, s):
    """Apply a Riesz (``|.|^s``) or Bessel (``<.>^s``) potential multiplier.

    Riesz symbols vanish on their zero set for ``s > 0``.  For ``s < 0`` the
    symbol is singular there, so every coefficient on that set must be zero.
    """
    symbol = potential_symbol(F.grid, kind, s)
    if kind.startswith("riesz") and s < 0:
        singular = _magnitudes(F.grid, kind) == 0
        if np.any(F.coeffs[singular] != 0):
            raise ValueError(
                f"{kind} with s={s} < 0 is singular at zero frequency; "
                "input has nonzero coefficients there"
            )
    return SpecField2(F.grid, F.coeffs * symbol)


def dyadic_mask(grid, axis, kind, k):
    if axis == "x":
        r = np.abs(grid.xi)[:, None] * np.ones((1, grid.ny))
    elif axis == "y":
        r = np.ones((grid.nx, 1)) * np.abs(grid.eta)[None, :]
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if kind == "P_k":
        return r <= 2.0**k
    if kind == "P_dk":
        return (r > 2.0**k) & (r <= 2.0 ** (k + 1))
    if kind == "P_ge1":
        return r > 1.0
    raise ValueError(f"unknown projection kind {kind!r}; expected 'P_k', 'P_dk' or 'P_ge1'")


def dyadic_project(F, axis, kind, k=0):
    """Sharp frequency cutoff along one axis.

    ``P_k`` keeps ``|xi| <= 2**k``, ``P_dk`` keeps ``2**k < |xi| <= 2**(k+1)``
    and ``P_ge1`` keeps ``|xi| > 1`` (``k`` is ignored for ``P_ge1``).
    """
    return SpecField2(F.grid, np.where(dyadic_mask(F.grid, axis, kind, k), F.coeffs, 0))


def dealias_mask(grid):
    """Modes kept by the 2/3 rule: ``|k| < nx/3`` and ``|m| < ny/3``."""
    keep_x = 3 * np.abs(grid.kx) < grid.nx
    keep_y = 3 * np.abs(grid.ky) < grid.ny
    return keep_x[:, None] & keep_y[None, :]


def dealias(F):
    return SpecField2(F.grid, np.where(dealias_mask(F.grid), F.coeffs, 0))
