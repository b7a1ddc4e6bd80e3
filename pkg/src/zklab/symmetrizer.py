"""Shear change of variables that symmetrises the ZK dispersion.

With ``x' = mu*x + lam*y`` and ``y' = mu*x - lam*y`` a plane wave
``exp(i(xi'*x' + eta'*y'))`` becomes ``exp(i(xi*x + eta*y))`` where
``xi = mu*(xi' + eta')`` and ``eta = lam*(xi' - eta')``.  For the constants
below the ZK symbol ``xi**3 + xi*eta**2`` equals ``xi'**3 + eta'**3``.

The map is applied to symbols and plane waves only.  The shear does not send
a periodic lattice to itself, so sampled fields are never resampled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymmetrizerConstants",
    "CONSTANTS",
    "MU",
    "LAM",
    "NONLIN_COEFF",
    "dual_map",
    "inverse_dual_map",
    "dual_matrix",
    "symbol_original",
    "symbol_symmetric",
]


@dataclass(frozen=True)
class SymmetrizerConstants:
    mu: float = 4.0 ** (-1.0 / 3.0)
    lam: float = np.sqrt(3.0) * 4.0 ** (-1.0 / 3.0)
    nonlin_coeff: float = 4.0 ** (-1.0 / 3.0)

    @property
    def symmetric_coeff(self):
        """Coefficient of ``d_x'^3 + d_y'^3``; equals 1."""
        return self.mu**3 + self.mu * self.lam**2

    @property
    def mixed_coeff(self):
        """Coefficient of the mixed third derivatives; equals 0."""
        return 3 * self.mu**3 - self.mu * self.lam**2


CONSTANTS = SymmetrizerConstants()
MU = CONSTANTS.mu
LAM = CONSTANTS.lam
NONLIN_COEFF = CONSTANTS.nonlin_coeff


def dual_matrix(c=CONSTANTS):
    """Matrix sending ``(xi', eta')`` to ``(xi, eta)``; determinant ``-2*mu*lam``."""
    return np.array([[c.mu, c.mu], [c.lam, -c.lam]])


def dual_map(xi_p, eta_p, c=CONSTANTS):
    return c.mu * (xi_p + eta_p), c.lam * (xi_p - eta_p)


def inverse_dual_map(xi, eta, c=CONSTANTS):
    a = xi / c.mu
    d = eta / c.lam
    return 0.5 * (a + d), 0.5 * (a - d)


def symbol_original(xi, eta):
    """Symbol ``xi**3 + xi*eta**2`` of ``d_x^3 + d_x d_y^2`` (up to the factor ``-i``)."""
    return xi**3 + xi * eta**2


def symbol_symmetric(xi_p, eta_p):
    """Symbol ``xi'**3 + eta'**3`` of ``d_x'^3 + d_y'^3`` (up to the factor ``-i``)."""
    return xi_p**3 + eta_p**3
