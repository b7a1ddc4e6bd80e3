"""Symmetrising the ZK dispersion.

The ZK operator d_x^3 + d_x d_y^2 has symbol xi^3 + xi*eta^2.  After the shear
x' = mu x + lam y, y' = mu x - lam y it becomes xi'^3 + eta'^3, which treats the
two directions alike.  This script checks the constants and the symbol identity.
"""
import numpy as np

from zklab.symmetrizer import CONSTANTS, dual_map, dual_matrix, symbol_original, symbol_symmetric

print(f"mu = {CONSTANTS.mu:.15f}, lambda = {CONSTANTS.lam:.15f}")
print(f"coefficient of the symmetric part  mu^3 + mu lam^2 = {CONSTANTS.symmetric_coeff:.15f}")
print(f"coefficient of the mixed part     3mu^3 - mu lam^2 = {CONSTANTS.mixed_coeff:.1e}")
print(f"determinant of the frequency map = {np.linalg.det(dual_matrix()):.6f}")

rng = np.random.default_rng(0)
xp, ep = rng.uniform(-20, 20, size=(2, 5))
for a, b in zip(xp, ep):
    xi, eta = dual_map(a, b)
    print(f"(xi', eta') = ({a:7.3f}, {b:7.3f})  ->  original {symbol_original(xi, eta):12.5f}"
          f"   symmetric {symbol_symmetric(a, b):12.5f}")
