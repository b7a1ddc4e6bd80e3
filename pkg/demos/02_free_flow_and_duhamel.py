"""The free group and the Duhamel integral.

U(t) multiplies each Fourier coefficient by exp(i t (xi^3 + eta^3)); it is
unitary and satisfies the group law.  The Duhamel integral is evaluated by
pulling the forcing back with U(-s), integrating in time and pushing forward.
"""
import numpy as np

from zklab import Field2, Grid2, SpaceTimeField, duhamel, fft_forward, fft_inverse, free_evolve

grid = Grid2(64, 64)
phi = Field2.from_function(grid, lambda x, y: np.exp(np.cos(x) + 0.5 * np.sin(2 * y)))
F = fft_forward(phi)
for t in (0.1, 1.0, 10.0):
    print(f"t = {t:5.1f}:  ||U(t) phi|| / ||phi|| - 1 = {free_evolve(F, t).l2() / F.l2() - 1:.1e}")

gap = np.abs(free_evolve(free_evolve(F, 0.2), 0.3).coeffs - free_evolve(F, 0.5).coeffs).max()
print(f"group law U(0.3)U(0.2) = U(0.5): max coefficient gap {gap:.1e}")

# forcing f(s) = U(s) g: the pulled-back integrand is constant and the integral is t U(t) g
small = Grid2(16, 16)
g = fft_forward(Field2.from_function(small, lambda x, y: np.cos(x + 2 * y)))
times = np.linspace(0.0, 1.0, 11)
vals = np.stack([fft_inverse(free_evolve(g, t)).values for t in times])
out = duhamel(SpaceTimeField(small, vals, (0.0, 1.0)), 1.0)
exact = fft_inverse(free_evolve(g, 1.0)).values
print(f"Duhamel of U(s)g at t=1 ({out.meta['quadrature']}): error {np.abs(out.values - exact).max():.1e}")
