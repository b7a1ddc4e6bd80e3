"""X^{s,b} norms of windowed free solutions.

For u = psi(t) U(t) phi the space-time transform is psi_hat(tau - omega) times
phi_hat, so the norm factorises into a temporal and a spatial part.  The
direct path takes the full three-dimensional transform instead; the two agree
once the time sampling resolves the dispersion relation.
"""
import numpy as np

from zklab import Grid2, NormSpec, SpaceTimeField, TimeCutoff, xsb_norm_direct, xsb_norm_factorized
from zklab.estimates import band_coefficients, band_field
from zklab.norms import ResolutionError, required_nt
from zklab.propagator import free_solution

grid = Grid2(32, 32)
cut = TimeCutoff(1.0)
F = band_field(grid, band_coefficients(6, np.random.default_rng(0)))
omega = 2 * 6**3
need = required_nt((-2, 2), omega)
print(f"band 6 needs at least {need} time samples on [-2, 2]")

t = np.linspace(-2, 2, 4097)
u = SpaceTimeField(grid, cut(t)[:, None, None] * free_solution(F, t), (-2.0, 2.0))
for spec in (NormSpec(0, 0), NormSpec(0.6, 0.55), NormSpec(0.6, -1 / 3), NormSpec(0.6, 0.55, spatial_weight="x_only")):
    d, f = xsb_norm_direct(u, spec), xsb_norm_factorized(F, cut, spec)
    print(f"s={spec.s:.1f} b={spec.b:+.3f} {spec.spatial_weight:6s}: direct {d:.6f}  factorised {f:.6f}"
          f"  gap {abs(d - f) / f:.2e}")

t = np.linspace(-2, 2, 257)
coarse = SpaceTimeField(grid, cut(t)[:, None, None] * free_solution(F, t), (-2.0, 2.0))
try:
    xsb_norm_direct(coarse, NormSpec(0.6, 0.55))
except ResolutionError as exc:
    print("coarse sampling rejected:", exc)

Ts = np.array([0.25, 0.5, 1.0])
vals = [xsb_norm_factorized(F, TimeCutoff(T), NormSpec(0.5, 0.0)) for T in Ts]
print(f"b = 0 scaling in T: slope {np.polyfit(np.log(Ts), np.log(vals), 1)[0]:.4f} (expect 1/2)")
