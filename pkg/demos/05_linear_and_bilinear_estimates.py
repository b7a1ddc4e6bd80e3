"""Sampling the linear and bilinear estimates.

Each verify_* call draws a seeded Gaussian ensemble of band-limited data,
evaluates both sides of an inequality and reports the ratio distribution,
its drift under grid refinement and (where relevant) a scaling exponent.
Ensembles here are small so the script runs in about a minute.
"""
from zklab import NormSpec, TimeCutoff
from zklab.estimates import verify_bilinear, verify_linear_lemma, verify_strichartz

rep = verify_linear_lemma(NormSpec(0.5, 0.55, -1 / 3), TimeCutoff(1.0), ensemble=10)
print(f"linear lemma: max ratio {rep.max_ratio:.4f}; Duhamel T-slope {rep.scaling_slope:.4f} "
      f"vs 1-b+b' = {rep.params['expected_slope']:.4f}")

for fam in ("str1", "str2", "l4", "lpq"):
    rep = verify_strichartz(fam, ensemble=10)
    print(f"{fam}: p={rep.params['p']:g} q={rep.params['q']:g} b={rep.params['b']:g}  "
          f"max ratio {rep.max_ratio:.4f}, refinement drift {rep.refinement_drift:.1e}")

rep = verify_bilinear("bil3", range(0, 5), ensemble=2)
print("bil3 per-k worst LHS/(|u||v|):", " ".join(f"{x:.4f}" for x in rep.params["per_k_max_lhs_over_norms"]))
print(f"fitted dyadic slope {rep.scaling_slope:.3f} (bound 1/2)")
