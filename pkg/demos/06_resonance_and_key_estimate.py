"""Resonance, frequency regions and the key bilinear estimate.

Under the convolution constraint the modulations satisfy
|s0 - s1 - s2| = 3 |xi xi1 xi2 + eta eta1 eta2|.  In the region where both
inputs are comparable to the output in xi, this forces one modulation to be of
size |xi|^3.  The key estimate is then sampled on windowed and modulated free
solutions.
"""
from zklab.estimates import FrequencyTriple, region_classify, verify_key_estimate, verify_regions, verify_resonance

t = FrequencyTriple.from_inputs(1.0, 1.0, 2.0, -1.0)
print(f"example triple: s0 - s1 - s2 = {float(t.sigma0 - t.sigma1 - t.sigma2):g}")
for inputs in ((1, 0, -1, 0), (8, 0, 8, 0), (8, 32, 8, -32)):
    print(inputs, "->", region_classify(FrequencyTriple.from_inputs(*map(float, inputs))))

rep = verify_resonance(samples=10_000)
print(f"identity residual over {rep.ensemble_size} triples: {rep.max_ratio:.1e}")
rep = verify_regions(samples=10_000)
print(f"region counts {rep.params['counts']}; smallest R4 ratio {rep.params['min_r4_ratio']:.3f}")

rep = verify_key_estimate(ensemble=4, grids=(32, 32))
print(f"key estimate, 4 pairs: max ratio {rep.max_ratio:.4f}")
print("share of interaction weight by region:",
      {k: round(v, 3) for k, v in rep.params["region_weights"].items()})
