"""Monte Carlo cross-check and the approach to the continuum identity.

Run with ``python3 demos/monte_carlo_and_scaling.py``.  First, random
partitions from the Poissonised Plancherel measure reproduce Q as an average
of a product over parts.  Second, under the KdV scaling the bilinear residual
shrinks as the lattice spacing does.
"""

from ftbessel import SigmaProfile
from ftbessel.continuum import kdv_residual_diagnostic
from ftbessel.fredholm import gap_probability
from ftbessel.plancherel import estimate_many, sample_plancherel

warm = SigmaProfile.fermi(0.5)

print("A few samples at L = 2:", [sample_plancherel(2.0, seed).parts for seed in range(5)])

est = estimate_many(warm, 2.0, ["1/2", "3/2", "5/2"], 50_000, seed=2024)
print("\nMonte Carlo against the determinant (L = 2, fermi u = 1/2, 50000 samples)")
for s, twice in (("1/2", 1), ("3/2", 3), ("5/2", 5)):
    e = est[twice]
    q = gap_probability(2.0, s, warm).q
    print(f"  s={s}: MC {e.mean:.5f} +- {e.std_err:.5f}, determinant {q:.5f}, z = {e.z_score(q):+.2f}")

print("\nBilinear KdV residual at (x, t) = (0, 1) for sigma_eps(l) = 1/(1 + e^(-eps l))")
rep = kdv_residual_diagnostic(0.0, 1.0, (0.4, 0.3, 0.25, 0.2))
for e, r, g, p in zip(rep.epsilons, rep.residuals, rep.toda_gaps, rep.points):
    print(f"  eps={e:4.2f} (L={p.L:6.1f}, s={p.s}): residual {r:+.3e}, scaled Toda gap {g:+.3f}")
print("  decreasing:", rep.decreasing)
