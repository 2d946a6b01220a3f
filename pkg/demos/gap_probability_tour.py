"""A short tour of the gap probability Q_sigma(L, s).

Run with ``python3 demos/gap_probability_tour.py``.  Prints a table of
``Q`` for the sharp and the Fermi filling, compares the sharp case with its
Toeplitz-determinant form, and shows how ``Q`` interpolates between the
small-L product and 1 as ``s`` grows.
"""

import math

from ftbessel import SigmaProfile, halfint_range
from ftbessel.fredholm import gap_probability, q_zero, toeplitz_q

sharp = SigmaProfile.indicator()
warm = SigmaProfile.fermi(0.5)

# --- 1. a table of Q ------------------------------------------------------
print("Q_sigma(L, s) at L = 1")
print(f"{'s':>6} {'sharp':>14} {'fermi u=1/2':>14}")
for s in halfint_range("-5/2", "9/2"):
    print(f"{str(s):>6} {gap_probability(1.0, s, sharp).q:14.10f} {gap_probability(1.0, s, warm).q:14.10f}")

# The sharp filling has no particles below -1/2, so Q vanishes for s < -1/2,
# while the Fermi filling leaves a positive probability everywhere.

# --- 2. the Toeplitz form --------------------------------------------------
print("\nSharp filling against e^{-L^2} det[I_{i-j}(2L)]")
for L in (0.5, 1.0, 2.0, 3.0):
    worst = max(abs(gap_probability(L, s, sharp).q - toeplitz_q(L, s)) for s in halfint_range("-1/2", "21/2"))
    print(f"  L = {L:3.1f}: max difference over s <= 21/2 is {worst:.1e}")

# --- 3. small L ------------------------------------------------------------
print("\nAs L -> 0 the Fermi Q tends to prod_i (1 - sigma(-i - s))")
for L in (0.4, 0.1, 0.025):
    r = gap_probability(L, "1/2", warm)
    print(f"  L = {L:5.3f}: Q = {r.q:.10f}")
print(f"  limit     : {q_zero('1/2', warm):.10f}")

# --- 4. certified output -----------------------------------------------------
r = gap_probability(2.0, "3/2", warm)
print(f"\nEvery value carries its truncation certificate: Q = {r.q:.12f}, "
      f"window {r.window[0]}..{r.window[1]}, trunc_err {r.trunc_err:.1e}, floor {r.floor:.1e}")
print(f"e^(-1) for reference: {math.exp(-1):.10f}")
