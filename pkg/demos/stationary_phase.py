"""Stationary phase mod p^n and the singular loci of shifted square-root phases."""

import math

from kloostpath import PrimePowerModulus
from kloostpath.klooster import kloosterman_naive, multiplicity_check
from kloostpath.statphase import (ShiftPhase, direct_sum, kloosterman_phase,
                                  reduce_sum_linear, reduce_sum_quadratic,
                                  singular_locus, vandermonde_emptiness)

m = PrimePowerModulus(3, 7)
ph = kloosterman_phase(m, 2, 5)
print("direct sum      ", direct_sum(ph) / math.sqrt(m.q))
print("linear reduction", reduce_sum_linear(ph, 4) / math.sqrt(m.q))
print("quadratic       ", reduce_sum_quadratic(ph) / math.sqrt(m.q))
print("reference       ", kloosterman_naive(m, 2, 5))

# Shifts that agree to high 3-adic order produce singular points; shifts at
# distance 3 are ruled out by the Vandermonde criterion.
m = PrimePowerModulus(3, 6)
for T in [(0, 3), (0, 3**5)]:
    sp = ShiftPhase(m, T, (1, -1), 1)
    for r in (2, 4, 6):
        rep = vandermonde_emptiness(sp, r)
        print(f"T={T} r={r}: {rep.verdict.value:12s} locus size {len(singular_locus(sp, 2, r))}")

# The number of x with x + 1/x = u for u = +-2 + p^(2k) u0 depends on whether
# +-u0 is a square mod p.
rep = multiplicity_check(PrimePowerModulus(5, 5), 1)
print(f"every unit u0 gives 2p^k solutions: {rep.passed} ({len(rep.counterexamples)} of {rep.checked} differ)")
print("restricted to square classes:", multiplicity_check(PrimePowerModulus(5, 5), 1, refined=True).passed)
