"""Moments of path ensembles against the random Fourier series.

The class a = a1 (mod p) of paths t -> Kl(t; (a, b0)) behaves, as n grows,
like a random series sum_h beta(h; t) U_h over the h with (a1 - h) b0 a
square mod p, with U_h independent and arcsine distributed on [-2, 2].
"""

import numpy as np

from kloostpath import PrimePowerModulus
from kloostpath.moments import (MomentSpec, ShiftMultiset, empirical_moment,
                                equidist_stat, sum_of_products)
from kloostpath.randseries import (SeriesSpec, exact_series_moment,
                                   glued_second_moment, limit_second_moment,
                                   mu_u_second_moment, sample_glued,
                                   sample_series)

t = 0.5
limit = limit_second_moment(t, 1, 1, 3)
print(f"E|K({t})|^2 for the untruncated series, p=3: {limit:.6f} (5/9 = {5 / 9:.6f})")
for n in (6, 8, 10, 12):
    v = empirical_moment(MomentSpec(PrimePowerModulus(3, n), [t], [1], [1])).real
    print(f"  n={n:2d}: path ensemble {v:.6f}, gap {abs(v - limit):.2e}")

spec = SeriesSpec(H=1000, filter="qr", p=3, a1=1, b0=1, seed=0)
z = np.abs(sample_series(spec, [t], 50_000)[0]) ** 2
exact = exact_series_moment(spec, [t], [1], [1]).value.real
print(f"truncated series H=1000: exact {exact:.5f}, Monte Carlo {z.mean():.5f} +- {z.std() / np.sqrt(len(z)):.5f}")

print("KS distance of the complete sums to the arcsine law:")
for n in (8, 10, 12, 14):
    print(f"  n={n:2d}: {equidist_stat(3, n, 1, 1).ks:.2e}")

print("half-normalized sums of products (main terms 1/2, 0, 1/4):")
for mu in ({0: 2}, {0: 1}, {0: 2, 3: 2}):
    vals = [sum_of_products(ShiftMultiset(PrimePowerModulus(3, n), mu), 1, 1) for n in (6, 9, 12)]
    print(f"  {mu}: " + ", ".join(f"{v:+.6f}" for v in vals))

print(f"glued series vs mu_U series at t={t} (target {mu_u_second_moment(t)}):")
rng = np.random.default_rng(1)
for p in (11, 31, 101):
    _, vals = sample_glued(p, 1, t, rng, H=500, size=20_000)
    print(f"  p={p:3d}: exact {glued_second_moment(p, 1, t):.5f}, Monte Carlo {np.mean(np.abs(vals) ** 2):.5f}")
