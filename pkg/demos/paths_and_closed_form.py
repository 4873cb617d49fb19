"""Kloosterman paths mod prime powers: closed form, vanishing and figures.

Run with ``python3 demos/paths_and_closed_form.py [outdir]``; SVG files are
written to ``outdir`` (default ``figures/``).
"""

import sys
from pathlib import Path

from kloostpath import PrimePowerModulus
from kloostpath.export import export_path
from kloostpath.klooster import (kloosterman_closed, kloosterman_naive,
                                 summand_census)
from kloostpath.paths import path_vertices, rearranged_vertices

out = Path(sys.argv[1] if len(sys.argv) > 1 else "figures")
out.mkdir(parents=True, exist_ok=True)

# For n >= 2 the normalized sum is 2 J(u) Re[eps e(2u/q)] with u a square
# root of ab, so a direct O(q) sum and the O(log q) formula agree.
m = PrimePowerModulus(3, 8)
for a, b in [(1, 1), (5, 1), (2, 1)]:
    print(f"Kl_3^8({a},{b}): direct {kloosterman_naive(m, a, b).real:+.12f}"
          f"  closed {kloosterman_closed(m, a, b):+.12f}")

# Mod 27 only four distinct summands occur in Kl(1, 1).
census = summand_census(PrimePowerModulus(3, 3), 1, 1)
print("mod-27 summand census:", census.counts)

# Half of the classes a mod p give a zero sum; their paths return to 0.
for p, n, a, b in [(3, 8, 1, 1), (3, 8, 5, 1), (5, 6, 1, 1), (5, 6, 2, 1)]:
    path = path_vertices(PrimePowerModulus(p, n), a, b)
    name = out / f"path_{p}^{n}_{a}_{b}.svg"
    name.write_bytes(export_path(path, "svg"))
    print(f"{name}: {len(path)} vertices, endpoint {path.endpoint:.6f}")

# Grouping the p terms x + k p^(n-1) keeps only x with x^2 = b/a mod p.
m = PrimePowerModulus(5, 6)
r = rearranged_vertices(m, 9, 1)
name = out / "rearranged_5^6_9_1.svg"
name.write_bytes(export_path(r, "svg"))
print(f"{name}: {len(r)} vertices, endpoint {r.endpoint:.6f} vs {kloosterman_closed(m, 9, 1):.6f}")
