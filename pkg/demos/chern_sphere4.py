"""Curvature route in four dimensions.

S^4 is covered by two hemispherical charts split at theta1 = pi/2; each
chart is a 24^4 cell-centered grid. The density now contracts two copies of
the field strength, so this run takes a little while on one core.
"""

import time

from gbctopo import presets
from gbctopo.density import chart_density, coefficient_k, integrate_chart, normalization

c = normalization(4)
print(f"calibrated constants for n=4: sign {c.sign:+d}, wedge divisor {c.divisor:g}")
for n in (2, 4, 6, 8):
    print(f"  k^{n} = n!!/(n-1)!! = {coefficient_k(n) ** n:.12f}")

for name in ("sphere4", "product_s2s2"):
    m = presets.get_manifold(name)
    t0 = time.perf_counter()
    parts = [integrate_chart(chart_density(m.immersion, ch)) for ch in m.charts]
    print(f"{name}: charts {[round(p, 5) for p in parts]} -> chi = {sum(parts):.5f} "
          f"(exact {m.chi}, {time.perf_counter() - t0:.0f} s)")
