"""Index route: zeros of a tangent field and their charges.

Zeros are seeded from grid cells where every component changes sign, refined
by damped Newton, and charged with the Brouwer degree (regular zeros) or the
winding number of a small loop (degenerate zeros, n = 2).
"""

import sympy as sp

from gbctopo import ChartSpec, presets
from gbctopo.fields import sympy_vector_field
from gbctopo.zeros import find_zeros, classify_zeros, poincare_hopf

for name in presets.MANIFOLDS:
    m = presets.get_manifold(name)
    records = []
    for vf in m.vector_fields():
        records += classify_zeros(vf, find_zeros(vf))
    print(f"{name:13s} {vf.name:32s} charges {[r.W for r in records]} -> chi = "
          f"{poincare_hopf(records).chi}")

# degenerate zeros carry higher charge; a perturbation splits them
x, y = sp.symbols("x y", real=True)
disk = ChartSpec(2, [(-1, 1), (-1, 1)], (64, 64))
for label, exprs in (("z^2", [x**2 - y**2, 2 * x * y]),
                     ("z^2 - 0.01", [x**2 - y**2 - 0.01, 2 * x * y]),
                     ("conj(z)^3", [x**3 - 3 * x * y**2, -(3 * x**2 * y - y**3)])):
    f = sympy_vector_field(exprs, (x, y), disk)
    recs = classify_zeros(f, find_zeros(f))
    print(f"{label:11s} zeros {[tuple(round(c, 4) for c in r.z) for r in recs]} "
          f"W {[r.W for r in recs]} degenerate {[r.degenerate for r in recs]}")
