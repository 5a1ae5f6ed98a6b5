"""Morse route: critical points of a height function.

chi = sum beta (-1)^lambda, where lambda counts negative Hessian eigenvalues.
The same sum is cross-checked as sum beta sgn det H. A degenerate point
(the monkey saddle) is reported with its winding charge instead.
"""

import sympy as sp

from gbctopo import ChartSpec, presets
from gbctopo.fields import sympy_scalar_field
from gbctopo.morse import critical_points, euler_morse

for name in presets.MANIFOLDS:
    m = presets.get_manifold(name)
    pts = []
    for f in m.scalar_fields():
        pts += critical_points(f, m.immersion)
    rep = euler_morse(pts)
    print(f"{name:13s} lambda {sorted(c.lam for c in pts)} -> chi = {rep.chi} ({rep.formula})")

x, y = sp.symbols("x y", real=True)
box = ChartSpec(2, [(-2, 2), (-1, 1)], (64, 32))
rep = euler_morse(critical_points(sympy_scalar_field((x**2 - 1)**2 + y**2, (x, y), box)))
print(f"double well on a box: {[(tuple(round(v, 3) for v in r['p']), r['lambda']) for r in rep.table()]}"
      f" -> {rep.chi}")

disk = ChartSpec(2, [(-1, 1), (-1, 1)], (64, 64))
pts = critical_points(sympy_scalar_field(x**3 - 3 * x * y**2, (x, y), disk))
rep = euler_morse(pts, allow_degenerate=True)
print(f"monkey saddle: degenerate={pts[0].degenerate}, W={pts[0].W}, sum={rep.chi} ({rep.formula})")
