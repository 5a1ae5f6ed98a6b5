"""The GBC density as a delta function on the zeros of phi.

rho_eps = delta_eps(phi) det(d phi/d u) with a Gaussian delta of width eps.
Its integral counts zeros with sign, whatever the width, as long as the
Gaussians fit inside the chart.
"""

import sympy as sp

from gbctopo import ChartSpec
from gbctopo.density import integrate_delta_density
from gbctopo.fields import sympy_vector_field

x, y = sp.symbols("x y", real=True)
chart = ChartSpec(2, [(-1, 1), (-1, 1)], (512, 512))
h = float(chart.spacing[0])
cases = {
    "one vortex": [x - 0.1 + 0.3 * y**2, y + 0.2 - 0.2 * x**3 + 0.1 * x],
    "vortex pair": [x**2 - 0.09, y - 0.1 * x],
    "z^2": [(x - 0.1)**2 - (y + 0.05)**2, 2 * (x - 0.1) * (y + 0.05)],
}
for label, exprs in cases.items():
    q = integrate_delta_density(sympy_vector_field(exprs, (x, y), chart), chart, 2 * h)
    print(f"{label:12s} integral at eps = 2h: {q:+.8f}")

print("\nzero near the edge: the error is the Gaussian mass outside the chart")
edge = sympy_vector_field([x - 0.7 + 0.3 * y**2, y + 0.2 - 0.2 * x**3 + 0.1 * x], (x, y), chart)
eps = 0.4
while eps >= 2 * h * (1 - 1e-12):
    print(f"  eps = {eps:.4f}  error = {abs(integrate_delta_density(edge, chart, eps) - 1):.2e}")
    eps /= 2
