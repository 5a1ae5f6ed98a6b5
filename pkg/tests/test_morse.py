import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from gbctopo import ChartSpec, presets
from gbctopo.errors import DegenerateCritical
from gbctopo.fields import sympy_scalar_field
from gbctopo.morse import critical_points, euler_morse, morse_index
from gbctopo.runs import random_rotations

x, y = sp.symbols("x y", real=True)


def test_morse_index_counts_negative_eigenvalues():
    assert morse_index(np.diag([1.0, 2.0])) == 0
    assert morse_index(np.diag([-1.0, 2.0])) == 1
    assert morse_index(-np.eye(3)) == 3
    with pytest.raises(DegenerateCritical):
        morse_index(np.diag([1.0, 0.0]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 10) | st.floats(-10, -0.1), min_size=2, max_size=5),
       st.integers(0, 2**32 - 1))
def test_morse_index_is_rotation_invariant(evals, seed):
    Q = random_rotations(np.random.default_rng(seed), 1, len(evals))[0]
    H = Q @ np.diag(evals) @ Q.T
    assert morse_index(H) == sum(e < 0 for e in evals)


def test_double_well():
    chart = ChartSpec(2, [(-2.0, 2.0), (-1.0, 1.0)], (64, 32))
    f = sympy_scalar_field((x**2 - 1)**2 + y**2, (x, y), chart)
    pts = critical_points(f)
    assert [(round(c.p[0], 8), c.lam) for c in pts] == [(-1.0, 0), (0.0, 1), (1.0, 0)]
    rep = euler_morse(pts)
    assert rep.chi == rep.chi_hessian_sign == 1 and rep.formula == "classical"


def test_fd_and_analytic_hessians_agree():
    chart = ChartSpec(2, [(-2.0, 2.0), (-1.0, 1.0)], (64, 32))
    f = sympy_scalar_field((x**2 - 1)**2 + y**2 + 0.3 * x * y, (x, y), chart)
    for a, b in zip(critical_points(f), critical_points(f, analytic_hessian=True)):
        np.testing.assert_allclose(a.hessian, b.hessian, atol=1e-6)
        assert a.lam == b.lam


def test_monkey_saddle_is_degenerate():
    chart = ChartSpec(2, [(-1.0, 1.0), (-1.0, 1.0)], (64, 64))
    f = sympy_scalar_field(x**3 - 3 * x * y**2, (x, y), chart)
    pts = critical_points(f)
    assert len(pts) == 1 and pts[0].degenerate and pts[0].W == -2 and pts[0].beta == 2
    with pytest.raises(DegenerateCritical):
        euler_morse(pts)
    rep = euler_morse(pts, allow_degenerate=True)
    assert rep.chi == -2 and rep.formula == "not applicable"


@pytest.mark.parametrize("name", list(presets.MANIFOLDS))
def test_morse_route_and_sign_identity(name):
    m = presets.get_manifold(name)
    pts = []
    for f in m.scalar_fields():
        pts += critical_points(f, m.immersion)
    rep = euler_morse(pts)
    assert rep.chi == m.chi
    for c in pts:
        # Jacobian of the frame-component gradient vs Hessian of f by second differences
        assert np.sign(c.det_jacobian) == np.sign(np.linalg.det(c.hessian))
        assert c.W == (-1) ** c.lam
