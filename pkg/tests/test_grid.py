import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from doublephase.grid import (BumpSpec, DomainError, DomainSpec, build_grid, bump_integral,
                              diff_matrix, grad_split, integrate, make_bump, partial,
                              partial_transpose, random_bumps)


def box(res, n=1, m=2):
    return build_grid(DomainSpec.box(n, m, resolution=res))


def test_default_grid_size_and_volume(grid17):
    assert grid17.size == 4913
    assert grid17.shape == (17, 17, 17)
    assert grid17.weights.sum() == pytest.approx(8.0, rel=1e-14)
    assert grid17.axis_names == ("x1", "y1", "y2")


def test_grid_arrays_are_read_only(grid9):
    with pytest.raises(ValueError):
        grid9.weights[0, 0, 0] = 1.0


def test_rejects_asymmetric_x_interval():
    spec = DomainSpec(2, 1, ((0.5, 1.0), (-1.0, 1.0), (-1.0, 1.0)), (9, 9, 9))
    with pytest.raises(DomainError, match="contain 0"):
        build_grid(spec)


def test_rejects_two_dimensions():
    with pytest.raises(DomainError, match="empty"):
        build_grid(DomainSpec.box(1, 1, resolution=9))


def test_rejects_too_few_nodes():
    with pytest.raises(DomainError):
        build_grid(DomainSpec.box(1, 2, resolution=4))


def test_x_equals_zero_layer_present_for_odd_symmetric(grid17):
    assert np.any(grid17.axes[0] == 0.0)
    assert np.all(grid17.x_weight(0.5)[8] == 0.0)


def test_integrate_constant(grid17):
    assert integrate(np.ones(grid17.shape), grid17) == pytest.approx(8.0, rel=1e-14)


def test_integrate_square_trapezoid_error(grid17):
    # the trapezoid rule on x^2 over (-1, 1) overshoots 2/3 by exactly h^2/3
    h = grid17.spacing[0]
    got = integrate(grid17.coords[0] ** 2, grid17)
    assert got == pytest.approx(4 * (2 / 3 + h * h / 3), rel=1e-13)
    err17 = abs(got - 8 / 3)
    g33 = box(33)
    err33 = abs(integrate(g33.coords[0] ** 2, g33) - 8 / 3)
    assert np.log2(err17 / err33) == pytest.approx(2.0, abs=1e-9)


def test_integrate_exact_on_per_axis_affine(grid9):
    x, y1, y2 = grid9.coords
    f = (1 + 2 * x) * (3 - y1) * (0.5 + y2)
    assert integrate(f, grid9) == pytest.approx(12.0, rel=1e-12)


def test_diff_matrix_matches_numpy_gradient():
    rng = np.random.default_rng(0)
    v = rng.normal(size=11)
    h = 0.3
    np.testing.assert_allclose(diff_matrix(11, h) @ v, np.gradient(v, h, edge_order=2),
                               rtol=1e-13, atol=1e-13)


def test_partial_transpose_is_adjoint(grid9):
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=grid9.shape), rng.normal(size=grid9.shape)
    for k in range(3):
        lhs = np.sum(partial(a, grid9, k) * b)
        rhs = np.sum(a * partial_transpose(b, grid9, k))
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_gradient_of_linear_field(grid17):
    g = grad_split(grid17.coords[0], grid17)
    np.testing.assert_allclose(g.gx[0], 1.0, rtol=0, atol=1e-12)
    np.testing.assert_allclose(g.gy, 0.0, rtol=0, atol=1e-12)
    assert g.gx.shape == (1, 17, 17, 17) and g.gy.shape == (2, 17, 17, 17)


def test_gradient_of_quadratic_is_exact(grid17):
    y1 = grid17.coords[1]
    g = grad_split(y1 ** 2, grid17)
    np.testing.assert_allclose(g.gy[0], 2 * y1, rtol=0, atol=1e-12)


def _grad_error(res):
    g = box(res)
    x, y1, y2 = g.coords
    d = grad_split(np.sin(x) * np.cos(y1), g)
    err = max(np.abs(d.gx[0] - np.cos(x) * np.cos(y1)).max(),
              np.abs(d.gy[0] + np.sin(x) * np.sin(y1)).max(),
              np.abs(d.gy[1]).max())
    return err


def test_gradient_second_order():
    order = np.log2(_grad_error(17) / _grad_error(33))
    assert order >= 1.9


def test_bump_center_and_outside(grid17):
    u = make_bump(grid17, (0.0, 0.0, 0.0), (0.5, 0.5, 0.5), 1.7)
    assert u[8, 8, 8] == pytest.approx(1.7, rel=1e-15)
    outside = (np.abs(grid17.coords[0]) >= 0.5)
    assert np.all(u[outside] == 0.0)
    assert np.all(u >= 0)


def test_bump_rejects_support_touching_boundary(grid17):
    with pytest.raises(ValueError):
        make_bump(grid17, (0.5, 0.0, 0.0), (0.5, 0.3, 0.3))


def test_bump_integral_closed_form_and_refinement():
    spec = BumpSpec((0.1, -0.2, 0.15), (0.6, 0.5, 0.7), 1.3)
    exact = bump_integral(spec)
    assert exact == pytest.approx(1.3 * 0.6 * 0.5 * 0.7)
    errs = []
    for res in (17, 33):
        g = box(res)
        errs.append(abs(integrate(make_bump(g, spec.center, spec.radii, spec.amplitude), g)
                        - exact) / exact)
    assert errs[0] < 0.05
    assert errs[1] < errs[0]


def test_bump_integral_shrinks_with_support(grid17):
    big = integrate(make_bump(grid17, (0, 0, 0), (0.8, 0.8, 0.8)), grid17)
    small = integrate(make_bump(grid17, (0, 0, 0), (0.4, 0.4, 0.4)), grid17)
    assert 0 < small < big


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_bumps_vanish_on_boundary(seed):
    g = box(9)
    for b in random_bumps(np.random.default_rng(seed), 5, g.spec):
        u = make_bump(g, b.center, b.radii, b.amplitude)
        assert np.all(u[g.boundary] == 0.0)
        assert u.max() > 0
