import numpy as np
import pytest
from conftest import cosine, dense_l2_error, sine

from kdvdg import field as dgf
from kdvdg.field import DGField, StatePair
from kdvdg.mesh import perturbed_mesh, uniform_mesh


def orders(errors):
    e = np.asarray(errors)
    return np.log2(e[:-1] / e[1:])


def test_constant_reproduced(mesh12):
    f = dgf.l2_project(lambda x: np.ones_like(x), mesh12, 3)
    x = np.linspace(0, 1, 37)
    np.testing.assert_allclose(dgf.evaluate(f, x), 1.0, atol=1e-14)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_projection_identity_on_polynomials(k):
    mesh = perturbed_mesh(5, 0.2, 1)
    coeffs = np.random.default_rng(k).normal(size=k + 1)

    def g(x):
        return np.polynomial.polynomial.polyval(x, coeffs)

    f = dgf.l2_project(g, mesh, k)
    x = mesh.to_physical(np.linspace(-0.9, 0.9, k + 3)).ravel()
    np.testing.assert_allclose(dgf.evaluate(f, x), g(x), atol=1e-13)


def test_l2_projection_order():
    errs = [dense_l2_error(dgf.l2_project(sine, uniform_mesh(n), 2), sine) for n in (10, 20, 40)]
    np.testing.assert_allclose(orders(errs), 3.0, atol=0.1)
    f = dgf.l2_project(sine, uniform_mesh(10), 2)
    assert dgf.l2_error(f, sine) == pytest.approx(dense_l2_error(f, sine), rel=1e-6)


def test_traces_of_constant(mesh12):
    tr = dgf.traces(DGField(mesh12, np.tile([2.5 * np.sqrt(2), 0, 0], (12, 1))))
    np.testing.assert_allclose(tr.jump[0], 0.0, atol=1e-14)
    np.testing.assert_allclose(tr.mean[0], 2.5)
    np.testing.assert_allclose(tr.minus[1:], 0.0, atol=1e-14)


def test_two_cell_traces_and_wrap():
    s2 = np.sqrt(2.0)
    f = DGField(uniform_mesh(2), np.array([[s2, 0, 0], [3 * s2, 0, 0]]))
    tr = dgf.traces(f)
    # interface 1 sits at x = 0.5 between cells 0 and 1
    assert tr.minus[0, 1] == pytest.approx(1.0)
    assert tr.plus[0, 1] == pytest.approx(3.0)
    assert tr.jump[0, 1] == pytest.approx(2.0)
    assert tr.mean[0, 1] == pytest.approx(2.0)
    # interface 0 is x = 0 ~ x = 1: last cell on the left, first on the right
    assert tr.minus[0, 0] == pytest.approx(3.0)
    assert tr.plus[0, 0] == pytest.approx(1.0)


def test_trace_derivatives_match_function():
    mesh = perturbed_mesh(9, 0.1, 2)
    f = dgf.gauss_radau_project("-", sine, mesh, 4)
    tr = dgf.traces(f)
    x = mesh.nodes[:-1]
    for d in range(3):
        np.testing.assert_allclose(tr.minus[d], sine(x, d), rtol=1e-10, atol=1e-10)


def test_evaluate_left_limit_and_periodic_zero():
    s2 = np.sqrt(2.0)
    f = DGField(uniform_mesh(2), np.array([[s2, 0, 0], [3 * s2, 0, 0]]))
    assert dgf.evaluate(f, 0.5) == pytest.approx(1.0)
    assert dgf.evaluate(f, 0.0) == pytest.approx(3.0)
    assert dgf.evaluate(f, 1.0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        dgf.evaluate(f, 1.5)


def test_sample_layout():
    mesh = uniform_mesh(4)
    f = dgf.l2_project(lambda x: x, mesh, 2)
    x, u = dgf.sample(f)
    assert x.shape == u.shape == (4 * dgf.SNAPSHOT_POINTS,)
    np.testing.assert_allclose(u, x, atol=1e-14)


@pytest.mark.parametrize("sign", ["+", "-"])
@pytest.mark.parametrize("k", [2, 3, 4])
def test_gauss_radau_exact_on_polynomials(sign, k):
    mesh = perturbed_mesh(6, 0.1, k)
    c = np.arange(1.0, k + 2)

    def g(x, d=0):
        return np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(c, d))

    f = dgf.gauss_radau_project(sign, g, mesh, k)
    np.testing.assert_allclose(f.coeffs, dgf.l2_project(g, mesh, k).coeffs, atol=1e-11)


def test_gauss_radau_boundary_conditions():
    mesh = perturbed_mesh(10, 0.1, 4)
    f = dgf.gauss_radau_project("-", sine, mesh, 3)
    tr = dgf.traces(f)
    right = np.roll(mesh.nodes[:-1], -1)
    for d in range(3):
        # right end of cell j = interface j+1
        vals = np.roll(tr.minus[d], -1)
        np.testing.assert_allclose(vals, sine(right % 1.0, d), atol=1e-12 * (2 * np.pi) ** d)


def test_gauss_radau_order():
    errs = [dense_l2_error(dgf.gauss_radau_project("+", sine, uniform_mesh(n), 2), sine)
            for n in (10, 20, 40)]
    assert orders(errs)[-1] == pytest.approx(3.0, abs=0.15)


def test_gauss_radau_rejects():
    with pytest.raises(ValueError):
        dgf.gauss_radau_project("+", sine, uniform_mesh(4), 1)
    with pytest.raises(ValueError):
        dgf.gauss_radau_project("x", sine, uniform_mesh(4), 2)


def test_coupled_exact_on_vh():
    mesh = perturbed_mesh(7, 0.1, 0)
    c = [0.3, -1.0, 2.0]

    def g(x, d=0):
        return np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(c, d))

    u, phi = dgf.coupled_project(g, lambda x, d=0: 0.0 * x, mesh, 2)
    np.testing.assert_allclose(u.coeffs, dgf.l2_project(g, mesh, 2).coeffs, atol=1e-12)
    np.testing.assert_allclose(phi.coeffs, 0.0, atol=1e-12)


def test_coupled_interface_conditions():
    from kdvdg.harness import coupled_projection_residuals

    mesh = uniform_mesh(20)
    zero = lambda x, d=0: 0.0 * x  # noqa: E731
    assert coupled_projection_residuals(sine, zero, mesh, 2) <= 1e-12 * (2 * np.pi) ** 2


@pytest.mark.parametrize("k", [2, 3])
def test_coupled_order(k):
    eu, ep = [], []
    for n in (10, 20, 40):
        u, phi = dgf.coupled_project(sine, cosine, perturbed_mesh(n, 0.1, n), k)
        eu.append(dense_l2_error(u, sine))
        ep.append(dense_l2_error(phi, cosine))
    assert orders(eu)[-1] >= k + 0.7
    assert orders(ep)[-1] >= k + 0.7


def test_norms_and_energy(rng):
    mesh = perturbed_mesh(8, 0.1, 1)
    assert dgf.l2_norm(DGField.zeros(mesh, 2)) == 0.0
    one = dgf.l2_project(lambda x: np.ones_like(x), mesh, 2)
    assert dgf.l2_norm(one) == pytest.approx(1.0)
    assert dgf.energy(StatePair(one, DGField.zeros(mesh, 2))) == pytest.approx(1.0)
    u = DGField(mesh, rng.normal(size=(8, 3)))
    assert dgf.energy(StatePair(u, u)) == pytest.approx(2 * dgf.l2_norm(u) ** 2)
    # quadrature oracle for ||u||^2 + ||phi||^2
    phi = DGField(mesh, rng.normal(size=(8, 3)))
    zero = lambda x: 0.0 * x  # noqa: E731
    quad = dense_l2_error(u, zero) ** 2 + dense_l2_error(phi, zero) ** 2
    assert dgf.energy(StatePair(u, phi)) == pytest.approx(quad, rel=1e-12)


def test_projection_is_best_approximation(rng):
    mesh = perturbed_mesh(6, 0.1, 9)
    best = dgf.l2_error(dgf.l2_project(sine, mesh, 2, npoints=10), sine, npoints=10)
    for _ in range(20):
        other = DGField(mesh, dgf.l2_project(sine, mesh, 2).coeffs + 0.05 * rng.normal(size=(6, 3)))
        assert best <= dgf.l2_error(other, sine, npoints=10)


def test_field_arithmetic(rng):
    mesh = uniform_mesh(3)
    a = DGField(mesh, rng.normal(size=(3, 3)))
    b = DGField(mesh, rng.normal(size=(3, 3)))
    np.testing.assert_allclose((a + b - b).coeffs, a.coeffs)
    np.testing.assert_allclose((2.0 * a).coeffs, (-(-a) * 2.0).coeffs)
    s = StatePair(a, b)
    np.testing.assert_allclose(StatePair.from_array(mesh, s.as_array()).phi.coeffs, b.coeffs)
    np.testing.assert_allclose((s + 3.0 * s).as_array(), 4.0 * s.as_array())
