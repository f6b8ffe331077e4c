import numpy as np
import pytest
import scipy.special

from kdvdg.special import elliptic_K, jacobi_cn, jacobi_sn, jacobi_sn_cn_dn


def agm_oracle(m):
    """Plain AGM, written independently: K = pi / (2 AGM(1, sqrt(1 - m)))."""
    a, b = 1.0, np.sqrt(1.0 - m)
    for _ in range(60):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return np.pi / (2 * a)


@pytest.mark.parametrize("m,value", [(0.0, 1.5707963268), (0.5, 1.8540746773), (0.9, 2.5780921133)])
def test_elliptic_K_values(m, value):
    assert elliptic_K(m) == pytest.approx(value, abs=1e-10)
    assert elliptic_K(m) == pytest.approx(agm_oracle(m), abs=1e-13)


def test_elliptic_K_against_scipy():
    for m in np.linspace(0, 0.999, 40):
        assert elliptic_K(m) == pytest.approx(scipy.special.ellipk(m), rel=1e-14)


@pytest.mark.parametrize("m", [-0.1, 1.0, 1.5])
def test_elliptic_K_domain(m):
    with pytest.raises(ValueError):
        elliptic_K(m)


def test_cn_special_points():
    for m in (0.0, 0.3, 0.9):
        assert jacobi_cn(0.0, m) == pytest.approx(1.0)
        assert abs(jacobi_cn(elliptic_K(m), m)) < 1e-12
    assert jacobi_cn(0.5, 0.0) == pytest.approx(0.8775825619, abs=1e-10)
    assert jacobi_sn(0.5, 0.0) == pytest.approx(np.sin(0.5), abs=1e-14)


@pytest.mark.parametrize("m", [0.0, 0.1, 0.5, 0.9, 0.99])
def test_jacobi_against_scipy(m):
    z = np.linspace(-12, 12, 301)
    sn, cn, dn = jacobi_sn_cn_dn(z, m)
    ref = scipy.special.ellipj(z, m)
    np.testing.assert_allclose(sn, ref[0], atol=1e-12)
    np.testing.assert_allclose(cn, ref[1], atol=1e-12)
    np.testing.assert_allclose(dn, ref[2], atol=1e-12)


def test_identities():
    z = np.linspace(0, 5, 50)
    sn, cn, dn = jacobi_sn_cn_dn(z, 0.9)
    np.testing.assert_allclose(sn**2 + cn**2, 1.0, atol=1e-14)
    np.testing.assert_allclose(dn**2 + 0.9 * sn**2, 1.0, atol=1e-14)
