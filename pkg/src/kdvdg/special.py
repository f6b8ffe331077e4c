"""Complete elliptic integral K(m) and Jacobi elliptic functions via the AGM.

``m`` is the parameter (the squared modulus), as in the cnoidal-wave literature.
"""

from __future__ import annotations

import numpy as np

AGM_RTOL = 1.0e-16
AGM_MAXITER = 40


def _check_parameter(m: float) -> None:
    if not 0.0 <= m < 1.0:
        raise ValueError(f"elliptic parameter must lie in [0, 1), got {m}")


def _agm_sequence(m: float):
    a, b, c = [1.0], [np.sqrt(1.0 - m)], [np.sqrt(m)]
    for _ in range(AGM_MAXITER):
        if abs(a[-1] - b[-1]) <= AGM_RTOL * a[-1]:
            break
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(np.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    return a, b, c


def elliptic_K(m: float) -> float:
    """Complete elliptic integral of the first kind, K(m) = pi / (2 AGM(1, sqrt(1 - m)))."""
    _check_parameter(m)
    a, _, _ = _agm_sequence(m)
    return float(np.pi / (2.0 * a[-1]))


def jacobi_sn_cn_dn(z, m: float):
    """Return (sn, cn, dn)(z | m) by the descending Landen / AGM scheme.

    See DLMF 22.20(ii): phi_N = 2^N a_N z, then
    phi_{n-1} = (phi_n + arcsin(c_n / a_n * sin(phi_n))) / 2 and the amplitude is phi_0.
    """
    _check_parameter(m)
    z = np.asarray(z, dtype=float)
    a, _, c = _agm_sequence(m)
    n = len(a) - 1

    phi = 2.0**n * a[n] * z
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))

    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn > 0 for m < 1
    dn = np.sqrt(1.0 - m * sn * sn)
    return sn, cn, dn


def jacobi_cn(z, m: float):
    return jacobi_sn_cn_dn(z, m)[1]


def jacobi_sn(z, m: float):
    return jacobi_sn_cn_dn(z, m)[0]
