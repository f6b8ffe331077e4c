"""Compiled SSP-RK3 loop for polynomial fluxes.

Mirrors ``SemiDiscretization.rhs_array`` + ``timestep.ssp_rk3_step`` on a
flattened (2, N, k+1) state; the tests check that both paths agree.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _csr_matvec(indptr, indices, data, x, out):
    for i in range(out.size):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc


@numba.njit(cache=True)
def _polyval(coeffs, u):
    acc = 0.0
    for p in range(coeffs.size - 1, -1, -1):
        acc = acc * u + coeffs[p]
    return acc


@numba.njit(cache=True)
def _two_point(coeffs, ul, ur):
    # sum_p c_p / (p + 1) * sum_{r=0}^{p} ul^r ur^(p - r)
    total = 0.0
    for p in range(coeffs.size):
        if coeffs[p] != 0.0:
            s = 0.0
            for r in range(p + 1):
                s += ul**r * ur ** (p - r)
            total += coeffs[p] / (p + 1) * s
    return total


@numba.njit(cache=True)
def _subtract_convection(x, out, ncells, nb, interp, wgrad, left_vals, right_vals,
                         coeffs, inv_mass, trace_l, trace_r, fhat):
    nq = interp.shape[1]
    for j in range(ncells):
        base = j * nb
        tl = 0.0
        tr = 0.0
        for i in range(nb):
            tl += x[base + i] * left_vals[i]
            tr += x[base + i] * right_vals[i]
        trace_l[j] = tl
        trace_r[j] = tr
    for j in range(ncells):
        fhat[j] = _two_point(coeffs, trace_r[j - 1 if j > 0 else ncells - 1], trace_l[j])
    for j in range(ncells):
        base = j * nb
        jr = j + 1 if j + 1 < ncells else 0
        for q in range(nq):
            uq = 0.0
            for i in range(nb):
                uq += x[base + i] * interp[i, q]
            fq = _polyval(coeffs, uq)
            for i in range(nb):
                out[base + i] += inv_mass[j] * fq * wgrad[q, i]
        for i in range(nb):
            out[base + i] -= inv_mass[j] * (fhat[jr] * right_vals[i] - fhat[j] * left_vals[i])


@numba.njit(cache=True)
def _rhs(x, out, indptr, indices, data, nonlinear, ncells, nb, interp, wgrad,
         left_vals, right_vals, coeffs, inv_mass, trace_l, trace_r, fhat):
    _csr_matvec(indptr, indices, data, x, out)
    if nonlinear:
        _subtract_convection(x, out, ncells, nb, interp, wgrad, left_vals, right_vals,
                             coeffs, inv_mass, trace_l, trace_r, fhat)


@numba.njit(cache=True)
def rk3_run(x, dt, t_final, nsteps, energy_every, half_h, indptr, indices, data,
            nonlinear, ncells, nb, interp, wgrad, left_vals, right_vals, coeffs, inv_mass):
    """Advance ``x`` in place; return (records, nrecords, failed_step).

    Each record row is (t, ||u||^2, ||phi||^2); failed_step is -1 on success.
    """
    size = x.size
    half = ncells * nb
    k1 = np.empty(size)
    u1 = np.empty(size)
    u2 = np.empty(size)
    trace_l = np.empty(ncells)
    trace_r = np.empty(ncells)
    fhat = np.empty(ncells)
    nrec_max = nsteps // energy_every + 2
    records = np.empty((nrec_max, 3))
    nrec = 0

    t = 0.0
    for n in range(nsteps + 1):
        if n > 0:
            h = dt if n < nsteps else t_final - (nsteps - 1) * dt
            _rhs(x, k1, indptr, indices, data, nonlinear, ncells, nb, interp, wgrad,
                 left_vals, right_vals, coeffs, inv_mass, trace_l, trace_r, fhat)
            for i in range(size):
                u1[i] = x[i] + h * k1[i]
            _rhs(u1, k1, indptr, indices, data, nonlinear, ncells, nb, interp, wgrad,
                 left_vals, right_vals, coeffs, inv_mass, trace_l, trace_r, fhat)
            for i in range(size):
                u2[i] = 0.75 * x[i] + 0.25 * u1[i] + 0.25 * h * k1[i]
            _rhs(u2, k1, indptr, indices, data, nonlinear, ncells, nb, interp, wgrad,
                 left_vals, right_vals, coeffs, inv_mass, trace_l, trace_r, fhat)
            finite = True
            for i in range(size):
                x[i] = (1.0 / 3.0) * x[i] + (2.0 / 3.0) * u2[i] + (2.0 / 3.0) * h * k1[i]
                if not np.isfinite(x[i]):
                    finite = False
            t = n * dt if n < nsteps else t_final
            if not finite:
                return records, nrec, n
        if n % energy_every == 0 or n == nsteps:
            eu = 0.0
            ep = 0.0
            for j in range(ncells):
                for i in range(nb):
                    eu += half_h[j] * x[j * nb + i] ** 2
                    ep += half_h[j] * x[half + j * nb + i] ** 2
            records[nrec, 0] = t
            records[nrec, 1] = eu
            records[nrec, 2] = ep
            nrec += 1
    return records, nrec, -1
