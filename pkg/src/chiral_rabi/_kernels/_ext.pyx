# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic complex Jacobi sweeps and continued fractions.

Both functions mirror ``_pure`` exactly in contract; see that module for
the reference (vectorised) formulation.
"""
import numpy as np

from libc.math cimport sqrt, fabs, hypot


cdef inline double _cabs(double complex z) nogil:
    return hypot(z.real, z.imag)


cdef double _offnorm(double complex[:, ::1] a) nogil:
    cdef Py_ssize_t n = a.shape[0], i, j
    cdef double acc = 0.0
    cdef double complex z
    for i in range(n):
        for j in range(n):
            if i != j:
                z = a[i, j]
                acc += z.real * z.real + z.imag * z.imag
    return sqrt(acc)


def jacobi_hermitian(double complex[:, ::1] a, double complex[:, ::1] v,
                     bint want_vectors, double tol, int max_sweeps):
    """Diagonalise the hermitian matrix ``a`` in place by cyclic Jacobi sweeps.

    Row-cyclic pair ordering; each pair (p, q) is annihilated by the exact
    unitary diagonalisation of its 2x2 hermitian block.  ``v`` accumulates
    the rotations when ``want_vectors`` is set.  Returns ``(sweeps, off)``
    where ``off`` is the final off-diagonal Frobenius norm; the caller
    decides whether ``off <= tol`` was reached.
    """
    cdef Py_ssize_t n = a.shape[0], p, q, k
    cdef int sweeps = 0
    cdef double off, skip, app, aqq, g, theta, t, c, s
    cdef double complex e, ec, akp, akq, vkp, vkq, nkp, nkq
    with nogil:
        off = _offnorm(a)
        skip = 1e-3 * tol / (n if n > 0 else 1)
        while off > tol and sweeps < max_sweeps:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    g = _cabs(a[p, q])
                    if g <= skip:
                        continue
                    app = a[p, p].real
                    aqq = a[q, q].real
                    e = a[p, q] / g
                    ec = e.conjugate()
                    theta = (aqq - app) / (2.0 * g)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    # G = [[c, s], [-s*conj(e), c*conj(e)]] on (p, q)
                    for k in range(n):
                        if k == p or k == q:
                            continue
                        akp = a[k, p]
                        akq = a[k, q]
                        nkp = c * akp - s * ec * akq
                        nkq = s * akp + c * ec * akq
                        a[k, p] = nkp
                        a[k, q] = nkq
                        a[p, k] = nkp.conjugate()
                        a[q, k] = nkq.conjugate()
                    a[p, p] = app - t * g
                    a[q, q] = aqq + t * g
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    if want_vectors:
                        for k in range(n):
                            vkp = v[k, p]
                            vkq = v[k, q]
                            v[k, p] = c * vkp - s * ec * vkq
                            v[k, q] = s * vkp + c * ec * vkq
            sweeps += 1
            off = _offnorm(a)
    return sweeps, off


cdef inline double _coef_a(long n, double e, double[::1] diag, long period,
                           double omega, double lam) nogil:
    return (n * omega + diag[n % period] - e) / (lam * (n + 1))


cdef inline double _tail(long m, long depth, double e, double[::1] diag,
                         long period, double omega, double lam) nogil:
    # S_D = 0, S_{n-1} = -B_n / (A_n + S_n) down to S_m
    cdef double s = 0.0
    cdef long n
    for n in range(depth, m, -1):
        s = -(1.0 / (n + 1)) / (_coef_a(n, e, diag, period, omega, lam) + s)
    return s


def cf_spectral(double[::1] energies, double[::1] diag, double omega, double lam,
                long m, long depth0, long depth_max, double tol):
    """Evaluate the m-th inverted spectral function on an energy grid.

    Returns arrays ``(F, S, P, converged)``: the function value
    ``A_m + S_m + B_m / T_m``, the backward continued fraction ``S_m``,
    the pole measure ``max(|S_m|, |B_m / T_m|)`` and a convergence flag.
    """
    cdef Py_ssize_t i, npts = energies.shape[0]
    cdef long period = diag.shape[0], depth, n
    cdef double e, prev, cur, t, am, bm, fwd
    F_arr = np.empty(npts)
    S_arr = np.empty(npts)
    P_arr = np.empty(npts)
    C_arr = np.zeros(npts, dtype=np.int8)
    cdef double[::1] F = F_arr
    cdef double[::1] S = S_arr
    cdef double[::1] P = P_arr
    cdef signed char[::1] C = C_arr
    with nogil:
        for i in range(npts):
            e = energies[i]
            depth = depth0
            prev = _tail(m, m + depth, e, diag, period, omega, lam)
            cur = prev
            while depth < depth_max:
                depth *= 2
                cur = _tail(m, m + depth, e, diag, period, omega, lam)
                if fabs(cur - prev) <= tol * (fabs(cur) if fabs(cur) > 1.0 else 1.0):
                    C[i] = 1
                    break
                prev = cur
            am = _coef_a(m, e, diag, period, omega, lam)
            fwd = 0.0
            if m > 0:
                t = -_coef_a(0, e, diag, period, omega, lam)
                for n in range(1, m):
                    t = -_coef_a(n, e, diag, period, omega, lam) - (1.0 / (n + 1)) / t
                bm = 1.0 / (m + 1)
                fwd = bm / t
            F[i] = am + cur + fwd
            S[i] = cur
            P[i] = fabs(cur) if fabs(cur) > fabs(fwd) else fabs(fwd)
    return F_arr, S_arr, P_arr, C_arr
