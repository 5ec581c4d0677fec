# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled escape-product kernels.

Line-for-line transliteration of reference.py with static C types; see
that module for the derivation of the reciprocal-variable recursions.
The only intentional differences are mechanical: coefficients are copied
into a C array, and integer powers d^k are accumulated in doubles (exact
for every power of two and for any d^k below 2^53, which covers all
entry depths the escape iteration can produce without overflowing).
"""

from libc.stdlib cimport free, malloc

cdef extern from "complex.h" nogil:
    double complex clog(double complex z)
    double complex cexp(double complex z)
    double cabs(double complex z)

DEF OVERFLOW_CAP = 1e150

OK = 0
NO_ESCAPE = 1
OVERFLOW = 2


cdef inline double complex zpown(double complex z, int n):
    # binary powering, matching CPython's complex ** int
    cdef double complex r = 1.0
    while n > 0:
        if n & 1:
            r = r * z
        z = z * z
        n >>= 1
    return r


cdef inline double complex chorner(double complex* c, int n, double complex z):
    cdef double complex acc = 0
    cdef int i
    for i in range(n - 1, -1, -1):
        acc = acc * z + c[i]
    return acc


cdef inline double complex chorner_deriv(double complex* c, int n, double complex z):
    cdef double complex acc = 0
    cdef int i
    for i in range(n - 1, 0, -1):
        acc = acc * z + i * c[i]
    return acc


def phi_plus_eval(coeffs, double complex a, double complex x, double complex y,
                  int K, double alpha, int cap):
    """log phi+ with gradient at (x, y); same contract as the reference."""
    cdef int n = len(coeffs)
    cdef int d = n - 1
    cdef double safe = OVERFLOW_CAP ** (1.0 / d)
    cdef double complex* c = <double complex*> malloc(n * sizeof(double complex))
    if c == NULL:
        raise MemoryError()
    cdef int i, j, k = 0
    cdef double complex jxx = 1.0, jxy = 0, jyx = 0, jyy = 1.0
    cdef double complex px, dpx, njxx, njxy, nx
    cdef double complex u, w, uu, gux, guy, gwx, gwy, glx, gly, logsum
    cdef double complex acc, acc2, u_dm2, u_dm1, u_d, s, dsdu, dsdw
    cdef double complex gsx, gsy, t, inv_t, ngux, nguy, ngwx, ngwy, phi_w, logphi
    cdef double smax = 0.0, ms, dj, dk
    try:
        for i in range(n):
            c[i] = coeffs[i]
        while not (cabs(x) > cabs(y) and cabs(x) > alpha):
            if k >= cap:
                return (NO_ESCAPE, k, 0j, 0j, 0j, 0.0)
            if cabs(x) > safe or cabs(y) > safe:
                return (OVERFLOW, k, 0j, 0j, 0j, 0.0)
            px = chorner(c, n, x)
            dpx = chorner_deriv(c, n, x)
            njxx = dpx * jxx - a * jyx
            njxy = dpx * jxy - a * jyy
            jyx = jxx
            jyy = jxy
            jxx = njxx
            jxy = njxy
            nx = px - a * y
            y = x
            x = nx
            k += 1

        u = 1.0 / x
        w = y * u
        uu = u * u
        gux = -jxx * uu
        guy = -jxy * uu
        gwx = (jyx * x - y * jxx) * uu
        gwy = (jyy * x - y * jxy) * uu
        glx = jxx * u
        gly = jxy * u
        logsum = 0
        dj = 1.0
        for j in range(K):
            dj *= d
            acc = 0
            acc2 = 0
            for i in range(d):
                acc = acc * u + c[i]
                acc2 = acc2 * u + (d - i) * c[i]
            u_dm2 = zpown(u, d - 2)
            u_dm1 = u_dm2 * u
            s = u * acc - a * w * u_dm1
            dsdu = acc2 - a * w * (d - 1) * u_dm2
            dsdw = -a * u_dm1
            gsx = dsdu * gux + dsdw * gwx
            gsy = dsdu * guy + dsdw * gwy
            t = 1.0 + s
            ms = cabs(s)
            if ms > smax:
                smax = ms
            logsum += clog(t) / dj
            glx += gsx / (t * dj)
            gly += gsy / (t * dj)
            u_d = u_dm1 * u
            inv_t = 1.0 / t
            ngux = (d * u_dm1 * gux - u_d * gsx * inv_t) * inv_t
            nguy = (d * u_dm1 * guy - u_d * gsy * inv_t) * inv_t
            ngwx = ((d - 1) * u_dm2 * gux - u_dm1 * gsx * inv_t) * inv_t
            ngwy = ((d - 1) * u_dm2 * guy - u_dm1 * gsy * inv_t) * inv_t
            u = u_d * inv_t
            w = u_dm1 * inv_t
            gux = ngux
            guy = nguy
            gwx = ngwx
            gwy = ngwy

        phi_w = x * cexp(logsum)
        dk = 1.0
        for j in range(k):
            dk *= d
        logphi = clog(phi_w) / dk
        return (OK, k, logphi, glx / dk, gly / dk, smax)
    finally:
        free(c)


def phi_minus_eval(coeffs, double complex a, double complex x, double complex y,
                   int K, double alpha, int cap):
    """log phi- with gradient at (x, y); same contract as the reference."""
    cdef int n = len(coeffs)
    cdef int d = n - 1
    cdef double safe = OVERFLOW_CAP ** (1.0 / d)
    cdef double complex inv_a = 1.0 / a
    cdef double complex* c = <double complex*> malloc(n * sizeof(double complex))
    if c == NULL:
        raise MemoryError()
    cdef int i, j, m = 0
    cdef double complex jxx = 1.0, jxy = 0, jyx = 0, jyy = 1.0
    cdef double complex py, dpy, njxx, njxy, njyx, njyy, ny
    cdef double complex v, t, vv, gvx, gvy, gtx, gty, glx, gly, logsum
    cdef double complex acc, acc2, v_dm2, v_dm1, v_d, s, dsdv, dsdt
    cdef double complex gsx, gsy, tau, inv_tau, ngvx, ngvy, ngtx, ngty, phi_w, logphi
    cdef double smax = 0.0, ms, dj, dm, em
    try:
        for i in range(n):
            c[i] = coeffs[i]
        while not (cabs(y) > cabs(x) and cabs(y) > alpha):
            if m >= cap:
                return (NO_ESCAPE, m, 0j, 0j, 0j, 0.0)
            if cabs(x) > safe or cabs(y) > safe:
                return (OVERFLOW, m, 0j, 0j, 0j, 0.0)
            py = chorner(c, n, y)
            dpy = chorner_deriv(c, n, y)
            njxx = jyx
            njxy = jyy
            njyx = (dpy * jyx - jxx) * inv_a
            njyy = (dpy * jyy - jxy) * inv_a
            ny = (py - x) * inv_a
            x = y
            y = ny
            jxx = njxx
            jxy = njxy
            jyx = njyx
            jyy = njyy
            m += 1

        v = 1.0 / y
        t = x * v
        vv = v * v
        gvx = -jyx * vv
        gvy = -jyy * vv
        gtx = (jxx * y - x * jyx) * vv
        gty = (jxy * y - x * jyy) * vv
        glx = jyx * v
        gly = jyy * v
        logsum = 0
        dj = 1.0
        for j in range(K):
            dj *= d
            acc = 0
            acc2 = 0
            for i in range(d):
                acc = acc * v + c[i]
                acc2 = acc2 * v + (d - i) * c[i]
            v_dm2 = zpown(v, d - 2)
            v_dm1 = v_dm2 * v
            s = v * acc - t * v_dm1
            dsdv = acc2 - t * (d - 1) * v_dm2
            dsdt = -v_dm1
            gsx = dsdv * gvx + dsdt * gtx
            gsy = dsdv * gvy + dsdt * gty
            tau = 1.0 + s
            ms = cabs(s)
            if ms > smax:
                smax = ms
            logsum += clog(tau) / dj
            glx += gsx / (tau * dj)
            gly += gsy / (tau * dj)
            v_d = v_dm1 * v
            inv_tau = 1.0 / tau
            ngvx = a * (d * v_dm1 * gvx - v_d * gsx * inv_tau) * inv_tau
            ngvy = a * (d * v_dm1 * gvy - v_d * gsy * inv_tau) * inv_tau
            ngtx = a * ((d - 1) * v_dm2 * gvx - v_dm1 * gsx * inv_tau) * inv_tau
            ngty = a * ((d - 1) * v_dm2 * gvy - v_dm1 * gsy * inv_tau) * inv_tau
            v = a * v_d * inv_tau
            t = a * v_dm1 * inv_tau
            gvx = ngvx
            gvy = ngvy
            gtx = ngtx
            gty = ngty

        phi_w = y * cexp(logsum)
        dm = 1.0
        em = 0.0
        for j in range(m):
            em = em * d + 1.0
            dm *= d
        logphi = (em * clog(a) + clog(phi_w)) / dm
        return (OK, m, logphi, glx / dm, gly / dm, smax)
    finally:
        free(c)
