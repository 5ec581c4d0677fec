"""Pointwise escape-product kernels (pure-Python reference backend).

The two routines below are the hot per-point computations everything else
builds on: iterate a point of C^2 into the forward (resp. backward) escape
domain while propagating the 2x2 complex Jacobian, then accumulate the
truncated telescoping product for log phi+ (resp. log phi-) together with
its holomorphic gradient.

To avoid overflowing doubles (iterates grow like |x|^(d^k)) the product
phase works entirely in the bounded reciprocal variables

    plus side:   u_j = 1/x_j,        w_j = y_j / x_j        (|w| < 1 on V+)
    minus side:  v_j = 1/y_{-j},     t_j = x_{-j} / y_{-j}  (|t| < 1 on V-)

whose recursions only involve the factor terms s_j themselves:

    s_j  = sum_i q_i u^(d-i) - a w u^(d-1),   u <- u^d/(1+s),  w <- u^(d-1)/(1+s)
    s_j- = sum_i q_i v^(d-i) - t v^(d-1),     v <- a v^d/(1+s), t <- a v^(d-1)/(1+s)

The compiled backend in _fastkernel.pyx is a line-for-line transliteration
of this file; tests assert the two agree to the last few ulps.
"""

import cmath

OVERFLOW_CAP = 1e150

# status codes
OK = 0
NO_ESCAPE = 1
OVERFLOW = 2


def horner(coeffs, z):
    acc = 0j
    for i in range(len(coeffs) - 1, -1, -1):
        acc = acc * z + coeffs[i]
    return acc


def horner_deriv(coeffs, z):
    acc = 0j
    for i in range(len(coeffs) - 1, 0, -1):
        acc = acc * z + i * coeffs[i]
    return acc


def phi_plus_eval(coeffs, a, x, y, K, alpha, cap):
    """log phi+ with gradient at (x, y).

    coeffs: coefficients of the monic p, lowest degree first (len d+1).
    Returns (status, k, logphi, dlog_dx, dlog_dy, smax) where
    logphi = d^-k * Log(phi+(f^k(x,y))) with principal Log, k the first
    entry time into V+ = {|x| > |y|, |x| > alpha}, and smax the largest
    |s_j| met in the product (callers assert smax < r).
    """
    d = len(coeffs) - 1
    safe = OVERFLOW_CAP ** (1.0 / d)
    jxx, jxy, jyx, jyy = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    k = 0
    while not (abs(x) > abs(y) and abs(x) > alpha):
        if k >= cap:
            return (NO_ESCAPE, k, 0j, 0j, 0j, 0.0)
        if abs(x) > safe or abs(y) > safe:
            return (OVERFLOW, k, 0j, 0j, 0j, 0.0)
        px = horner(coeffs, x)
        dpx = horner_deriv(coeffs, x)
        njxx = dpx * jxx - a * jyx
        njxy = dpx * jxy - a * jyy
        jyx, jyy = jxx, jxy
        jxx, jxy = njxx, njxy
        x, y = px - a * y, x
        k += 1

    u = 1.0 / x
    w = y * u
    uu = u * u
    gux, guy = -jxx * uu, -jxy * uu
    gwx = (jyx * x - y * jxx) * uu
    gwy = (jyy * x - y * jxy) * uu
    glx, gly = jxx * u, jxy * u  # gradient of Log x_k
    logsum = 0j
    smax = 0.0
    dj = 1
    for _ in range(K):
        dj *= d
        # acc = sum_i q_i u^(d-1-i), acc2 = sum_i (d-i) q_i u^(d-1-i)
        acc = 0j
        acc2 = 0j
        for i in range(d):
            acc = acc * u + coeffs[i]
            acc2 = acc2 * u + (d - i) * coeffs[i]
        u_dm2 = u ** (d - 2)
        u_dm1 = u_dm2 * u
        s = u * acc - a * w * u_dm1
        dsdu = acc2 - a * w * (d - 1) * u_dm2
        dsdw = -a * u_dm1
        gsx = dsdu * gux + dsdw * gwx
        gsy = dsdu * guy + dsdw * gwy
        t = 1.0 + s
        ms = abs(s)
        if ms > smax:
            smax = ms
        logsum += cmath.log(t) / dj
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
        gux, guy, gwx, gwy = ngux, nguy, ngwx, ngwy

    phi_w = x * cmath.exp(logsum)
    dk = d**k
    logphi = cmath.log(phi_w) / dk
    return (OK, k, logphi, glx / dk, gly / dk, smax)


def phi_minus_eval(coeffs, a, x, y, K, alpha, cap):
    """log phi- with gradient at (x, y); requires a != 0.

    Returns (status, m, logphi, dlog_dx, dlog_dy, smax) with
    logphi = d^-m * (e_m Log(a) + Log(phi-(f^-m(x,y)))), e_m = (d^m-1)/(d-1),
    m the first entry time into V- = {|y| > |x|, |y| > alpha}.
    """
    d = len(coeffs) - 1
    safe = OVERFLOW_CAP ** (1.0 / d)
    inv_a = 1.0 / a
    jxx, jxy, jyx, jyy = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    m = 0
    while not (abs(y) > abs(x) and abs(y) > alpha):
        if m >= cap:
            return (NO_ESCAPE, m, 0j, 0j, 0j, 0.0)
        if abs(x) > safe or abs(y) > safe:
            return (OVERFLOW, m, 0j, 0j, 0j, 0.0)
        py = horner(coeffs, y)
        dpy = horner_deriv(coeffs, y)
        njxx, njxy = jyx, jyy
        njyx = (dpy * jyx - jxx) * inv_a
        njyy = (dpy * jyy - jxy) * inv_a
        x, y = y, (py - x) * inv_a
        jxx, jxy, jyx, jyy = njxx, njxy, njyx, njyy
        m += 1

    v = 1.0 / y
    t = x * v
    vv = v * v
    gvx, gvy = -jyx * vv, -jyy * vv
    gtx = (jxx * y - x * jyx) * vv
    gty = (jxy * y - x * jyy) * vv
    glx, gly = jyx * v, jyy * v  # gradient of Log y_-m
    logsum = 0j
    smax = 0.0
    dj = 1
    for _ in range(K):
        dj *= d
        acc = 0j
        acc2 = 0j
        for i in range(d):
            acc = acc * v + coeffs[i]
            acc2 = acc2 * v + (d - i) * coeffs[i]
        v_dm2 = v ** (d - 2)
        v_dm1 = v_dm2 * v
        s = v * acc - t * v_dm1
        dsdv = acc2 - t * (d - 1) * v_dm2
        dsdt = -v_dm1
        gsx = dsdv * gvx + dsdt * gtx
        gsy = dsdv * gvy + dsdt * gty
        tau = 1.0 + s
        ms = abs(s)
        if ms > smax:
            smax = ms
        logsum += cmath.log(tau) / dj
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
        gvx, gvy, gtx, gty = ngvx, ngvy, ngtx, ngty

    phi_w = y * cmath.exp(logsum)
    dm = d**m
    em = (dm - 1) // (d - 1)
    logphi = (em * cmath.log(a) + cmath.log(phi_w)) / dm
    return (OK, m, logphi, glx / dm, gly / dm, smax)
