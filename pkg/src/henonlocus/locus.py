"""Foliation tangency, locus tracing, contact order, and classification.

The two escape foliations are the level sets of log phi+ and log phi-.
Their tangency locus is the zero set of the gradient determinant

    T = (d/dx log phi+)(d/dy log phi-) - (d/dx log phi-)(d/dy log phi+),

which is well defined on U+ n U- (the gradients kill the d^k-th-root
branch ambiguity of phi+/-) and holomorphic in (x, y).  The reported
value is normalized by the real factor d * |x| * |p(y) - x|, which makes
it O(p'(y)) near the locus: at a = 0 the normalized value is exactly a
unit multiple of p'(y), so the zero set is y = critical points of p.

Tracing follows the component through a critical point c by continuation
in t = log x with Newton correction in y, confined to the tube
|y - c| < tube_radius.  Certification routines check the contact order
of the two foliations along the component (two everywhere on it) and
that phi+ restricted to the component winds exactly once around every
circle |phi+| = rho, i.e. the component is a punctured-disk graph.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .dynamics import HenonMap, Point, Polynomial
from .errors import (
    ContinuationFailure,
    LeafParameterizationFailed,
    LeftTube,
    NewtonDivergence,
    NotClassified,
    NotSimpleCritical,
)
from .escape import default_domain, phi_with_gradient

NEWTON_TOL = 1e-10
DEPTH_FACTOR = 2.0  # push V+/V- entry past 2*alpha before trusting leaves
FD_STEP = 1e-6


@dataclass(frozen=True)
class TangencyValue:
    value: complex  # normalized determinant (det * scale)
    n: int  # forward depth used for phi+
    m: int  # backward depth used for phi-
    scale: float  # d * |x| * |p(y) - x|
    det: complex  # raw (holomorphic) determinant


@dataclass(frozen=True)
class TraceSample:
    point: Point
    tangency: TangencyValue
    residual: float


@dataclass(frozen=True)
class CurveTrace:
    critical_point: complex
    iterate_index: int
    chart: str  # "standard" (x, y) or "u-chart" (1/x, y)
    samples: Tuple[TraceSample, ...]
    tube_radius: float
    step: float


@dataclass(frozen=True)
class TangentAtInfinity:
    c: complex
    slope: complex  # dy/du at u = 0 along the component


@dataclass(frozen=True)
class RadiusReport:
    radius: float
    winding: int
    closure_error: float
    min_separation: float
    n_theta: int
    ok: bool


@dataclass(frozen=True)
class BiholomorphismReport:
    critical_point: complex
    items: Tuple[RadiusReport, ...]
    ok: bool


def tube_radius(p: Polynomial) -> float:
    """Half the minimum distance between distinct critical points of p,
    with floor 0.25 (and 0.25 outright when there is only one)."""
    crits = p.critical_points()
    if len(crits) < 2:
        return 0.25
    gap = min(
        abs(c1 - c2) for i, c1 in enumerate(crits) for c2 in crits[:i]
    )
    return max(0.25, 0.5 * gap)


def tangency_value(
    henon: HenonMap,
    z: Point,
    tol: float = 1e-12,
    alpha_factor: float = DEPTH_FACTOR,
) -> TangencyValue:
    """Normalized foliation-tangency determinant at z (must escape both ways).

    Depths are adaptive: iterates run until |x| (resp. |y|) clears
    alpha_factor * alpha, so the leaf geometry backing the gradients is the
    certified one.  Deterministic for fixed depths and truncation.
    """
    z = Point(complex(z[0]), complex(z[1]))
    dp = default_domain(henon)
    alpha = alpha_factor * dp.alpha
    evp, (g1x, g1y) = phi_with_gradient(henon, z, "plus", tol, dp, alpha=alpha)
    evm, (g2x, g2y) = phi_with_gradient(henon, z, "minus", tol, dp, alpha=alpha)
    det = g1x * g2y - g2x * g1y
    scale = henon.degree * abs(z.x) * abs(henon.p(z.y) - z.x)
    return TangencyValue(
        value=det * scale, n=evp.depth, m=evm.depth, scale=scale, det=det
    )


def _dvalue_dy(henon: HenonMap, x: complex, y: complex) -> complex:
    h = FD_STEP * max(1.0, abs(y))
    up = tangency_value(henon, Point(x, y + h)).det
    down = tangency_value(henon, Point(x, y - h)).det
    return (up - down) / (2.0 * h)


def locate_on_locus(
    henon: HenonMap,
    x: complex,
    y_seed: complex = 0.0,
    tol: float = NEWTON_TOL,
    max_iter: int = 16,
) -> Tuple[Point, TangencyValue]:
    """Newton in y at fixed x onto the tangency zero set.

    The raw determinant is holomorphic in y, so a central finite
    difference (cross-check for the forward-mode gradients, and the only
    place second derivatives are needed) drives the correction; the
    convergence test uses the normalized value.
    """
    y = complex(y_seed)
    for _ in range(max_iter):
        tv = tangency_value(henon, Point(x, y))
        if abs(tv.value) < tol:
            return Point(complex(x), y), tv
        deriv = _dvalue_dy(henon, x, y)
        if deriv == 0:
            raise NewtonDivergence(f"flat tangency derivative at x = {x}")
        y = y - tv.det / deriv
    tv = tangency_value(henon, Point(x, y))
    if abs(tv.value) < tol:
        return Point(complex(x), y), tv
    raise NewtonDivergence(
        f"|T| = {abs(tv.value):.3e} after {max_iter} iterations at x = {x}"
    )


def trace_primary_component(
    henon: HenonMap,
    c: complex,
    x_range: Tuple[float, float] = (10.0, 1e4),
    step: float = 0.1,
    tol: float = NEWTON_TOL,
    tube: float | None = None,
) -> CurveTrace:
    """Continuation of the component through critical point c along real x.

    Steps t = log x downward from the large-|x| end (where y ~ c seeds the
    corrector), halving the step on Newton failure.  Every accepted sample
    must stay in the tube |y - c| < tube, and |y - c| must be nonincreasing
    in |x| over the outermost decade; violations raise LeftTube with the
    offending sample attached.  Samples are returned ascending in |x|.
    """
    p = henon.p
    if abs(p.derivative(c)) > 1e-9:
        raise NotSimpleCritical(f"p'({c}) != 0")
    if abs(p.second_derivative(c)) < 1e-9:
        raise NotSimpleCritical(f"p''({c}) ~ 0")
    if tube is None:
        tube = tube_radius(p)
    x_lo, x_hi = sorted((float(x_range[0]), float(x_range[1])))
    t_lo, t_hi = math.log(x_lo), math.log(x_hi)

    samples: list[TraceSample] = []
    t = t_hi
    dt = step
    prev: tuple[float, complex] | None = None  # (t, y) one sample back
    prev2: tuple[float, complex] | None = None
    while True:
        x = cmath.exp(t) if isinstance(c, complex) and c.imag else math.exp(t)
        if prev is None:
            y_pred = complex(c)
        elif prev2 is None:
            y_pred = prev[1]
        else:
            slope = (prev[1] - prev2[1]) / (prev[0] - prev2[0])
            y_pred = prev[1] + slope * (t - prev[0])
        try:
            pt, tv = locate_on_locus(henon, x, y_pred, tol)
        except NewtonDivergence:
            if dt <= step / 64.0 or prev is None:
                raise
            dt *= 0.5
            t = max(prev[0] - dt, t_lo)
            continue
        sample = TraceSample(point=pt, tangency=tv, residual=abs(tv.value))
        if abs(pt.y - c) >= tube:
            raise LeftTube(
                f"|y - c| = {abs(pt.y - c):.3e} >= tube radius {tube}",
                sample=sample,
            )
        samples.append(sample)
        prev2, prev = prev, (t, pt.y)
        dt = min(step, dt * 2.0)
        if t <= t_lo + 1e-12:
            break
        t = max(t - dt, t_lo)

    samples.reverse()  # ascending |x|
    outer = [s for s in samples if abs(s.point.x) >= x_hi / 10.0]
    for s1, s2 in zip(outer, outer[1:]):
        if abs(s2.point.y - c) > abs(s1.point.y - c) + 1e-12:
            raise LeftTube(
                "|y - c| fails to decay over the outermost decade", sample=s2
            )
    return CurveTrace(
        critical_point=complex(c),
        iterate_index=0,
        chart="standard",
        samples=tuple(samples),
        tube_radius=tube,
        step=step,
    )


def tangent_at_infinity(
    henon: HenonMap,
    c: complex,
    u0: float = 1e-3,
    levels: int = 5,
    tol: float = 1e-11,
) -> TangentAtInfinity:
    """Slope dy/du of the component at u = 1/x = 0, by Richardson
    extrapolation of (y(1/u) - c)/u over u = u0, u0/2, u0/4, ..."""
    p = henon.p
    if abs(p.derivative(c)) > 1e-12:
        raise NotSimpleCritical(f"p'({c}) != 0")
    if abs(p.second_derivative(c)) < 1e-9:
        raise NotSimpleCritical(f"p''({c}) ~ 0")
    quotients: list[complex] = []
    y = complex(c)
    for j in range(levels):
        u = u0 * 0.5**j
        pt, _ = locate_on_locus(henon, 1.0 / u, y, tol)
        y = pt.y
        quotients.append((pt.y - c) / u)
    row = quotients
    for k in range(1, levels):
        row = [
            (2**k * row[i + 1] - row[i]) / (2**k - 1) for i in range(len(row) - 1)
        ]
    return TangentAtInfinity(c=complex(c), slope=row[0])


# --------------------------------------------------------------- leaf probes


def _iterate_with_jacobian(henon: HenonMap, z: Point, n: int):
    """(f^n(z), 2x2 Jacobian of f^n at z) by forward tangent propagation."""
    w = Point(complex(z[0]), complex(z[1]))
    j11, j12 = 1.0 + 0j, 0.0 + 0j  # d w.x / d(x, y)
    j21, j22 = 0.0 + 0j, 1.0 + 0j  # d w.y / d(x, y)
    for _ in range(n):
        dp = henon.p.derivative(w.x)
        j11, j12, j21, j22 = (
            dp * j11 - henon.a * j21,
            dp * j12 - henon.a * j22,
            j11,
            j12,
        )
        w = henon.apply(w)
    return w, (j11, j12, j21, j22)


def _iterate_with_x_derivative(
    henon: HenonMap, z: Point, n: int
) -> Tuple[Point, Tuple[complex, complex]]:
    """(f^n(z), d f^n(z)/dx) by forward tangent propagation."""
    w, (j11, _j12, j21, _j22) = _iterate_with_jacobian(henon, z, n)
    return w, (j11, j21)


def _leaf_depth(henon: HenonMap, z: Point, margin: float) -> int:
    """Smallest n with f^n(z) in V+ past the margin radius."""
    w = Point(complex(z[0]), complex(z[1]))
    for n in range(64):
        if abs(w.x) > max(margin, abs(w.y)):
            return n
        w = henon.apply(w)
    raise LeafParameterizationFailed("point does not reach V+ within 64 steps")


def _leaf_x(
    henon: HenonMap,
    x0: complex,
    y: complex,
    n: int,
    target: complex,
    tol: float = 1e-12,
    max_iter: int = 30,
) -> complex:
    """Solve phi+(f^n(x, y)) = target for x (Newton; all quantities are the
    single-valued V+ determinations, compared through exp so no branch of
    the logarithm ever enters)."""
    dp = default_domain(henon)
    x = complex(x0)
    for _ in range(max_iter):
        w, (dwx, dwy) = _iterate_with_x_derivative(henon, Point(x, y), n)
        ev, (glx, gly) = phi_with_gradient(henon, w, "plus", dp=dp)
        ratio = cmath.exp(ev.log_value - cmath.log(target))
        F = ratio - 1.0
        if abs(F) < tol:
            return x
        dF = ratio * (glx * dwx + gly * dwy)
        if dF == 0:
            raise LeafParameterizationFailed("leaf Newton hit a flat spot")
        x = x - F / dF
    raise LeafParameterizationFailed(f"leaf Newton stalled at |F| = {abs(F):.2e}")


def contact_order(
    henon: HenonMap,
    z: Point,
    tol: float = 1e-9,
    radius: float = 1e-2,
    n_samples: int = 16,
    max_order: int = 5,
) -> int:
    """Contact order of the two foliations at z (2 on the tangency locus,
    1 off it).

    The plus-leaf through z is parameterized over the circle
    y = z.y + radius*e^{i theta} by Newton in x on phi+ o f^n = const with a
    frozen depth n.  log phi- along the leaf is unwrapped (its branch jumps
    are multiples of 2 pi / d^m, far above the genuine variation) and its
    circle samples are Fourier-analyzed: the order is the lowest harmonic
    carrying more than 1% of the energy.
    """
    z = Point(complex(z[0]), complex(z[1]))
    dp = default_domain(henon)
    n = _leaf_depth(henon, z, DEPTH_FACTOR * dp.alpha)
    w, _ = _iterate_with_x_derivative(henon, z, n)
    base, _ = phi_with_gradient(henon, w, "plus", dp=dp)
    target = cmath.exp(base.log_value)

    mus: list[complex] = []
    x = z.x
    for j in range(n_samples):
        theta = 2.0 * math.pi * j / n_samples
        y = z.y + radius * cmath.exp(1j * theta)
        x = _leaf_x(henon, x, y, n, target)
        ev, _ = phi_with_gradient(henon, Point(x, y), "minus", dp=dp)
        mu = ev.log_value
        if mus:
            quantum = 2.0 * math.pi / henon.degree ** max(ev.depth, 1)
            jump = round((mu.imag - mus[-1].imag) / quantum)
            mu -= 1j * quantum * jump
        mus.append(mu)

    import numpy as np

    coeffs = np.fft.fft(np.array(mus)) / n_samples
    amps = [abs(coeffs[k]) for k in range(1, max_order + 1)]
    peak = max(amps)
    if peak < tol * max(1.0, abs(mus[0])):
        raise LeafParameterizationFailed("phi- is flat along the leaf probe")
    for k, amp in enumerate(amps, start=1):
        if amp > 0.01 * peak:
            return k
    raise LeafParameterizationFailed("no harmonic above threshold")


# --------------------------------------------------------- winding certificate


def _locus_newton_2d(
    henon: HenonMap,
    x: complex,
    y: complex,
    log_target: complex,
    depth: int,
    tol: float = 1e-11,
    max_iter: int = 25,
) -> Tuple[complex, complex, complex]:
    """Solve (phi+ = e^{log_target}, tangency = 0) jointly for (x, y).

    The phi+ condition is compared at the frozen iterate f^depth(x, y),
    which sits in V+ where exp(log phi+) is single valued; there it reads
    exp(log phi+(f^depth) - d^depth * log_target) - 1, branch-free because
    2 pi i jumps of the outer logarithm die under exp.  Returns
    (x, y, phi+ at the deep iterate)."""
    dp = default_domain(henon)
    deep_target = henon.degree**depth * log_target
    for _ in range(max_iter):
        w, (j11, j12, j21, j22) = _iterate_with_jacobian(henon, Point(x, y), depth)
        evp, (glx, gly) = phi_with_gradient(henon, w, "plus", dp=dp)
        if evp.depth != 0:
            raise NewtonDivergence("frozen iterate left V+")
        ratio = cmath.exp(evp.log_value - deep_target)
        tv = tangency_value(henon, Point(x, y))
        F1 = ratio - 1.0
        F2 = tv.det
        if abs(F1) < tol and abs(F2) * tv.scale < 10.0 * NEWTON_TOL:
            return x, y, cmath.exp(evp.log_value)
        a11 = ratio * (glx * j11 + gly * j21)
        a12 = ratio * (glx * j12 + gly * j22)
        h = FD_STEP * max(1.0, abs(x))
        a21 = (
            tangency_value(henon, Point(x + h, y)).det
            - tangency_value(henon, Point(x - h, y)).det
        ) / (2 * h)
        a22 = _dvalue_dy(henon, x, y)
        det = a11 * a22 - a12 * a21
        if det == 0:
            raise NewtonDivergence("singular Jacobian in 2-D locus Newton")
        x = x - (F1 * a22 - F2 * a12) / det
        y = y - (a11 * F2 - a21 * F1) / det
    raise NewtonDivergence(
        f"2-D Newton stalled: |F1| = {abs(F1):.2e}, |F2| = {abs(F2):.2e}"
    )


def verify_biholomorphism(
    henon: HenonMap,
    c: complex,
    radii: Sequence[float] = (2.0, 8.0, 32.0),
    n_theta: int = 64,
) -> BiholomorphismReport:
    """Certify that phi+ restricted to the component through c is a degree-one
    cover of each circle |phi+| = rho: continuation of phi+^{-1}(rho e^{i
    theta}) around the full circle must close up (< 1e-8), wind exactly once,
    and visit pairwise-distinct points."""
    items = []
    dp = default_domain(henon)
    for rho in radii:
        if rho <= 1.0:
            raise ValueError("radii must exceed 1")
        x, y = complex(rho), complex(c)
        seed, _ = phi_with_gradient(henon, Point(x, y), "plus", dp=dp)
        depth = seed.depth + 1  # margin: the frozen iterate stays deep in V+
        sheets = henon.degree**depth
        steps = max(n_theta, 8 * sheets)  # keep deep-value arg steps < pi/2
        points: list[Point] = []
        values: list[complex] = []
        for j in range(steps + 1):
            theta = 2.0 * math.pi * j / steps
            log_target = math.log(rho) + 1j * theta
            try:
                x, y, val = _locus_newton_2d(henon, x, y, log_target, depth)
            except NewtonDivergence as err:
                raise ContinuationFailure(
                    f"theta continuation failed at rho = {rho}, step {j}: {err}"
                ) from err
            points.append(Point(x, y))
            values.append(val)
        closure = abs(points[-1].x - points[0].x) + abs(points[-1].y - points[0].y)
        total = 0.0
        ok_steps = True
        for v1, v2 in zip(values, values[1:]):
            darg = cmath.phase(v2 / v1)
            if abs(darg) >= math.pi / 2:
                ok_steps = False
            total += darg
        # the deep value is phi+^(d^depth): divide its winding back down
        winding_deep = total / (2.0 * math.pi)
        winding = round(winding_deep / sheets)
        ok_steps = ok_steps and abs(winding_deep - round(winding_deep)) < 1e-6
        interior = points[:-1]
        min_sep = min(
            abs(p.x - q.x) + abs(p.y - q.y)
            for i, p in enumerate(interior)
            for q in interior[:i]
        )
        ok = (
            winding == 1
            and ok_steps
            and closure < 1e-8
            and min_sep > 0.0
        )
        items.append(
            RadiusReport(
                radius=rho,
                winding=winding,
                closure_error=closure,
                min_separation=min_sep,
                n_theta=steps,
                ok=ok,
            )
        )
    return BiholomorphismReport(
        critical_point=complex(c), items=tuple(items), ok=all(i.ok for i in items)
    )


# ------------------------------------------------------------- classification


def classify_component(
    henon: HenonMap,
    z: Point,
    max_k: int = 8,
    tube: float | None = None,
    x_min: float | None = None,
) -> Tuple[complex, int]:
    """(c, k) with f^k(z) inside the primary tube of critical point c
    (|y - c| < tube, |x| > x_min), searching k = 0, 1, -1, 2, -2, ..."""
    crits = henon.p.critical_points()
    dp = default_domain(henon)
    if tube is None:
        tube = tube_radius(henon.p)
    if x_min is None:
        x_min = DEPTH_FACTOR * dp.alpha

    def hit(w: Point):
        if abs(w.x) <= x_min:
            return None
        for c in crits:
            if abs(w.y - c) < tube:
                return c
        return None

    z = Point(complex(z[0]), complex(z[1]))
    forward, backward = z, z
    fwd_alive, bwd_alive = True, henon.a != 0
    for k in range(max_k + 1):
        if fwd_alive:
            c = hit(forward)
            if c is not None:
                return (c, k)
        if k and bwd_alive:
            c = hit(backward)
            if c is not None:
                return (c, -k)
        if fwd_alive:
            try:
                forward = henon.apply(forward)
            except OverflowError:
                fwd_alive = False
            if abs(forward.x) > 1e100 or abs(forward.y) > 1e100:
                fwd_alive = False
        if bwd_alive:
            try:
                backward = henon.apply_inverse(backward)
            except OverflowError:
                bwd_alive = False
            if abs(backward.x) > 1e100 or abs(backward.y) > 1e100:
                bwd_alive = False
    raise NotClassified(f"no iterate within |k| <= {max_k} entered a primary tube")


# ------------------------------------------------------------------- exports


def trace_to_json(trace: CurveTrace) -> str:
    blob = {
        "critical_point": [trace.critical_point.real, trace.critical_point.imag],
        "iterate_index": trace.iterate_index,
        "chart": trace.chart,
        "tube_radius": trace.tube_radius,
        "step": trace.step,
        "samples": [
            {
                "x": [s.point.x.real, s.point.x.imag],
                "y": [s.point.y.real, s.point.y.imag],
                "residual": s.residual,
                "n": s.tangency.n,
                "m": s.tangency.m,
                "value": [s.tangency.value.real, s.tangency.value.imag],
                "scale": s.tangency.scale,
            }
            for s in trace.samples
        ],
    }
    return json.dumps(blob, indent=2, sort_keys=True)


def trace_to_csv(trace: CurveTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["x_re", "x_im", "y_re", "y_im", "residual", "n", "m", "value_re",
         "value_im", "scale"]
    )
    for s in trace.samples:
        writer.writerow(
            [
                repr(s.point.x.real),
                repr(s.point.x.imag),
                repr(s.point.y.real),
                repr(s.point.y.imag),
                repr(s.residual),
                s.tangency.n,
                s.tangency.m,
                repr(s.tangency.value.real),
                repr(s.tangency.value.imag),
                repr(s.tangency.scale),
            ]
        )
    return buf.getvalue()


def to_u_chart(trace: CurveTrace) -> CurveTrace:
    """The same trace with first coordinate u = 1/x."""
    samples = tuple(
        TraceSample(
            point=Point(1.0 / s.point.x, s.point.y),
            tangency=s.tangency,
            residual=s.residual,
        )
        for s in trace.samples
    )
    return CurveTrace(
        critical_point=trace.critical_point,
        iterate_index=trace.iterate_index,
        chart="u-chart",
        samples=samples,
        tube_radius=trace.tube_radius,
        step=trace.step,
    )
