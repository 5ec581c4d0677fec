"""Escape functions phi+/- with certified truncation tails, and Green's functions.

phi+ is computed on V+ by the telescoping product

    phi+(x, y) = x * prod_{k>=1} (1 + s_k)^(1/d^k),
    s_k = (q(x_{k-1}) - a*y_{k-1}) / x_{k-1}^d,   |s_k| < r,

and extended to all of U+ through phi+^(d^k) = phi+ ∘ f^k: the value at z is
the principal d^k-th root of phi+(f^k(z)) for the first k with f^k(z) in V+.
The minus side mirrors this with backward iterates and picks up Jacobian
powers: phi-^(d^m)(z) = a^(e_m) * phi-(f^(-m)(z)) with e_m = 1+d+...+d^(m-1);
everything is carried in log space so the a^(e_m) factors never underflow.

At a = 0 the minus function has the closed form phi- = (p(y) - x)^(1/d).

Green's functions: g+ = log|phi+| on the escape side, 0 on K+;
g- = log|phi-| on the escape side, log|a|/(d-1) on K-.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import _kernel as kernel
from .dynamics import DomainParams, HenonMap, Point
from .errors import CoordinateOverflow, NotInEscapeRegion, OnDegenerateCurve

DEFAULT_TOL = 1e-12
DEFAULT_CAP = 200


@dataclass(frozen=True)
class EscapeValue:
    value: complex
    log_value: complex
    truncation_terms: int  # K, number of product factors
    tail_bound: float  # certified bound on |log error|
    depth: int  # iterates used to reach V+/V-
    side: str  # "plus" | "minus"
    smax: float  # largest |s_k| seen (always < r)


@dataclass(frozen=True)
class GreenValue:
    value: float
    side: str
    interior_flag: bool  # point classified in K+/K- (cap-based)
    cap: int = DEFAULT_CAP


def truncation_K(d: int, r: float, tol: float) -> int:
    """Factors needed so the geometric log-tail is below tol."""
    K = math.ceil(math.log(-math.log(1.0 - r) / ((1.0 - 1.0 / d) * tol), d))
    return max(K, 1)


def tail_bound(d: int, r: float, K: int) -> float:
    return -math.log(1.0 - r) / (d**K * (d - 1))


def default_domain(henon: HenonMap) -> DomainParams:
    dp = getattr(henon, "_default_domain", None)
    if dp is None:
        dp = henon.domain_params()
        henon._default_domain = dp
    return dp


def _run_plus(henon, z, tol, dp, cap, alpha=None):
    d = henon.degree
    K = truncation_K(d, dp.r, tol)
    status, k, logphi, glx, gly, smax = kernel.phi_plus_eval(
        henon.p.coefficients,
        henon.a,
        complex(z[0]),
        complex(z[1]),
        K,
        dp.alpha if alpha is None else alpha,
        cap,
    )
    if status == kernel.NO_ESCAPE:
        raise NotInEscapeRegion(f"no forward iterate entered V+ within {cap} steps")
    if status == kernel.OVERFLOW:
        raise CoordinateOverflow("overflow before reaching V+")
    assert smax < dp.r, f"product factor |s| = {smax} >= r = {dp.r}"
    ev = EscapeValue(
        value=cmath.exp(logphi),
        log_value=logphi,
        truncation_terms=K,
        tail_bound=tail_bound(d, dp.r, K),
        depth=k,
        side="plus",
        smax=smax,
    )
    return ev, (glx, gly)


def _run_minus(henon, z, tol, dp, cap, alpha=None):
    d = henon.degree
    if henon.a == 0:
        v = henon.p(complex(z[1])) - complex(z[0])
        if v == 0:
            raise OnDegenerateCurve("a = 0 and p(y) = x")
        logphi = cmath.log(v) / d
        grad = (-1.0 / (d * v), henon.p.derivative(complex(z[1])) / (d * v))
        ev = EscapeValue(
            value=cmath.exp(logphi),
            log_value=logphi,
            truncation_terms=0,
            tail_bound=0.0,
            depth=0,
            side="minus",
            smax=0.0,
        )
        return ev, grad
    K = truncation_K(d, dp.r, tol)
    status, m, logphi, glx, gly, smax = kernel.phi_minus_eval(
        henon.p.coefficients,
        henon.a,
        complex(z[0]),
        complex(z[1]),
        K,
        dp.alpha if alpha is None else alpha,
        cap,
    )
    if status == kernel.NO_ESCAPE:
        raise NotInEscapeRegion(f"no backward iterate entered V- within {cap} steps")
    if status == kernel.OVERFLOW:
        raise CoordinateOverflow("overflow before reaching V-")
    assert smax < dp.r, f"product factor |s| = {smax} >= r = {dp.r}"
    ev = EscapeValue(
        value=cmath.exp(logphi),
        log_value=logphi,
        truncation_terms=K,
        tail_bound=tail_bound(d, dp.r, K),
        depth=m,
        side="minus",
        smax=smax,
    )
    return ev, (glx, gly)


def phi_plus(
    henon: HenonMap,
    z: Point,
    tol: float = DEFAULT_TOL,
    dp: DomainParams | None = None,
    cap: int = DEFAULT_CAP,
) -> EscapeValue:
    dp = dp or default_domain(henon)
    return _run_plus(henon, z, tol, dp, cap)[0]


def phi_minus(
    henon: HenonMap,
    z: Point,
    tol: float = DEFAULT_TOL,
    dp: DomainParams | None = None,
    cap: int = DEFAULT_CAP,
) -> EscapeValue:
    dp = dp or default_domain(henon)
    return _run_minus(henon, z, tol, dp, cap)[0]


def phi_with_gradient(
    henon: HenonMap,
    z: Point,
    side: str,
    tol: float = DEFAULT_TOL,
    dp: DomainParams | None = None,
    cap: int = DEFAULT_CAP,
    alpha: float | None = None,
):
    """(EscapeValue, gradient of log phi w.r.t. (x, y)), forward-mode exact.

    `alpha` overrides the V+/V- entry threshold (the locus code pushes
    deeper, to 2*alpha, before trusting leaf geometry).
    """
    dp = dp or default_domain(henon)
    if side == "plus":
        return _run_plus(henon, z, tol, dp, cap, alpha=alpha)
    if side == "minus":
        return _run_minus(henon, z, tol, dp, cap, alpha=alpha)
    raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")


def green(
    henon: HenonMap,
    z: Point,
    side: str,
    tol: float = 1e-9,
    dp: DomainParams | None = None,
    cap: int = DEFAULT_CAP,
) -> GreenValue:
    """g+ or g-; bounded-orbit points are classified by the iteration cap."""
    dp = dp or default_domain(henon)
    if side == "plus":
        try:
            ev = phi_plus(henon, z, tol, dp, cap)
        except NotInEscapeRegion:
            return GreenValue(0.0, "plus", True, cap)
        return GreenValue(ev.log_value.real, "plus", False, cap)
    if side == "minus":
        if henon.a == 0:
            v = henon.p(complex(z[1])) - complex(z[0])
            if v == 0:
                return GreenValue(float("-inf"), "minus", True, cap)
            return GreenValue(math.log(abs(v)) / henon.degree, "minus", False, cap)
        try:
            ev = phi_minus(henon, z, tol, dp, cap)
        except NotInEscapeRegion:
            constant = math.log(abs(henon.a)) / (henon.degree - 1)
            return GreenValue(constant, "minus", True, cap)
        return GreenValue(ev.log_value.real, "minus", False, cap)
    raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
