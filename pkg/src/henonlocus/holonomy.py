"""Normalized escape coordinates psi+/-, leaf membership, and monodromy.

psi+ is phi+ itself; psi- is eta * phi- with eta^(d-1) = 1/a (principal
branch, fixed once per map), which turns the Jacobian-weighted recursion
of phi- into the clean psi- o f^(-1) = psi-^d.

Two points of the plus escape region lie on the same leaf of the plus
foliation iff psi+(z1)/psi+(z2) is a d^n-th root of unity for some n --
a branch-independent criterion, since different determinations of psi+
differ by exactly such roots.  The witness returned is the nearest root
(smallest n first).  The minus side is symmetric.

The monodromy of a primary component H_c is realized concretely: in the
psi+ coordinate, which identifies H_c with the outside of the closed unit
disk, holonomy along plus-foliation leaves acts by z -> omega z with
omega^(d^n) = 1.  monodromy_orbit materializes the orbit of a point by
theta-continuation along H_c (each orbit point re-certified on the locus
by the tangency condition).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional

from .dynamics import HenonMap, Point
from .errors import ContinuationFailure, DegenerateJacobian, NewtonDivergence
from .escape import phi_minus, phi_plus, phi_with_gradient
from .locus import _locus_newton_2d


@dataclass(frozen=True)
class PsiPair:
    psi_plus: complex
    psi_minus: complex
    eta: complex  # eta^(d-1) = 1/a, principal branch


@dataclass(frozen=True)
class RootOfUnityWitness:
    omega: complex
    order_exponent: int  # omega^(d^order_exponent) = 1


def eta_constant(henon: HenonMap) -> complex:
    """Principal a^(-1/(d-1)); undefined at a = 0."""
    if henon.a == 0:
        raise DegenerateJacobian("eta = a^(-1/(d-1)) undefined at a = 0")
    return cmath.exp(-cmath.log(henon.a) / (henon.degree - 1))


def psi_pair(henon: HenonMap, z: Point, tol: float = 1e-12) -> PsiPair:
    """Both normalized coordinates at z (escape errors propagate)."""
    eta = eta_constant(henon)
    plus = phi_plus(henon, z, tol).value
    minus = eta * phi_minus(henon, z, tol).value
    return PsiPair(psi_plus=plus, psi_minus=minus, eta=eta)


def _nearest_root_witness(
    ratio: complex, d: int, tol: float, max_exponent: int
) -> Optional[RootOfUnityWitness]:
    if abs(abs(ratio) - 1.0) > tol:
        return None
    turns = cmath.phase(ratio) / (2.0 * math.pi)
    for n in range(max_exponent + 1):
        order = d**n
        k = round(turns * order)
        omega = cmath.exp(2j * math.pi * k / order)
        if abs(ratio - omega) < tol:
            return RootOfUnityWitness(omega=omega, order_exponent=n)
    return None


def same_leaf_plus(
    henon: HenonMap,
    z1: Point,
    z2: Point,
    tol: float = 1e-6,
    max_exponent: int = 8,
) -> Optional[RootOfUnityWitness]:
    """Witness that z1, z2 share a plus-foliation leaf, or None.

    The psi+ ratio is branch-independent as a member of the root-of-unity
    group, so the kernel's principal determinations suffice; the witness
    is the nearest d^n-th root (n minimal, capped)."""
    ratio = phi_plus(henon, z1).value / phi_plus(henon, z2).value
    return _nearest_root_witness(ratio, henon.degree, tol, max_exponent)


def same_leaf_minus(
    henon: HenonMap,
    z1: Point,
    z2: Point,
    tol: float = 1e-6,
    max_exponent: int = 8,
) -> Optional[RootOfUnityWitness]:
    """Minus-side twin of same_leaf_plus (eta cancels from the ratio)."""
    ratio = phi_minus(henon, z1).value / phi_minus(henon, z2).value
    return _nearest_root_witness(ratio, henon.degree, tol, max_exponent)


def monodromy_orbit(
    henon: HenonMap,
    c: complex,
    z: Point,
    n: int,
    tol: float = 1e-11,
) -> List[Point]:
    """The d^n monodromy translates of z on the component through c.

    Continuation moves the psi+ coordinate around the circle through
    psi+(z); the orbit collects the points over omega * psi+(z) for all
    omega with omega^(d^n) = 1, each corrected back onto the locus (the
    2-D Newton enforces the tangency condition, so every returned point
    is certified on the component).  The orbit starts at z itself.
    """
    if n < 0:
        raise ValueError("monodromy exponent must be >= 0")
    z = Point(complex(z[0]), complex(z[1]))
    if n == 0:
        return [z]
    base = phi_plus(henon, z)
    if abs(base.value) <= 1.0:
        raise ValueError("need |psi+(z)| > 1 on the component")
    count = henon.degree**n
    sub = max(8, 64 // count)  # continuation steps between orbit points
    steps = count * sub
    depth = base.depth + 1  # frozen V+ iterate for the branch-free target

    orbit = [z]
    x, y = z.x, z.y
    for j in range(1, steps + 1):
        log_target = base.log_value + 2j * math.pi * j / steps
        try:
            x, y, _ = _locus_newton_2d(henon, x, y, log_target, depth, tol=tol)
        except NewtonDivergence as err:
            raise ContinuationFailure(
                f"monodromy continuation failed at step {j}/{steps}: {err}"
            ) from err
        if j % sub == 0 and j < steps:
            orbit.append(Point(x, y))
    closure = abs(x - z.x) + abs(y - z.y)
    if closure > 1e-8:
        raise ContinuationFailure(
            f"orbit continuation did not close up (gap {closure:.3e})"
        )
    return orbit
