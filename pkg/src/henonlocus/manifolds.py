"""Local stable and unstable manifolds in block coordinates.

Near a Julia point z of p the plane carries chart coordinates
``(u, v) = (p^{-1}(x) taken near y, p(y) - x)`` which straighten the
degenerate dynamics: at a = 0 vertical lines ``u = const`` are the natural
stable slices and ``v = 0`` is the image curve x = p(y).  For small
Jacobians the local stable manifold through the orbit shadowing
z, p(z), p^2(z), ... is the graph of a holomorphic map from a v-disk to a
u-disk, obtained as the limit of preimages of a vertical slice pulled back
through the orbit; the unstable manifold over a prescribed backward
history is the limit of forward images of the horizontal slice v = 0.
Both limits are computed mesh-node by mesh-node (one scalar Newton solve
per node) and stored as Taylor polynomials recovered from circle samples.

``gradient_index`` counts the turning of the planar gradient of the
backward Green's function restricted to a stable graph along a parameter
circle |v| = const.  A single block contributes index one (the degenerate
model is log|v|/d); removing the forward images of the d preimage blocks
leaves a region of index 1 - d, which ``boundary_index`` verifies from
explicit hole loops.
"""

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import HenonMap, Point, Polynomial
from .errors import (
    GradientVanishesOnLoop,
    GraphTransformDiverged,
    NewtonDivergence,
    OutsideVPrime,
)
from .escape import green

DELTA = 0.05  # radius of the v-disk of a block
DISK_RADIUS = 0.05  # radius of the u-disk about a Julia point
SHRINK = 0.5  # graphs are sampled on this fraction of the disk radius
BETA = 0.8  # separation scale of the preimage branches of p near J(p)

_ROOT_TOL = 1e-14
_NODE_TOL = 1e-13

# Quadratic maps with an attracting (super)cycle, admitted without the
# critical-orbit certification pass: q-coefficients of x^2 and x^2 - 1.
_TAME_WHITELIST = {(0j, 0j), (-1 + 0j, 0j)}


@dataclass(frozen=True)
class UVPoint:
    u: complex
    v: complex


@dataclass(frozen=True)
class LocalManifold:
    side: str  # "stable" | "unstable"
    base: complex
    history: tuple  # forward orbit (stable) or given backward history (unstable)
    parameter_center: complex  # 0 for stable graphs, base for unstable ones
    radius: float  # parameter disk radius actually sampled
    delta: float
    disk_radius: float
    shrink: float
    nodes: tuple  # parameter values on the sampling circle
    values: tuple  # graph values at the nodes
    coefficients: tuple  # Taylor coefficients about parameter_center
    iterations: int  # pullback/pushforward depth actually used
    convergence: tuple  # sup-distances between successive depths

    def evaluate(self, param) -> complex:
        t = complex(param) - self.parameter_center
        acc = 0j
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc


def _root_near(p: Polynomial, target: complex, seed: complex) -> complex:
    """The preimage branch of `target` under p that Newton reaches from seed."""
    u = complex(seed)
    for _ in range(60):
        dp = p.derivative(u)
        if abs(dp) < 1e-12:
            raise NewtonDivergence("derivative of p vanished while inverting")
        step = (p(u) - target) / dp
        u -= step
        if abs(step) < _ROOT_TOL * max(1.0, abs(u)):
            return u
    raise NewtonDivergence("polynomial inversion did not converge")


def uv_coords(henon: HenonMap, z: Point, delta: float = DELTA, beta: float = BETA) -> UVPoint:
    """Block coordinates (u, v); requires |v| < delta and a branch near y."""
    x, y = complex(z[0]), complex(z[1])
    v = henon.p(y) - x
    if abs(v) >= delta:
        raise OutsideVPrime(f"|v| = {abs(v):.6g} is not below delta = {delta:.6g}")
    u = _root_near(henon.p, x, y)
    if abs(u - y) >= 0.5 * beta:
        raise OutsideVPrime(
            f"preimage branch is {abs(u - y):.6g} from y, past beta/2 = {0.5 * beta:.6g}"
        )
    return UVPoint(u, v)


def point_from_uv(henon: HenonMap, u: complex, v: complex) -> Point:
    """Inverse chart: x = p(u) and y the preimage of x + v next to u."""
    u = complex(u)
    x = henon.p(u)
    y = _root_near(henon.p, x + complex(v), u)
    return Point(x, y)


def graph_point(henon: HenonMap, manifold: LocalManifold, param) -> Point:
    """The plane point of a manifold graph at the given disk parameter."""
    t = complex(param)
    if manifold.side == "stable":
        return point_from_uv(henon, manifold.evaluate(t), t)
    return point_from_uv(henon, t, manifold.evaluate(t))


def _eval_poly(coeffs, t: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _taylor_from_circle(values, radius: float):
    """Taylor coefficients from equispaced circle samples, noise floored."""
    arr = np.fft.fft(np.asarray(values, dtype=complex)) / len(values)
    top = float(np.max(np.abs(arr)))
    floor = 1e-13 * max(top, 1e-300)
    return tuple(
        0j if abs(c) <= floor else complex(c) / radius**k for k, c in enumerate(arr)
    )


def _require_tame_polynomial(p: Polynomial) -> None:
    """Admit p only when every critical orbit settles on a bounded cycle."""
    if tuple(p.q_coefficients()) in _TAME_WHITELIST:
        return
    bound = 2.0 * (1.0 + sum(abs(c) for c in p.coefficients))
    for c in p.critical_points():
        w = complex(c)
        tail = []
        settled = False
        for n in range(400):
            w = p(w)
            if abs(w) > bound:
                raise ValueError(
                    "a critical orbit of p escapes: the Julia set is disconnected"
                )
            if n >= 200:
                if any(abs(w - t) < 1e-9 for t in tail):
                    settled = True
                    break
                tail.append(w)
        if not settled:
            raise ValueError("could not certify an attracting cycle for a critical orbit")


# ---------------------------------------------------------------------------
# stable side


def _stable_pull_node(henon, coeffs_next, v, seed):
    """Solve u(f(w)) = g_next(v(f(w))) for the u-parameter of w at fixed v."""
    a = henon.a
    p = henon.p

    def residual(uu):
        w = point_from_uv(henon, uu, v)
        fx = p(w.x) - a * w.y
        u_img = _root_near(p, fx, w.x)
        return u_img - _eval_poly(coeffs_next, a * w.y)

    u = complex(seed)
    fd = 1e-7
    for _ in range(50):
        f0 = residual(u)
        d = (residual(u + fd) - f0) / fd
        if d == 0:
            break
        step = f0 / d
        u -= step
        if abs(step) < _NODE_TOL * max(1.0, abs(u)):
            return u
    raise GraphTransformDiverged("pullback Newton stalled at a mesh node")


def local_stable_graph(
    henon: HenonMap,
    z: complex,
    iterations: int = 24,
    mesh: int = 32,
    *,
    delta: float = DELTA,
    disk_radius: float = DISK_RADIUS,
    shrink: float = SHRINK,
    tol: float = 1e-10,
) -> LocalManifold:
    """Graph v -> u of the local stable manifold over the orbit of z.

    Pulls the vertical slice u = p^n(z) back n times and deepens n until
    two successive graphs agree to tol in the sup norm over the mesh.
    """
    _require_tame_polynomial(henon.p)
    z = complex(z)
    orbit = [z]
    for _ in range(iterations):
        orbit.append(henon.p(orbit[-1]))
    radius = shrink * delta
    nodes = tuple(radius * cmath.exp(2j * math.pi * j / mesh) for j in range(mesh))
    levels = [[orbit[k]] * mesh for k in range(iterations)]  # Newton seeds
    prev0 = None
    conv = []
    used = 0
    vals0 = None
    coeffs0 = None
    try:
        for depth in range(1, iterations + 1):
            coeffs = (orbit[depth],)
            for k in range(depth - 1, -1, -1):
                vals = [
                    _stable_pull_node(henon, coeffs, nodes[i], levels[k][i])
                    for i in range(mesh)
                ]
                levels[k] = vals
                coeffs = _taylor_from_circle(vals, radius)
            used = depth
            vals0 = levels[0]
            coeffs0 = coeffs
            if prev0 is not None:
                dist = max(abs(p1 - p2) for p1, p2 in zip(vals0, prev0))
                conv.append(dist)
                if dist < tol:
                    break
            prev0 = list(vals0)
    except NewtonDivergence as exc:
        raise GraphTransformDiverged(f"graph transform failed: {exc}") from exc
    if conv and conv[-1] >= tol:
        raise GraphTransformDiverged(
            f"stable graph still moving by {conv[-1]:.3g} after {iterations} pullbacks"
        )
    spread = max(abs(val - z) for val in vals0)
    if spread >= disk_radius:
        raise GraphTransformDiverged(
            f"stable graph leaves the block: spread {spread:.3g} >= {disk_radius:.3g}"
        )
    return LocalManifold(
        side="stable",
        base=z,
        history=tuple(orbit),
        parameter_center=0j,
        radius=radius,
        delta=delta,
        disk_radius=disk_radius,
        shrink=shrink,
        nodes=nodes,
        values=tuple(vals0),
        coefficients=coeffs0,
        iterations=used,
        convergence=tuple(conv),
    )


# ---------------------------------------------------------------------------
# unstable side


def _unstable_push_node(henon, coeffs_prev, center_prev, u_target, seed):
    """Solve u(f(w)) = u_target for the source parameter on the prior graph."""
    p = henon.p
    a = henon.a

    def residual(uu):
        vv = _eval_poly(coeffs_prev, uu - center_prev)
        w = point_from_uv(henon, uu, vv)
        fx = p(w.x) - a * w.y
        return _root_near(p, fx, w.x) - u_target

    u = complex(seed)
    fd = 1e-7
    for _ in range(50):
        f0 = residual(u)
        d = (residual(u + fd) - f0) / fd
        if d == 0:
            break
        step = f0 / d
        u -= step
        if abs(step) < _NODE_TOL * max(1.0, abs(u)):
            return u
    raise GraphTransformDiverged("pushforward Newton stalled at a mesh node")


def local_unstable_graph(
    henon: HenonMap,
    history,
    iterations: int | None = None,
    mesh: int = 32,
    *,
    delta: float = DELTA,
    disk_radius: float = DISK_RADIUS,
    shrink: float = SHRINK,
    tol: float = 1e-10,
) -> LocalManifold:
    """Graph u -> v of the local unstable manifold over a backward history.

    history = (y0, y-1, y-2, ...) with p(y-(j+1)) = y-j; the horizontal
    slice v = 0 at the history tail is pushed forward and the depth grows
    until successive graphs agree to tol.
    """
    _require_tame_polynomial(henon.p)
    hist = tuple(complex(h) for h in history)
    if len(hist) < 2:
        raise ValueError("history needs at least two points")
    for later, earlier in zip(hist, hist[1:]):
        if abs(henon.p(earlier) - later) > 1e-8:
            raise ValueError("history is not a backward orbit under p")
    if iterations is None:
        iterations = len(hist) - 1
    if not 1 <= iterations <= len(hist) - 1:
        raise ValueError("iterations must fit inside the history")
    radius = shrink * disk_radius
    rays = tuple(cmath.exp(2j * math.pi * j / mesh) for j in range(mesh))
    sources = [
        [hist[k + 1] + radius * ray / henon.p.derivative(hist[k + 1]) for ray in rays]
        for k in range(iterations)
    ]
    prev0 = None
    conv = []
    used = 0
    vals0 = None
    coeffs0 = None
    try:
        for depth in range(1, iterations + 1):
            coeffs = (0j,)
            center_prev = hist[depth]
            for k in range(depth - 1, -1, -1):
                center = hist[k]
                vals = []
                for i, ray in enumerate(rays):
                    u_t = center + radius * ray
                    u_src = _unstable_push_node(
                        henon, coeffs, center_prev, u_t, sources[k][i]
                    )
                    sources[k][i] = u_src
                    vv = _eval_poly(coeffs, u_src - center_prev)
                    w = point_from_uv(henon, u_src, vv)
                    vals.append(henon.a * w.y)
                coeffs = _taylor_from_circle(vals, radius)
                center_prev = center
            used = depth
            vals0 = vals
            coeffs0 = coeffs
            if prev0 is not None:
                dist = max(abs(p1 - p2) for p1, p2 in zip(vals0, prev0))
                conv.append(dist)
                if dist < tol:
                    break
            prev0 = list(vals0)
    except NewtonDivergence as exc:
        raise GraphTransformDiverged(f"graph transform failed: {exc}") from exc
    if conv and conv[-1] >= tol:
        raise GraphTransformDiverged(
            f"unstable graph still moving by {conv[-1]:.3g} after {iterations} steps"
        )
    spread = max(abs(val) for val in vals0)
    if spread >= delta:
        raise GraphTransformDiverged(
            f"unstable graph leaves the block: spread {spread:.3g} >= {delta:.3g}"
        )
    nodes = tuple(hist[0] + radius * ray for ray in rays)
    return LocalManifold(
        side="unstable",
        base=hist[0],
        history=hist,
        parameter_center=hist[0],
        radius=radius,
        delta=delta,
        disk_radius=disk_radius,
        shrink=shrink,
        nodes=nodes,
        values=tuple(vals0),
        coefficients=coeffs0,
        iterations=used,
        convergence=tuple(conv),
    )


# ---------------------------------------------------------------------------
# gradient winding


def _graph_green(henon, manifold, v):
    w = graph_point(henon, manifold, v)
    gv = green(henon, w, "minus", tol=1e-12)
    if gv.interior_flag:
        raise GradientVanishesOnLoop(
            "loop point fails to escape backward; it lies in the bounded set"
        )
    return gv.value


def _gradient_at(henon, manifold, v, step=1e-6):
    gr = (
        _graph_green(henon, manifold, v + step) - _graph_green(henon, manifold, v - step)
    ) / (2 * step)
    gi = (
        _graph_green(henon, manifold, v + 1j * step)
        - _graph_green(henon, manifold, v - 1j * step)
    ) / (2 * step)
    return complex(gr, gi)


def gradient_winding(henon: HenonMap, manifold: LocalManifold, params) -> int:
    """Turns of the gradient of g- restricted to the graph along a loop.

    params is a closed loop of disk parameters (last connects to first);
    it must be sampled finely enough that the direction turns by less than
    a quarter circle between neighbours.
    """
    loop = [complex(v) for v in params]
    if len(loop) < 16:
        raise ValueError("need at least 16 loop nodes")
    grads = [_gradient_at(henon, manifold, v) for v in loop]
    total = 0.0
    for g1, g2 in zip(grads, grads[1:] + grads[:1]):
        if abs(g1) < 1e-10 or abs(g2) < 1e-10:
            raise GradientVanishesOnLoop(
                f"gradient magnitude {min(abs(g1), abs(g2)):.3g} on the loop"
            )
        darg = cmath.phase(g2 / g1)
        if abs(darg) >= 0.5 * math.pi:
            raise ValueError("loop sampling too coarse to track the gradient direction")
        total += darg
    turns = total / (2.0 * math.pi)
    nearest = round(turns)
    if abs(turns - nearest) > 0.05:
        raise ValueError(f"winding {turns:.4f} is not close to an integer")
    return int(nearest)


def gradient_index(
    henon: HenonMap,
    manifold: LocalManifold,
    loop_radius: float,
    mesh: int = 64,
    max_mesh: int = 2048,
) -> int:
    """Winding of the restricted gradient of g- around |v| = loop_radius*delta."""
    if manifold.side != "stable":
        raise ValueError("gradient winding is defined on stable graphs")
    rad = loop_radius * manifold.delta
    if not 0.0 < rad <= manifold.radius * (1.0 + 1e-12):
        raise ValueError("loop must stay inside the sampled graph disk")
    n = mesh
    while True:
        params = [rad * cmath.exp(2j * math.pi * j / n) for j in range(n)]
        try:
            return gradient_winding(henon, manifold, params)
        except ValueError:
            n *= 2
            if n > max_mesh:
                raise GradientVanishesOnLoop(
                    "gradient direction could not be resolved on the loop"
                )


def boundary_index(
    henon: HenonMap, manifold: LocalManifold, loop_radius: float, holes
) -> int:
    """Index over the graph disk minus hole loops: outer minus hole windings."""
    outer = gradient_index(henon, manifold, loop_radius)
    return outer - sum(gradient_winding(henon, manifold, hole) for hole in holes)


# ---------------------------------------------------------------------------
# serialization


def manifold_to_json(manifold: LocalManifold) -> str:
    def c2(z):
        z = complex(z)
        return [z.real, z.imag]

    data = {
        "side": manifold.side,
        "base": c2(manifold.base),
        "history": [c2(h) for h in manifold.history],
        "parameter_center": c2(manifold.parameter_center),
        "radius": manifold.radius,
        "delta": manifold.delta,
        "disk_radius": manifold.disk_radius,
        "shrink": manifold.shrink,
        "iterations": manifold.iterations,
        "convergence": list(manifold.convergence),
        "nodes": [c2(v) for v in manifold.nodes],
        "values": [c2(v) for v in manifold.values],
        "coefficients": [c2(v) for v in manifold.coefficients],
    }
    return json.dumps(data, indent=2, sort_keys=True)
