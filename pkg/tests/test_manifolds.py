"""Crossed-mapping coordinates, local manifold graphs, gradient winding.

Independent oracles: the uv chart is checked against hand values and
round trips, stable graphs against a direct slice-preimage solved by a
fresh 2-D Newton with its own forward tangent accumulation, and the
winding counts against the degenerate closed form log|v|/d.
"""

import cmath
import json
import math
import random

import pytest

from henonlocus.dynamics import HenonMap, Point, Polynomial
from henonlocus.errors import OutsideVPrime
from henonlocus.manifolds import (
    LocalManifold,
    UVPoint,
    boundary_index,
    gradient_index,
    gradient_winding,
    graph_point,
    local_stable_graph,
    local_unstable_graph,
    manifold_to_json,
    point_from_uv,
    uv_coords,
)

SQUARE = Polynomial([0, 0, 1])  # x^2
BASIC = Polynomial([-1, 0, 1])  # x^2 - 1

# beta fixed point of x^2 - 1; it lies on the Julia set boundary.
PHI = (1.0 + math.sqrt(5.0)) / 2.0


# ---------------------------------------------------------------------------
# uv chart


def test_v_is_defect_from_degenerate_curve():
    henon = HenonMap(SQUARE, 0.01)
    uv = uv_coords(henon, Point(3.0, 2.0), delta=1.5)
    assert uv.v == pytest.approx(1.0, abs=1e-14)  # p(2) - 3
    assert abs(henon.p(uv.u) - 3.0) < 1e-12


def test_u_is_preimage_branch_near_y():
    henon = HenonMap(SQUARE, 0.01)
    uv = uv_coords(henon, Point(4.0, 2.1), delta=1.5)
    assert uv.u == pytest.approx(2.0, abs=1e-12)
    assert uv.v == pytest.approx(0.41, abs=1e-12)


def test_uv_roundtrip_random():
    henon = HenonMap(BASIC, 0.01)
    rng = random.Random(11)
    for _ in range(200):
        rho = rng.uniform(0.9, 1.7)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        y = rho * cmath.exp(1j * theta)
        v = rng.uniform(0.0, 0.045) * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        x = henon.p(y) - v
        uv = uv_coords(henon, Point(x, y))
        assert abs(henon.p(uv.u) - x) < 1e-10
        assert abs(uv.u - y) < 0.03  # branch near y, off by about v / p'(y)
        assert abs(uv.v - v) < 1e-12
        z = point_from_uv(henon, uv.u, uv.v)
        assert abs(z.x - x) < 1e-10
        assert abs(z.y - y) < 1e-10


def test_uv_rejects_large_v():
    henon = HenonMap(BASIC, 0.01)
    with pytest.raises(OutsideVPrime):
        uv_coords(henon, Point(henon.p(1.2) - 0.2, 1.2))  # |v| = 0.2 >= 0.05


def test_uv_rejects_wandering_branch():
    # x far from p(y): the preimage branch is no longer within beta/2 of y.
    henon = HenonMap(SQUARE, 0.01)
    with pytest.raises(OutsideVPrime):
        uv_coords(henon, Point(3.0, 2.0), delta=1.5, beta=0.4)


def test_point_from_uv_explicit():
    henon = HenonMap(SQUARE, 0.01)
    z = point_from_uv(henon, 2.0, 0.41)
    assert abs(z.x - 4.0) < 1e-12
    assert abs(z.y - 2.1) < 1e-12


# ---------------------------------------------------------------------------
# stable graphs


def test_stable_graph_degenerate_is_vertical_line():
    for poly, z in ((BASIC, PHI), (SQUARE, 1.0)):
        henon = HenonMap(poly, 0.0)
        m = local_stable_graph(henon, z, iterations=8, mesh=16)
        assert m.side == "stable"
        assert max(abs(val - z) for val in m.values) < 1e-10
        assert abs(m.evaluate(0.0) - z) < 1e-10


def test_stable_graph_invariance():
    # f maps the graph at z into the graph at p(z); z here is fixed.
    henon = HenonMap(BASIC, 0.01)
    m = local_stable_graph(henon, PHI, mesh=32)
    for k in range(8):
        v = 0.9 * m.radius * cmath.exp(2j * math.pi * k / 8)
        w = graph_point(henon, m, v)
        fw = henon.apply(w)
        uv = uv_coords(henon, fw)
        assert abs(uv.u - m.evaluate(uv.v)) < 1e-7


def _iterate_with_tangent(henon, z, n):
    """Forward orbit with the 2x2 tangent map, accumulated column-wise."""
    x, y = complex(z[0]), complex(z[1])
    m11, m12, m21, m22 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    for _ in range(n):
        dp = henon.p.derivative(x)
        x, y = henon.p(x) - henon.a * y, x
        m11, m12, m21, m22 = (
            dp * m11 - henon.a * m21,
            dp * m12 - henon.a * m22,
            m11,
            m12,
        )
    return Point(x, y), (m11, m12, m21, m22)


def _direct_slice_preimage(henon, z_orbit, v_target, n):
    """Solve v(w) = v_target, u(f^n(w)) = z_n by 2-D Newton (fresh oracle)."""
    x = henon.p(z_orbit[0]) - v_target
    y = complex(z_orbit[0])
    for depth in range(2, n + 1, 2):
        target = z_orbit[depth]
        for _ in range(60):
            w_end, (m11, m12, _, _) = _iterate_with_tangent(henon, Point(x, y), depth)
            uv_end = uv_coords(henon, w_end, delta=1.0, beta=1.6)
            f1 = henon.p(y) - x - v_target
            f2 = uv_end.u - target
            dp_end = henon.p.derivative(uv_end.u)
            j11, j12 = -1.0 + 0j, henon.p.derivative(y)
            j21, j22 = m11 / dp_end, m12 / dp_end
            det = j11 * j22 - j12 * j21
            dx = (f1 * j22 - f2 * j12) / det
            dy = (j11 * f2 - j21 * f1) / det
            x -= dx
            y -= dy
            if abs(dx) + abs(dy) < 1e-13 * max(1.0, abs(x) + abs(y)):
                break
    return Point(x, y)


def test_stable_graph_matches_direct_slice_preimage():
    henon = HenonMap(BASIC, 0.01)
    m = local_stable_graph(henon, PHI, mesh=32)
    orbit = [PHI]
    for _ in range(12):
        orbit.append(henon.p(orbit[-1]))
    for v in (0.012, -0.008 + 0.009j, 0.02j):
        w = _direct_slice_preimage(henon, orbit, v, 12)
        g = graph_point(henon, m, v)
        assert abs(w.x - g.x) < 1e-8
        assert abs(w.y - g.y) < 1e-8


def test_stable_graph_size_scales_with_a():
    sups = []
    for a in (1e-2, 1e-3):
        m = local_stable_graph(HenonMap(BASIC, a), PHI, mesh=16)
        sups.append(max(abs(val - PHI) for val in m.values))
    assert sups[0] < 0.05
    ratio = sups[0] / sups[1]
    assert 3.0 < ratio < 30.0


def test_stable_graph_contraction():
    m = local_stable_graph(HenonMap(BASIC, 0.01), PHI, mesh=16)
    conv = m.convergence
    assert conv, "expected at least one contraction step"
    for prev, cur in zip(conv, conv[1:]):
        if prev > 1e-13:
            assert cur <= 0.9 * prev
    assert conv[-1] < 1e-10


def test_stable_graphs_disjoint():
    henon = HenonMap(BASIC, 0.01)
    m1 = local_stable_graph(henon, PHI, mesh=16)
    m2 = local_stable_graph(henon, -PHI, mesh=16)
    gap = min(
        abs(v1 - v2) for v1 in m1.values for v2 in m2.values
    )
    assert gap > 1.0


def test_stable_graph_accepts_certified_hyperbolic():
    # x^2 - 0.5 is not whitelisted; the critical orbit check must admit it.
    henon = HenonMap(Polynomial([-0.5, 0, 1]), 0.01)
    beta_fix = (1.0 + math.sqrt(3.0)) / 2.0
    m = local_stable_graph(henon, beta_fix, mesh=8)
    assert max(abs(val - beta_fix) for val in m.values) < 0.05


def test_stable_graph_rejects_escaping_critical_orbit():
    with pytest.raises(ValueError):
        local_stable_graph(HenonMap(Polynomial([0.26, 0, 1]), 0.01), 0.3)


# ---------------------------------------------------------------------------
# unstable graphs


def test_unstable_graph_degenerate_is_horizontal():
    henon = HenonMap(BASIC, 0.0)
    m = local_unstable_graph(henon, (PHI,) * 7, mesh=16)
    assert m.side == "unstable"
    assert max(abs(val) for val in m.values) < 1e-10


def test_unstable_graph_invariance():
    henon = HenonMap(BASIC, 0.01)
    m = local_unstable_graph(henon, (PHI,) * 25, mesh=32)
    for k in range(8):
        u = PHI + 0.9 * m.radius * cmath.exp(2j * math.pi * k / 8)
        w = graph_point(henon, m, u)
        back = henon.apply_inverse(w)
        uv = uv_coords(henon, back)
        assert abs(uv.v - m.evaluate(uv.u)) < 1e-7


def test_unstable_graph_general_history():
    henon = HenonMap(BASIC, 0.01)
    history = [complex(PHI), complex(-PHI)]
    while len(history) < 22:
        history.append(cmath.sqrt(history[-1] + 1.0))
    history = tuple(history)
    for later, earlier in zip(history, history[1:]):
        assert abs(henon.p(earlier) - later) < 1e-12
    m = local_unstable_graph(henon, history, mesh=16)
    sup = max(abs(val) for val in m.values)
    assert sup < 5.0 * abs(henon.a)
    assert m.base == PHI


def test_unstable_graph_size_scales_with_a():
    sups = []
    for a in (1e-2, 1e-3):
        m = local_unstable_graph(HenonMap(BASIC, a), (PHI,) * 25, mesh=16)
        sups.append(max(abs(val) for val in m.values))
    ratio = sups[0] / sups[1]
    assert 3.0 < ratio < 30.0


def test_unstable_graph_requires_backward_orbit():
    henon = HenonMap(BASIC, 0.01)
    with pytest.raises(ValueError):
        local_unstable_graph(henon, (PHI, PHI + 0.3))


# ---------------------------------------------------------------------------
# gradient winding


def test_gradient_index_degenerate():
    # At a = 0 the restriction is log|v|/d: one logarithmic pole, index 1.
    henon = HenonMap(SQUARE, 0.0)
    m = local_stable_graph(henon, 1.0, iterations=8, mesh=16)
    assert gradient_index(henon, m, 0.4) == 1


def test_gradient_index_small_jacobian():
    henon = HenonMap(BASIC, 0.005)
    m = local_stable_graph(henon, PHI, mesh=32)
    assert gradient_index(henon, m, 0.4) == 1


def test_gradient_index_rejects_unstable_graph():
    henon = HenonMap(BASIC, 0.01)
    m = local_unstable_graph(henon, (PHI,) * 8, mesh=16)
    with pytest.raises(ValueError):
        gradient_index(henon, m, 0.4)


def _hole_loop(henon, m, n_nodes):
    """v-parameters of the f-image of the boundary of a preimage graph."""
    params = []
    for j in range(n_nodes):
        v = m.radius * cmath.exp(2j * math.pi * j / n_nodes)
        w = graph_point(henon, m, v)
        params.append(henon.a * w.y)  # v(f(x, y)) = a y
    return params


def test_boundary_index_with_holes():
    henon = HenonMap(BASIC, 0.005)
    m_z = local_stable_graph(henon, PHI, mesh=32)
    m_w2 = local_stable_graph(henon, -PHI, mesh=32)
    holes = [_hole_loop(henon, m_z, 256), _hole_loop(henon, m_w2, 256)]
    for hole in holes:
        assert max(abs(v) for v in hole) < 0.4 * m_z.delta
        assert gradient_winding(henon, m_z, hole) == 1
    assert boundary_index(henon, m_z, 0.4, holes) == -1  # 1 - d


# ---------------------------------------------------------------------------
# serialization


def test_manifold_json_roundtrip():
    henon = HenonMap(BASIC, 0.01)
    m = local_stable_graph(henon, PHI, mesh=8)
    data = json.loads(manifold_to_json(m))
    assert data["side"] == "stable"
    assert data["base"] == [pytest.approx(PHI), 0.0]
    assert len(data["values"]) == 8
    assert data["radius"] == pytest.approx(m.radius)
    rebuilt = [complex(re, im) for re, im in data["values"]]
    assert rebuilt == list(m.values)
