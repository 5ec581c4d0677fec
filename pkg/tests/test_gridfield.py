"""Grid evaluation of Green's functions and the PGM/CSV/JSON exports.

The degenerate backward function has the closed form log|p(y) - x| / d,
which pins every pixel of a small grid independently of the grid code's
own evaluation loop; the PGM bytes are checked against a hand-built
2x2 image.
"""

import json
import math
import struct

import numpy as np
import pytest

from henonlocus.dynamics import HenonMap, Polynomial
from henonlocus.gridfield import (
    GridField,
    green_grid,
    grid_sidecar,
    grid_to_csv,
    grid_to_pgm,
    worker_count,
)

SQUARE = Polynomial([0, 0, 1])
BASIC = Polynomial([-1, 0, 1])


def test_degenerate_minus_grid_matches_closed_form():
    henon = HenonMap(SQUARE, 0.0)
    grid = green_grid(
        henon,
        "green-minus",
        re_range=(1.0, 4.0),
        im_range=(-1.0, 1.0),
        nx=8,
        ny=6,
        slice_axis="y",
        slice_value=0.25,
    )
    assert grid.values.shape == (6, 8)
    res = np.linspace(1.0, 4.0, 8)
    ims = np.linspace(-1.0, 1.0, 6)
    for iy, im in enumerate(ims):
        for ix, re in enumerate(res):
            y = complex(re, im)
            expected = 0.5 * math.log(abs(henon.p(y) - 0.25))
            assert grid.values[iy, ix] == pytest.approx(expected, abs=1e-12)


def test_plus_grid_far_field_is_log_abs_x():
    henon = HenonMap(BASIC, 0.01)
    grid = green_grid(
        henon,
        "green-plus",
        re_range=(50.0, 80.0),
        im_range=(-5.0, 5.0),
        nx=5,
        ny=4,
        slice_value=1.0,
    )
    res = np.linspace(50.0, 80.0, 5)
    ims = np.linspace(-5.0, 5.0, 4)
    for iy, im in enumerate(ims):
        for ix, re in enumerate(res):
            assert abs(grid.values[iy, ix] - math.log(abs(complex(re, im)))) < 0.05


def test_interior_pixels_take_constant_values():
    henon = HenonMap(BASIC, 0.01)
    grid = green_grid(
        henon,
        "green-minus",
        re_range=(-0.1, 0.1),
        im_range=(-0.1, 0.1),
        nx=3,
        ny=3,
        slice_axis="y",
        slice_value=0.0,
    )
    constant = math.log(abs(henon.a)) / (henon.degree - 1)
    assert grid.values.min() >= constant - 1e-12


def test_tangency_grid_vanishes_on_degenerate_line():
    henon = HenonMap(SQUARE, 0.0)
    grid = green_grid(
        henon,
        "tangency",
        re_range=(-0.4, 0.4),
        im_range=(-0.4, 0.4),
        nx=9,
        ny=9,
        slice_axis="y",
        slice_value=5.0,
    )
    # |T| is smallest along the critical line y = 0 (middle row): each
    # column dips at im(y) = 0, and the center pixel y = 0 is a zero.
    for ix in range(9):
        assert grid.values[4, ix] < grid.values[0, ix]
        assert grid.values[4, ix] < grid.values[8, ix]
    assert grid.values[4, 4] < 1e-9


def test_pgm_bytes_exact():
    values = np.array([[0.0, 1.0], [2.0, 3.0]])
    grid = GridField(
        kind="green-plus",
        values=values,
        re_range=(0.0, 1.0),
        im_range=(0.0, 1.0),
        slice_axis="x",
        slice_value=0j,
        p_coefficients=(0j, 0j, 1 + 0j),
        a=0.01 + 0j,
    )
    data = grid_to_pgm(grid)
    header = b"P5\n2 2\n65535\n"
    assert data.startswith(header)
    pixels = struct.unpack(">4H", data[len(header):])
    assert pixels == (0, 21845, 43690, 65535)


def test_pgm_flat_grid_is_black():
    values = np.full((2, 3), 7.25)
    grid = GridField("green-plus", values, (0, 1), (0, 1), "x", 0j, (0j, 0j, 1 + 0j), 0j)
    data = grid_to_pgm(grid)
    assert data.endswith(b"\x00" * 12)


def test_sidecar_records_scaling():
    henon = HenonMap(SQUARE, 0.0)
    grid = green_grid(henon, "green-minus", (1, 2), (0, 1), 4, 3, slice_axis="y")
    side = json.loads(grid_sidecar(grid))
    assert side["width"] == 4 and side["height"] == 3
    assert side["min"] == pytest.approx(float(grid.values.min()))
    assert side["max"] == pytest.approx(float(grid.values.max()))
    assert side["kind"] == "green-minus"
    assert side["a"] == [0.0, 0.0]
    # keys are sorted for byte-stable output
    assert list(side) == sorted(side)


def test_csv_shape_and_values():
    henon = HenonMap(SQUARE, 0.0)
    grid = green_grid(henon, "green-minus", (1, 2), (3, 4), 3, 2, slice_axis="y")
    lines = grid_to_csv(grid).strip().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + 3 * 2
    first = lines[1].split(",")
    assert float(first[0]) == 1.0 and float(first[1]) == 3.0
    assert float(first[2]) == pytest.approx(grid.values[0, 0])


def test_grid_deterministic_across_worker_counts():
    henon = HenonMap(BASIC, 0.01)
    kwargs = dict(re_range=(5.0, 9.0), im_range=(-2.0, 2.0), nx=6, ny=5, slice_value=0.5)
    one = green_grid(henon, "green-plus", workers=1, **kwargs)
    many = green_grid(henon, "green-plus", workers=3, **kwargs)
    assert np.array_equal(one.values, many.values)
    assert grid_to_pgm(one) == grid_to_pgm(many)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("HENON_THREADS", "2")
    assert worker_count(None) == 2
    assert worker_count(5) == 5
    monkeypatch.setenv("HENON_THREADS", "not-a-number")
    with pytest.raises(ValueError):
        worker_count(None)


def test_unknown_kind_rejected():
    henon = HenonMap(SQUARE, 0.0)
    with pytest.raises(ValueError):
        green_grid(henon, "potential", (0, 1), (0, 1), 2, 2)
