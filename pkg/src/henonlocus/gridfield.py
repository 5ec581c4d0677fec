"""Rectangular grids of escape-rate and tangency magnitudes, with exports.

A grid samples one complex coordinate over a rectangle while the other is
pinned (a horizontal or vertical slice of C^2).  Pixels are independent,
so rows are dispatched to a thread pool capped by the HENON_THREADS
environment variable; assembly order is fixed, making outputs
byte-reproducible for a given configuration.

Exports: binary 16-bit PGM (P5, big-endian, row-major, affine scaling
recorded in a JSON sidecar) and CSV rows (x, y, value).
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import HenonMap, Point
from .errors import HenonLocusError
from .escape import green
from .locus import tangency_value

_KINDS = ("green-plus", "green-minus", "tangency")
PGM_MAXVAL = 65535


@dataclass(frozen=True, eq=False)
class GridField:
    kind: str
    values: np.ndarray  # float64, shape (ny, nx); row 0 at the lowest imag
    re_range: tuple
    im_range: tuple
    slice_axis: str  # pixel coordinate: "x" (y pinned) or "y" (x pinned)
    slice_value: complex
    p_coefficients: tuple
    a: complex


def worker_count(requested):
    """Explicit request, else HENON_THREADS, else the machine's CPU count."""
    if requested is not None:
        n = int(requested)
        if n < 1:
            raise ValueError("worker count must be positive")
        return n
    env = os.environ.get("HENON_THREADS")
    if env is not None:
        return max(1, int(env))
    return os.cpu_count() or 1


def _pixel_value(henon, kind, point):
    if kind == "tangency":
        try:
            return abs(tangency_value(henon, point).value)
        except HenonLocusError:
            return math.nan
    side = "plus" if kind == "green-plus" else "minus"
    return green(henon, point, side, tol=1e-9).value


def green_grid(
    henon: HenonMap,
    kind: str,
    re_range,
    im_range,
    nx: int,
    ny: int,
    *,
    slice_axis: str = "x",
    slice_value: complex = 0j,
    workers=None,
) -> GridField:
    """Sample g+, g-, or |tangency| on an nx-by-ny rectangle of one slice."""
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    if slice_axis not in ("x", "y"):
        raise ValueError("slice_axis must be 'x' or 'y'")
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2 samples per axis")
    res = np.linspace(float(re_range[0]), float(re_range[1]), nx)
    ims = np.linspace(float(im_range[0]), float(im_range[1]), ny)
    pin = complex(slice_value)

    def row(iy):
        out = np.empty(nx, dtype=float)
        for ix in range(nx):
            c = complex(res[ix], ims[iy])
            point = Point(c, pin) if slice_axis == "x" else Point(pin, c)
            out[ix] = _pixel_value(henon, kind, point)
        return out

    with ThreadPoolExecutor(max_workers=worker_count(workers)) as pool:
        rows = list(pool.map(row, range(ny)))
    values = np.vstack(rows)
    return GridField(
        kind=kind,
        values=values,
        re_range=(float(re_range[0]), float(re_range[1])),
        im_range=(float(im_range[0]), float(im_range[1])),
        slice_axis=slice_axis,
        slice_value=pin,
        p_coefficients=tuple(henon.p.coefficients),
        a=complex(henon.a),
    )


def _finite_span(values):
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return 0.0, 0.0
    return float(finite.min()), float(finite.max())


def grid_to_pgm(grid: GridField) -> bytes:
    """16-bit big-endian P5 bytes; pixels affinely scaled onto 0..65535."""
    lo, hi = _finite_span(grid.values)
    ny, nx = grid.values.shape
    header = f"P5\n{nx} {ny}\n{PGM_MAXVAL}\n".encode("ascii")
    span = hi - lo
    if span <= 0.0:
        scaled = np.zeros((ny, nx))
    else:
        scaled = (grid.values - lo) / span * PGM_MAXVAL
        scaled = np.where(np.isfinite(scaled), scaled, 0.0)
    pixels = np.clip(np.rint(scaled), 0, PGM_MAXVAL).astype(">u2")
    return header + pixels.tobytes()


def grid_sidecar(grid: GridField) -> str:
    """JSON metadata needed to undo the PGM scaling, keys sorted."""

    def c2(z):
        z = complex(z)
        return [z.real, z.imag]

    lo, hi = _finite_span(grid.values)
    ny, nx = grid.values.shape
    data = {
        "kind": grid.kind,
        "width": nx,
        "height": ny,
        "re_range": list(grid.re_range),
        "im_range": list(grid.im_range),
        "slice_axis": grid.slice_axis,
        "slice_value": c2(grid.slice_value),
        "p_coefficients": [c2(c) for c in grid.p_coefficients],
        "a": c2(grid.a),
        "min": lo,
        "max": hi,
        "maxval": PGM_MAXVAL,
        "nan_pixel": 0,
        "row0": "lowest imaginary coordinate",
    }
    return json.dumps(data, indent=2, sort_keys=True)


def grid_to_csv(grid: GridField) -> str:
    """Rows x,y,value with x the real and y the imaginary pixel coordinate."""
    ny, nx = grid.values.shape
    res = np.linspace(grid.re_range[0], grid.re_range[1], nx)
    ims = np.linspace(grid.im_range[0], grid.im_range[1], ny)
    lines = ["x,y,value"]
    for iy in range(ny):
        for ix in range(nx):
            lines.append(
                f"{float(res[ix])!r},{float(ims[iy])!r},{float(grid.values[iy, ix])!r}"
            )
    return "\n".join(lines) + "\n"
