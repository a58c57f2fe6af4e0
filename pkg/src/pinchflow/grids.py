"""Structured grids on closed surfaces and finite-difference jets.

Two chart topologies are supported:

* Torus: both directions periodic with period 2*pi.
* Sphere: latitude-longitude chart, u in [0, pi] including both pole rows,
  v periodic.  Pole rows are excluded from jet evaluation (the chart is
  parametrically degenerate there); the stencil reaches past the poles
  through the exact identification F(-u, v) = F(u, v + pi), which needs nv
  even.

Derivatives are 4th-order central differences in chart coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PoleRow
from .tensor_kernel import Jet2


@dataclass
class GridSurface:
    topology: str  # "torus" | "sphere"
    nu: int
    nv: int
    samples: np.ndarray  # (nu, nv, ambient_dim), unit vectors
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.topology not in ("torus", "sphere"):
            raise ValueError("unknown topology %r" % self.topology)
        if self.topology == "sphere" and self.nv % 2 != 0:
            raise ValueError("sphere topology needs an even nv for the pole stencil")

    @property
    def du(self) -> float:
        if self.topology == "torus":
            return 2.0 * np.pi / self.nu
        return np.pi / (self.nu - 1)

    @property
    def dv(self) -> float:
        return 2.0 * np.pi / self.nv

    @property
    def u_values(self) -> np.ndarray:
        return np.arange(self.nu) * self.du

    @property
    def v_values(self) -> np.ndarray:
        return np.arange(self.nv) * self.dv

    @property
    def valid_rows(self) -> slice:
        """Rows where jets are defined (pole rows excluded on the sphere)."""
        if self.topology == "torus":
            return slice(0, self.nu)
        return slice(1, self.nu - 1)

    def copy_with(self, samples: np.ndarray) -> "GridSurface":
        return GridSurface(self.topology, self.nu, self.nv, samples, dict(self.meta))


def _extend_sphere_u(samples: np.ndarray, pad: int) -> np.ndarray:
    """Append ghost rows beyond both poles via F(-u, v) = F(u, v + pi).

    Extended row e corresponds to chart row e - pad; the ghost values are
    exact samples of the same smooth surface, not extrapolations.

    The stored pole rows themselves are NOT trusted as stencil nodes: a
    pole row holds a single point whatever refresh policy maintains it, and
    an averaged refresh is only O(du^2) accurate, which the d2 stencil at
    the adjacent row would amplify to an O(1) curvature error.  The u = 0
    and u = pi node values are instead rebuilt per meridian by 6th-order
    interpolation through the same across-pole identification, e.g.
        F(0, v) ~ (15 A1 - 6 A2 + A3) / 20,  Aj = F(uj, v) + F(uj, v+pi).
    """
    nu, nv = samples.shape[:2]
    half = nv // 2
    top = [np.roll(samples[g], half, axis=0) for g in range(pad, 0, -1)]
    bot = [np.roll(samples[nu - 1 - g], half, axis=0) for g in range(1, pad + 1)]
    ext = np.concatenate([np.stack(top), samples, np.stack(bot)], axis=0)

    def across(row):
        return row + np.roll(row, half, axis=0)

    north = (15.0 * across(samples[1]) - 6.0 * across(samples[2])
             + across(samples[3])) / 20.0
    south = (15.0 * across(samples[nu - 2]) - 6.0 * across(samples[nu - 3])
             + across(samples[nu - 4])) / 20.0
    ext[pad] = north / np.linalg.norm(north, axis=-1, keepdims=True)
    ext[pad + nu - 1] = south / np.linalg.norm(south, axis=-1, keepdims=True)
    return ext


def _shift(arr: np.ndarray, off: int, axis: int) -> np.ndarray:
    return np.roll(arr, -off, axis=axis)


def _d1_periodic(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (
        -_shift(arr, 2, axis) + 8.0 * _shift(arr, 1, axis)
        - 8.0 * _shift(arr, -1, axis) + _shift(arr, -2, axis)
    ) / (12.0 * h)


def _d2_periodic(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (
        -_shift(arr, 2, axis) + 16.0 * _shift(arr, 1, axis) - 30.0 * arr
        + 16.0 * _shift(arr, -1, axis) - _shift(arr, -2, axis)
    ) / (12.0 * h * h)


def _d1_rows(ext: np.ndarray, h: float) -> np.ndarray:
    """First u-derivative of a (+2/-2)-padded array, one value per chart row."""
    return (-ext[4:] + 8.0 * ext[3:-1] - 8.0 * ext[1:-3] + ext[:-4]) / (12.0 * h)


def _d2_rows(ext: np.ndarray, h: float) -> np.ndarray:
    return (
        -ext[4:] + 16.0 * ext[3:-1] - 30.0 * ext[2:-2] + 16.0 * ext[1:-3] - ext[:-4]
    ) / (12.0 * h * h)


def batch_jets(surface: GridSurface):
    """Finite-difference jets on all jet-valid rows.

    Returns (position, first, second) with shapes (r, nv, d), (r, nv, 2, d),
    (r, nv, 2, 2, d) where r = number of valid rows.
    """
    s = surface.samples
    du, dv = surface.du, surface.dv
    if surface.topology == "torus":
        pos = s
        fu = _d1_periodic(s, 0, du)
        fv = _d1_periodic(s, 1, dv)
        fuu = _d2_periodic(s, 0, du)
        fvv = _d2_periodic(s, 1, dv)
        fuv = _d1_periodic(fv, 0, du)
    else:
        sel = slice(1, surface.nu - 1)
        ext = _extend_sphere_u(s, 2)
        pos = s[sel]
        fu = _d1_rows(ext, du)[sel]
        fuu = _d2_rows(ext, du)[sel]
        fuv = _d1_rows(_d1_periodic(ext, 1, dv), du)[sel]
        fv = _d1_periodic(s, 1, dv)[sel]
        fvv = _d2_periodic(s, 1, dv)[sel]

    first = np.stack([fu, fv], axis=2)
    second = np.empty(pos.shape[:2] + (2, 2) + pos.shape[2:])
    second[:, :, 0, 0] = fuu
    second[:, :, 0, 1] = fuv
    second[:, :, 1, 0] = fuv
    second[:, :, 1, 1] = fvv
    return pos, first, second


def discrete_jet(surface: GridSurface, i: int, j: int) -> Jet2:
    """Single-point jet; raises PoleRow on excluded sphere rows."""
    vr = surface.valid_rows
    if not (vr.start <= i < vr.stop):
        raise PoleRow("row %d is a pole row" % i)
    pos, first, second = batch_jets(surface)
    r = i - vr.start
    return Jet2(pos[r, j], first[r, j], second[r, j])
