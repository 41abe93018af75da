"""Grid-sampled functions, midpoint quadrature, Lp norms over boxes and
balls, and the mixed direction/base norms used by the tube transforms.

Samples live at cell centers; the integral of u is sum(u) * cell_measure.
A domain selects the cells whose centers it contains (no partial-cell
weighting; refinement control is resample_check's job).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import DirectionNet


class FieldError(ValueError):
    pass


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def bounding_box(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)

    @property
    def volume(self) -> float:
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        c = np.asarray(self.center)
        return np.sum((pts - c) ** 2, axis=1) <= self.radius**2

    def bounding_box(self):
        c = np.asarray(self.center, dtype=float)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class CylinderDomain:
    """Disc of given radius in two selected axes, box in the rest."""

    disc_axes: tuple
    disc_center: tuple
    disc_radius: float
    rest_lo: tuple
    rest_hi: tuple

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        a, b = self.disc_axes
        u = pts[:, a] - self.disc_center[0]
        v = pts[:, b] - self.disc_center[1]
        ok = u * u + v * v <= self.disc_radius**2
        rest = [ax for ax in range(pts.shape[1]) if ax not in self.disc_axes]
        for k, ax in enumerate(rest):
            ok &= (pts[:, ax] >= self.rest_lo[k]) & (pts[:, ax] <= self.rest_hi[k])
        return ok

    def bounding_box(self):
        dim = 2 + len(self.rest_lo)
        lo = np.empty(dim)
        hi = np.empty(dim)
        rest = iter(range(len(self.rest_lo)))
        for ax in range(dim):
            if ax == self.disc_axes[0]:
                lo[ax] = self.disc_center[0] - self.disc_radius
                hi[ax] = self.disc_center[0] + self.disc_radius
            elif ax == self.disc_axes[1]:
                lo[ax] = self.disc_center[1] - self.disc_radius
                hi[ax] = self.disc_center[1] + self.disc_radius
            else:
                k = next(rest)
                lo[ax] = self.rest_lo[k]
                hi[ax] = self.rest_hi[k]
        return lo, hi


# ---------------------------------------------------------------------------
# grid functions


@dataclass
class GridFunction:
    """Complex samples on a uniform rectangular grid.

    origin is the center of cell (0, ..., 0); spacing is per-axis.
    """

    dims: tuple
    origin: tuple
    spacing: tuple
    samples: np.ndarray
    generator: Optional[Callable] = None  # point sampler, for refinement

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.shape != tuple(self.dims):
            raise FieldError(f"samples shape {self.samples.shape} != dims {self.dims}")
        if any(s <= 0 for s in self.spacing):
            raise FieldError("spacing must be positive")

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def cell_measure(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self, a: int) -> np.ndarray:
        return self.origin[a] + self.spacing[a] * np.arange(self.dims[a])

    def centers(self) -> np.ndarray:
        """All cell centers, shape (prod(dims), ndim)."""
        axes = [self.axis_centers(a) for a in range(self.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.ndim)

    def refine(self, factor: int = 2) -> "GridFunction":
        if self.generator is None:
            raise FieldError("refinement needs a generator")
        dims = tuple(d * factor for d in self.dims)
        spacing = tuple(s / factor for s in self.spacing)
        origin = tuple(
            o - s / 2 + sp / 2 for o, s, sp in zip(self.origin, self.spacing, spacing)
        )
        g = GridFunction(dims, origin, spacing,
                         np.zeros(dims, dtype=self.samples.dtype),
                         generator=self.generator)
        g.samples = np.asarray(self.generator(g.centers())).reshape(dims)
        return g

    def to_binary(self):
        """(bytes, sidecar dict): little-endian f64 (re, im) pairs + metadata."""
        flat = np.ascontiguousarray(self.samples, dtype=np.complex128).reshape(-1)
        raw = np.empty(2 * flat.size, dtype="<f8")
        raw[0::2] = flat.real
        raw[1::2] = flat.imag
        sidecar = {
            "dims": list(self.dims),
            "origin": [float(v) for v in self.origin],
            "spacing": [float(v) for v in self.spacing],
        }
        return raw.tobytes(), sidecar

    @classmethod
    def from_binary(cls, raw: bytes, sidecar: dict) -> "GridFunction":
        arr = np.frombuffer(raw, dtype="<f8")
        flat = arr[0::2] + 1j * arr[1::2]
        dims = tuple(sidecar["dims"])
        return cls(dims, tuple(sidecar["origin"]), tuple(sidecar["spacing"]),
                   flat.reshape(dims))


def grid_from_sampler(sampler, lo, hi, dims) -> GridFunction:
    """Midpoint grid over the box [lo, hi] with the given cell counts."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dims = tuple(int(d) for d in np.atleast_1d(dims))
    spacing = tuple((h - l) / d for l, h, d in zip(lo, hi, dims))
    origin = tuple(l + s / 2 for l, s in zip(lo, spacing))
    g = GridFunction(dims, origin, spacing, np.zeros(dims, dtype=complex),
                     generator=sampler)
    g.samples = np.asarray(sampler(g.centers())).reshape(dims)
    return g


def lp_norm(u: GridFunction, p: float, domain=None) -> float:
    """(sum |u|^p cell_measure)^{1/p} over cells with centers in the domain.

    p = inf takes the max; p < 1 uses the same formula (a quasi-norm).
    """
    if domain is None:
        vals = np.abs(u.samples).reshape(-1)
    else:
        mask = domain.contains(u.centers())
        if not np.any(mask):
            raise FieldError("domain does not intersect the grid")
        vals = np.abs(u.samples).reshape(-1)[mask]
    if p == np.inf:
        return float(vals.max())
    if p <= 0:
        raise FieldError("need p > 0")
    return float((np.sum(vals**p) * u.cell_measure) ** (1.0 / p))


#: refusal threshold for refinement allocations
_MAX_REFINE_CELLS = 1 << 26


def resample_check(u: GridFunction, p: float, domain=None, factor: int = 2):
    """Norm at spacing h and h/factor; callers bound the relative change."""
    needed = int(np.prod(u.dims)) * factor ** u.ndim
    if needed > _MAX_REFINE_CELLS:
        raise FieldError(
            f"refinement needs {needed} cells, above the {_MAX_REFINE_CELLS} limit"
        )
    coarse = lp_norm(u, p, domain)
    fine = lp_norm(u.refine(factor), p, domain)
    return coarse, fine


# ---------------------------------------------------------------------------
# functions on the net (direction x base)


SUP_I = "sup_i"
SUM_I = "sum_i"


@dataclass
class NetFunction:
    """Finitely-supported nonnegative values on net x net."""

    net: DirectionNet
    values: dict  # (omega_index, base_index) -> float >= 0

    def __post_init__(self):
        m = len(self.net.points)
        for (w, i), v in self.values.items():
            if not (0 <= w < m and 0 <= i < m):
                raise FieldError(f"net index ({w}, {i}) out of range")
            if v < 0:
                raise FieldError("net function values must be nonnegative")

    def omega_support(self):
        return sorted({w for (w, _i) in self.values})

    def inner_aggregates(self, inner: str) -> dict:
        """omega_index -> aggregate over bases, in one pass."""
        out = {}
        if inner == SUP_I:
            for (w, _i), v in self.values.items():
                if v > out.get(w, 0.0):
                    out[w] = v
        elif inner == SUM_I:
            for (w, _i), v in self.values.items():
                out[w] = out.get(w, 0.0) + v
        else:
            raise FieldError(f"unknown inner aggregate {inner!r}")
        return out

    def inner_aggregate(self, omega_index: int, inner: str) -> float:
        return self.inner_aggregates(inner).get(omega_index, 0.0)

    def total(self) -> float:
        return float(sum(self.values.values()))

    def scaled(self, c: float) -> "NetFunction":
        return NetFunction(self.net, {k: c * v for k, v in self.values.items()})

    def to_json(self) -> list:
        return [[int(w), int(i), float(v)] for (w, i), v in sorted(self.values.items())]

    @classmethod
    def from_json(cls, net: DirectionNet, items) -> "NetFunction":
        return cls(net, {(int(w), int(i)): float(v) for w, i, v in items})


def mixed_norm(g: NetFunction, outer_q: float, inner: str = SUP_I) -> float:
    """(sum_omega delta^{n-1} (inner aggregate over i)^q)^{1/q}.

    Directions carry the normalized measure delta^{n-1}; bases carry
    counting measure.  outer_q = inf takes max over directions.
    """
    dim = g.net.dim
    weight = g.net.delta**dim
    aggs = list(g.inner_aggregates(inner).values())
    if not aggs:
        return 0.0
    if outer_q == np.inf:
        return float(max(aggs))
    if outer_q <= 0:
        raise FieldError("need outer_q > 0")
    return float((sum(a**outer_q for a in aggs) * weight) ** (1.0 / outer_q))
