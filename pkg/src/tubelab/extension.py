"""Adjoint-restriction fields for elliptic phases: scattered-point
evaluation, bilinear norm ratios over localized domains, the annulus
reformulation, and the rotational-curvature determinant.

All quadrature is midpoint rule on the cap's support box.  Grid evaluation
is organized as matrix products (one complex GEMM per axis or per slab);
for the quadratic phase with box caps the integral factors per axis, which
is what makes large-scale sweeps affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import Ball, GridFunction, lp_norm
from .geometry import EllipticPhase

TWO_PI = 2.0 * math.pi

#: evaluation-domain sampling step; the fields are band-limited to the
#: unit-scale frequency box Q x Phi(Q), so this need not shrink with R
DOMAIN_SPACING = 0.25

#: fail-fast resource caps (quadrature nodes per axis, domain grid cells)
MAX_GRID_NODES = 1 << 17
MAX_DOMAIN_CELLS = 1 << 28


class ExtensionError(ValueError):
    pass


class OscillationGuardError(ExtensionError):
    """Grid too coarse to resolve the integrand oscillation."""


@dataclass
class CapFunction:
    """Indicator-type density on a sub-box of Q, optionally modulated by
    e^{-2 pi i x0 . (y, Phi(y))} with x0 in R^n."""

    support_lo: tuple
    support_hi: tuple
    modulation: Optional[tuple] = None
    density: Optional[object] = None  # callable on (m, n-1) points
    amplitude: complex = 1.0

    def __post_init__(self):
        lo = np.asarray(self.support_lo, dtype=float)
        hi = np.asarray(self.support_hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ExtensionError("bad support box")
        if np.any(lo < -1.0 - 1e-12) or np.any(hi > 1.0 + 1e-12):
            raise ExtensionError("support must lie inside Q = [-1,1]^{n-1}")

    @property
    def dim(self) -> int:
        return len(self.support_lo)

    @property
    def measure(self) -> float:
        return float(np.prod(np.asarray(self.support_hi) - np.asarray(self.support_lo)))

    def scaled(self, c: complex) -> "CapFunction":
        return CapFunction(self.support_lo, self.support_hi, self.modulation,
                           self.density, self.amplitude * c)

    def modulation_vector(self, n: int) -> np.ndarray:
        if self.modulation is None:
            return np.zeros(n)
        x0 = np.asarray(self.modulation, dtype=float)
        if x0.shape != (n,):
            raise ExtensionError(f"modulation must be a vector in R^{n}")
        return x0

    def nodes(self, grid_counts):
        """Per-axis midpoint nodes and the scalar cell weight."""
        counts = np.broadcast_to(np.asarray(grid_counts, dtype=int), (self.dim,))
        axes = []
        weight = 1.0
        for lo, hi, m in zip(self.support_lo, self.support_hi, counts):
            h = (hi - lo) / m
            axes.append(lo + (np.arange(m) + 0.5) * h)
            weight *= h
        return axes, weight

    def density_values(self, pts: np.ndarray) -> np.ndarray:
        if self.density is None:
            return np.full(pts.shape[0], self.amplitude, dtype=complex)
        return self.amplitude * np.asarray(self.density(pts), dtype=complex)

    def norm_lp(self, p: float, grid_n: int = 64) -> float:
        """||f||_p; exact for unit densities (modulation has modulus one)."""
        if self.density is None:
            if p == np.inf:
                return abs(self.amplitude)
            return abs(self.amplitude) * self.measure ** (1.0 / p)
        axes, weight = self.nodes(grid_n)
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        vals = np.abs(self.density_values(mesh))
        if p == np.inf:
            return float(vals.max())
        return float((np.sum(vals**p) * weight) ** (1.0 / p))


def _max_abs_gradient(phi: EllipticPhase, cap: CapFunction, per_axis: int = 5):
    """Componentwise max of |grad Phi| over the support box (sampled)."""
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in
            zip(cap.support_lo, cap.support_hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, cap.dim)
    return np.max(np.abs(phi.grad(mesh)), axis=0)


def _frequency_bounds(cap: CapFunction, phi: EllipticPhase, points):
    """(per-axis sum-form frequencies, global guard-form frequency)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[1]
    x0 = cap.modulation_vector(n)
    eff = pts + x0
    xmax = np.max(np.abs(eff[:, :-1]), axis=0)
    tmax = float(np.max(np.abs(eff[:, -1])))
    gmax = _max_abs_gradient(phi, cap)
    gnorm = float(np.sqrt(np.sum(gmax * gmax)))
    freq_axes = xmax + tmax * gmax
    freq_global = max(float(np.max(xmax)), tmax * gnorm)
    return freq_axes, freq_global


def required_grid_counts(cap: CapFunction, phi: EllipticPhase, points,
                         min_nodes: int = 16) -> np.ndarray:
    """Per-axis node counts so every cell sees at most a quarter period."""
    freq_axes, freq_global = _frequency_bounds(cap, phi, points)
    counts = np.empty(cap.dim, dtype=int)
    for a in range(cap.dim):
        length = cap.support_hi[a] - cap.support_lo[a]
        freq = max(freq_axes[a], freq_global)
        counts[a] = max(min_nodes, int(math.ceil(4.0 * length * freq)))
    return counts


def required_grid_n(cap: CapFunction, phi: EllipticPhase, points,
                    min_nodes: int = 16) -> int:
    """Single nodes-per-axis figure meeting the oscillation guard
    h * max(max|x_|, max|x_n| max|grad Phi|) <= 1/4 on every axis."""
    return int(np.max(required_grid_counts(cap, phi, points, min_nodes)))


def _check_guard(cap: CapFunction, phi: EllipticPhase, points, grid_counts):
    counts = np.broadcast_to(np.asarray(grid_counts, dtype=int), (cap.dim,))
    _freq_axes, freq_global = _frequency_bounds(cap, phi, points)
    for a in range(cap.dim):
        h = (cap.support_hi[a] - cap.support_lo[a]) / counts[a]
        if h * freq_global > 0.25 + 1e-12:
            raise OscillationGuardError(
                f"grid_n = {counts[a]} on axis {a} violates the oscillation "
                f"guard; need grid_n >= {required_grid_n(cap, phi, points)}"
            )


def _separable_ok(f: CapFunction, phi: EllipticPhase) -> bool:
    return getattr(phi, "tag", "generic") == "quadratic" and f.density is None


def evaluate_extension(f: CapFunction, phi: EllipticPhase, points, grid_n):
    """Midpoint-quadrature values of the extension integral at each point:
    integral over the support of e^{-2 pi i (x_ . y + x_n Phi(y))} f(y) dy.

    grid_n may be an int or per-axis counts.  For the quadratic phase with
    a plain density the tensor sum factors per axis and is evaluated that
    way; the result is the same midpoint sum."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[1]
    if n - 1 != f.dim:
        raise ExtensionError("point dimension does not match cap dimension")
    _check_guard(f, phi, pts, grid_n)
    axes, weight = f.nodes(grid_n)
    x0 = f.modulation_vector(n)
    if _separable_ok(f, phi):
        eff = pts + x0
        out = np.full(pts.shape[0], f.amplitude, dtype=complex)
        for a, y in enumerate(axes):
            h = (f.support_hi[a] - f.support_lo[a]) / len(y)
            phase = np.outer(eff[:, a], y) + 0.5 * np.outer(eff[:, -1], y * y)
            out *= np.exp(-TWO_PI * 1j * phase).sum(axis=1) * h
        return out
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.dim)
    phase_vals = phi(mesh)
    dens = f.density_values(mesh) * weight
    if np.any(x0):
        dens = dens * np.exp(-TWO_PI * 1j * (mesh @ x0[:-1] + phase_vals * x0[-1]))
    out = np.empty(pts.shape[0], dtype=complex)
    chunk = max(1, (1 << 23) // max(1, mesh.shape[0]))
    for s in range(0, pts.shape[0], chunk):
        blk = pts[s:s + chunk]
        ph = blk[:, :-1] @ mesh.T + np.outer(blk[:, -1], phase_vals)
        out[s:s + chunk] = np.exp(-TWO_PI * 1j * ph) @ dens
    return out


# ---------------------------------------------------------------------------
# grid evaluation
#
# The evaluation domain is gridded at DOMAIN_SPACING; the extension field is
# produced one x_n slab at a time.  _SlabEvaluator hides the three paths:
# separable (quadratic phase, per-axis GEMMs), n=2 (single GEMM), and the
# generic n=3 path (two GEMMs per slab).


def _axis_cover(lo: float, hi: float, spacing: float) -> np.ndarray:
    count = max(1, int(math.ceil((hi - lo) / spacing - 1e-12)))
    start = 0.5 * (lo + hi) - 0.5 * count * spacing + 0.5 * spacing
    return start + spacing * np.arange(count)


class _SlabEvaluator:
    def __init__(self, cap: CapFunction, phi: EllipticPhase, x_axes, xn_axis,
                 grid_n: int):
        counts = np.broadcast_to(np.asarray(grid_n, dtype=int), (cap.dim,))
        if int(counts.max()) > MAX_GRID_NODES:
            raise OscillationGuardError(
                f"quadrature needs {counts.tolist()} nodes per support axis, "
                f"above the {MAX_GRID_NODES} cap; shrink the scale range or "
                f"raise the box constant"
            )
        self.cap = cap
        self.phi = phi
        self.x_axes = x_axes
        self.xn_axis = xn_axis
        n = len(x_axes) + 1
        probe = np.zeros((2, n))
        probe[0, :-1] = [a[0] for a in x_axes]
        probe[1, :-1] = [a[-1] for a in x_axes]
        probe[0, -1] = xn_axis[0]
        probe[1, -1] = xn_axis[-1]
        _check_guard(cap, phi, probe, grid_n)
        self.x0 = cap.modulation_vector(n)
        self.separable = (
            getattr(phi, "tag", "generic") == "quadratic" and cap.density is None
        )
        axes, self.weight = cap.nodes(grid_n)
        self.y_axes = axes
        if self.separable:
            tau = xn_axis + self.x0[-1]
            self.factors = []
            for a, y in enumerate(axes):
                xi = x_axes[a] + self.x0[a]
                osc = np.exp(-TWO_PI * 1j * np.outer(xi, y))
                chirp = np.exp(-TWO_PI * 1j * 0.5 * np.outer(tau, y * y))
                h = (cap.support_hi[a] - cap.support_lo[a]) / len(y)
                self.factors.append(osc @ (chirp * h).T)  # (P_a, P_n)
            self.factors[0] = self.factors[0] * cap.amplitude
        else:
            mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
            flat = mesh.reshape(-1, cap.dim)
            self.mesh_shape = mesh.shape[:-1]
            self.phase_vals = phi(flat).reshape(self.mesh_shape)
            dens = cap.density_values(flat).reshape(self.mesh_shape)
            if np.any(self.x0[:-1]):
                dens = dens * np.exp(
                    -TWO_PI * 1j * (flat @ self.x0[:-1]).reshape(self.mesh_shape)
                )
            self.dens = dens * self.weight
            self.osc = [
                np.exp(-TWO_PI * 1j * np.outer(x_axes[a] + self.x0[a], axes[a]))
                for a in range(cap.dim)
            ]

    def slab(self, s: int) -> np.ndarray:
        """Extension field on the x-grid at x_n = xn_axis[s]."""
        if self.separable:
            out = self.factors[0][:, s]
            for fac in self.factors[1:]:
                out = np.multiply.outer(out, fac[:, s])
            return out
        tau = self.xn_axis[s] + self.x0[-1]
        w = self.dens * np.exp(-TWO_PI * 1j * tau * self.phase_vals)
        if self.cap.dim == 1:
            return self.osc[0] @ w
        return self.osc[0] @ w @ self.osc[1].T


@dataclass
class LocalizedRatio:
    p: float
    q: float
    R: float
    value: float
    bilinear: bool

    def __post_init__(self):
        if self.value < 0 or self.R < 1:
            raise ExtensionError("bad localized ratio")


def domain_norm_ratio(f: CapFunction, g: Optional[CapFunction],
                      phi: EllipticPhase, p: float, q: float, domain,
                      grid_n=None, spacing: float = DOMAIN_SPACING,
                      min_nodes: int = 16, grid_refine: int = 1):
    """||E f . E g||_{L^q(domain)} / (||f||_p ||g||_p)  (linear when g is None).

    The domain is sampled on a fixed grid of the given spacing; cells whose
    centers fall in the domain contribute with full measure.  Quadrature
    node counts are sized per axis from the oscillation guard unless grid_n
    is given explicitly.  Returns (ratio, stats) with field amplitude
    statistics for diagnostics.
    """
    lo, hi = domain.bounding_box()
    n = len(lo)
    x_axes = [_axis_cover(lo[a], hi[a], spacing) for a in range(n - 1)]
    xn_axis = _axis_cover(lo[n - 1], hi[n - 1], spacing)
    cells = int(np.prod([len(a) for a in x_axes])) * len(xn_axis)
    if cells > MAX_DOMAIN_CELLS:
        raise OscillationGuardError(
            f"domain grid of {cells} cells exceeds the {MAX_DOMAIN_CELLS} cap; "
            f"shrink the scale range or raise the box constant"
        )
    corner_pts = np.array([[a[0] for a in x_axes] + [xn_axis[0]],
                           [a[-1] for a in x_axes] + [xn_axis[-1]]])
    caps = [f] if g is None else [f, g]
    if grid_n is None:
        counts = [grid_refine * required_grid_counts(c, phi, corner_pts,
                                                     min_nodes=min_nodes)
                  for c in caps]
    else:
        counts = [np.broadcast_to(np.asarray(grid_n, dtype=int), (c.dim,))
                  for c in caps]
    evals = [_SlabEvaluator(c, phi, x_axes, xn_axis, cnt)
             for c, cnt in zip(caps, counts)]

    cellvol = spacing**n
    mesh_x = np.stack(np.meshgrid(*x_axes, indexing="ij"), axis=-1)
    flat_x = mesh_x.reshape(-1, n - 1)
    total = 0.0
    sup = 0.0
    masked_cells = 0
    for s in range(len(xn_axis)):
        pts = np.concatenate(
            [flat_x, np.full((flat_x.shape[0], 1), xn_axis[s])], axis=1
        )
        mask = domain.contains(pts)
        if not np.any(mask):
            continue
        masked_cells += int(np.count_nonzero(mask))
        prod = evals[0].slab(s).reshape(-1)[mask]
        if g is not None:
            prod = prod * evals[1].slab(s).reshape(-1)[mask]
        mags = np.abs(prod)
        sup = max(sup, float(mags.max()))
        if q == np.inf:
            continue
        total += float(np.sum(mags**q))
    if masked_cells == 0:
        raise ExtensionError("domain contains no grid cells")
    numerator = sup if q == np.inf else (total * cellvol) ** (1.0 / q)
    denom = f.norm_lp(p)
    if g is not None:
        denom *= g.norm_lp(p)
    if denom == 0:
        raise ExtensionError("zero denominator: ||f||_p ||g||_p = 0")
    stats = {"sup": sup, "cells": masked_cells,
             "grid_counts": [c.tolist() for c in counts]}
    return numerator / denom, stats


def local_ratio(f: CapFunction, g: Optional[CapFunction], phi: EllipticPhase,
                p: float, q: float, R: float, grid_n=None,
                separation: float = 0.5) -> LocalizedRatio:
    """Localized estimate ratio over the ball B(0, R)."""
    if R < 1:
        raise ExtensionError("need R >= 1")
    bilinear = g is not None
    if bilinear:
        gap = _support_gap(f, g)
        if gap < separation - 1e-9:
            raise ExtensionError(
                f"cap supports separated by {gap} < required {separation}"
            )
    n = f.dim + 1
    ratio, _stats = domain_norm_ratio(
        f, g, phi, p, q, Ball(center=(0.0,) * n, radius=float(R)), grid_n=grid_n
    )
    return LocalizedRatio(p=p, q=q, R=float(R), value=ratio, bilinear=bilinear)


def _support_gap(f: CapFunction, g: CapFunction) -> float:
    lo1, hi1 = np.asarray(f.support_lo), np.asarray(f.support_hi)
    lo2, hi2 = np.asarray(g.support_lo), np.asarray(g.support_hi)
    gap = np.maximum(lo2 - hi1, lo1 - hi2)
    return float(np.linalg.norm(np.maximum(gap, 0.0)))


# ---------------------------------------------------------------------------
# annulus reformulation


def annulus_ratio(f_annulus: GridFunction, g_annulus: GridFunction, p: float,
                  R: float, phi: EllipticPhase = None,
                  thickness_constant: float = 4.0) -> float:
    """|| fhat ghat ||_{L^p(B(0,R))} normalized by R^{-1/p'} ||f||_p per factor.

    Inputs must be supported on the thickened graphs
    A^R = {(x_, Phi(x_) + t): |t| <= thickness_constant / R}.
    """
    from .geometry import quadratic_phase

    if phi is None:
        phi = quadratic_phase(f_annulus.ndim - 1)
    for u in (f_annulus, g_annulus):
        centers = u.centers()
        live = np.abs(u.samples).reshape(-1) > 0
        if np.any(live):
            pts = centers[live]
            dev = np.abs(pts[:, -1] - phi(pts[:, :-1]))
            if float(dev.max()) > thickness_constant / R + 1e-9:
                raise ExtensionError("input not supported on the R^{-1} graph annulus")
    norm_f = lp_norm(f_annulus, p)
    norm_g = lp_norm(g_annulus, p)
    if norm_f == 0 or norm_g == 0:
        raise ExtensionError("zero denominator")
    n = f_annulus.ndim
    axes = [_axis_cover(-R, R, DOMAIN_SPACING) for _ in range(n)]
    xi = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    inside = np.sum(xi * xi, axis=1) <= R * R
    xi = xi[inside]

    def hat(u: GridFunction) -> np.ndarray:
        centers = u.centers()
        vals = u.samples.reshape(-1) * u.cell_measure
        live = np.abs(vals) > 0
        centers, vals = centers[live], vals[live]
        out = np.zeros(xi.shape[0], dtype=complex)
        chunk = max(1, (1 << 22) // max(1, centers.shape[0]))
        for s in range(0, xi.shape[0], chunk):
            out[s:s + chunk] = np.exp(
                -TWO_PI * 1j * (xi[s:s + chunk] @ centers.T)
            ) @ vals
        return out

    prod = np.abs(hat(f_annulus) * hat(g_annulus))
    if p == np.inf:
        numerator = float(prod.max())
    else:
        numerator = float((np.sum(prod**p) * DOMAIN_SPACING**n) ** (1.0 / p))
    inv_p_prime = 1.0 - 1.0 / p
    denom = (R**-inv_p_prime * norm_f) * (R**-inv_p_prime * norm_g)
    return numerator / denom


# ---------------------------------------------------------------------------
# rotational curvature


def rotational_curvature(phi: EllipticPhase, y, w, step: float = 1e-5) -> float:
    """Bordered determinant det [[phi, phi_y], [phi_w, phi_yw]] for the
    defining function phi(y, w) = Phi(y) - Phi(y-w) - Phi(w).

    First derivatives come from the phase gradient; the mixed block
    phi_yw = Hess Phi(y-w) is formed by central differences of the gradient
    at the given step.
    """
    y = np.asarray(y, dtype=float).reshape(1, -1)
    w = np.asarray(w, dtype=float).reshape(1, -1)
    d = y.shape[1]
    val = float(phi(y)[0] - phi(y - w)[0] - phi(w)[0])
    phi_y = (phi.grad(y) - phi.grad(y - w))[0]
    phi_w = (phi.grad(y - w) - phi.grad(w))[0]
    u = y - w
    hess = np.empty((d, d))
    for a in range(d):
        e = np.zeros((1, d))
        e[0, a] = step
        hess[:, a] = (phi.grad(u + e) - phi.grad(u - e))[0] / (2 * step)
    bordered = np.empty((d + 1, d + 1))
    bordered[0, 0] = val
    bordered[0, 1:] = phi_y
    bordered[1:, 0] = phi_w
    bordered[1:, 1:] = hess
    return float(np.linalg.det(bordered))
