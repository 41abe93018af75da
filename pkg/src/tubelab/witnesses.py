"""Extremizing cap families for the product-estimate necessity conditions,
scale sweeps of their localized norm ratios, and log-log power-law fits.

All families live on the paraboloid-graph parameter domain.  The separated
caps sit on Q1 = [-3/4,-1/4] x [-1/4,1/4]^{n-2} and its mirror Q2; the
distinguished plane factor of the construction is realized as the first
parameter axis, so its dual pair is the (x_1, x_n) plane."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .extension import (CapFunction, EllipticPhase, domain_norm_ratio,
                        evaluate_extension, required_grid_n)
from .fields import Box, CylinderDomain
from .geometry import quadratic_phase

C0_MODULATED = "c0-modulated"
C1_SQUASHED = "c1-squashed"
C2_STRETCHED = "c2-stretched"
KNAPP_CLASSIC = "knapp-classic"
_FAMILIES = (C0_MODULATED, C1_SQUASHED, C2_STRETCHED, KNAPP_CLASSIC)

#: the box constant of the no-cancellation region (exposed as a flag in the CLI)
DEFAULT_BOX_CONSTANT = 8.0

CAP_CENTER = 0.5  # first-axis distance of each cap center from the origin
CAP_HALF = 0.25


class WitnessError(ValueError):
    pass


class ModulationSearchError(WitnessError):
    """The phase-shift search failed to reach the predicted amplitude."""


@dataclass(frozen=True)
class ShearedBox:
    """{ |x_1 + shear * x_n| <= w1, |x_mid| <= w_mid, |x_n| <= w_n }."""

    shear: float
    w1: float
    w_mid: tuple
    w_n: float

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        ok = np.abs(pts[:, 0] + self.shear * pts[:, -1]) <= self.w1
        for a, w in enumerate(self.w_mid):
            ok &= np.abs(pts[:, a + 1]) <= w
        ok &= np.abs(pts[:, -1]) <= self.w_n
        return ok

    def bounding_box(self):
        lo = [-(self.w1 + abs(self.shear) * self.w_n)]
        hi = [self.w1 + abs(self.shear) * self.w_n]
        for w in self.w_mid:
            lo.append(-w)
            hi.append(w)
        lo.append(-self.w_n)
        hi.append(self.w_n)
        return np.asarray(lo), np.asarray(hi)


@dataclass
class WitnessFamily:
    kind: str
    n: int
    scale: float
    parameters: dict


@dataclass
class PowerLawFit:
    slope: float
    intercept: float
    max_residual: float
    points: List[Tuple[float, float]]

    def __post_init__(self):
        if len(self.points) < 2:
            raise WitnessError("need at least two points")
        scales = [s for s, _v in self.points]
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise WitnessError("scales must be strictly increasing")


def fit_power_law(points) -> PowerLawFit:
    """Least-squares line through (log2 scale, log2 value)."""
    pts = sorted((float(s), float(v)) for s, v in points)
    if len(pts) < 2:
        raise WitnessError("need at least two points")
    if any(v <= 0 for _s, v in pts):
        raise WitnessError("values must be positive for a log-log fit")
    xs = np.log2([s for s, _v in pts])
    ys = np.log2([v for _s, v in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    return PowerLawFit(slope=float(slope), intercept=float(intercept),
                       max_residual=float(np.max(np.abs(resid))),
                       points=pts)


def _cap_support(center1: float, half1: float, n: int, half_rest: float):
    lo = [center1 - half1] + [-half_rest] * (n - 2)
    hi = [center1 + half1] + [half_rest] * (n - 2)
    return tuple(lo), tuple(hi)


def predicted_exponent(kind: str, n: int, p: float, q: float) -> float:
    """Scale exponent of the witness ratio, arranged so that the exponent is
    >= 0 exactly when the corresponding feasibility condition holds.  For the
    modulated family the scale variable is 1/R; for the rest it is delta."""
    if kind == C0_MODULATED:
        return (n - 1) - n / q
    if kind == C1_SQUASHED:
        return 2 * n - (n + 2) / q - 2 * n / p
    if kind == C2_STRETCHED:
        return 2 * (n - 1) - (n + 2) / q - 2 * (n - 2) / p
    if kind == KNAPP_CLASSIC:
        return (n - 1) - (n + 1) / q - (n - 1) / p
    raise WitnessError(f"unknown family {kind!r}")


def _search_modulation(cap: CapFunction, phi: EllipticPhase, seed: np.ndarray,
                       radius: float, probes: np.ndarray, active_axes,
                       lattice: int = 9) -> Tuple[np.ndarray, float]:
    """Pick the modulation that maximizes the minimum field amplitude over
    the probe points; the candidate lattice is centered on the analytic seed."""
    n = seed.size
    offsets = np.linspace(-radius, radius, lattice)
    best_x0, best_score = None, -1.0
    grids = np.meshgrid(*[offsets] * len(active_axes), indexing="ij")
    cand_offsets = np.stack([g.reshape(-1) for g in grids], axis=-1)
    for off in cand_offsets:
        x0 = seed.copy()
        for a, da in zip(active_axes, off):
            x0[a] += da
        trial = CapFunction(cap.support_lo, cap.support_hi, tuple(x0),
                            cap.density, cap.amplitude)
        gn = required_grid_n(trial, phi, probes)
        vals = np.abs(evaluate_extension(trial, phi, probes, gn))
        score = float(vals.min())
        if score > best_score:
            best_score = score
            best_x0 = x0
    return best_x0, best_score


def _probe_points(domain, n: int, shrink: float = 0.7) -> np.ndarray:
    lo, hi = domain.bounding_box()
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * shrink
    axes = [np.array([c - h, c, c + h]) for c, h in zip(center, half)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    return pts[domain.contains(pts)]


def build_witness(kind: str, n: int, scale: float,
                  box_constant: float = DEFAULT_BOX_CONSTANT,
                  phi: Optional[EllipticPhase] = None):
    """Cap pair and the predicted no-cancellation region for one family.

    scale is delta for the cap families and R for the modulated family.
    The single-cap family returns g = None."""
    if kind not in _FAMILIES:
        raise WitnessError(f"unknown family {kind!r}")
    if phi is None:
        phi = quadratic_phase(n - 1)
    C = float(box_constant)
    if kind == C0_MODULATED:
        R = float(scale)
        if R < 4:
            raise WitnessError("need R >= 4")
        lo1, hi1 = _cap_support(-CAP_CENTER, CAP_HALF, n, CAP_HALF)
        lo2, hi2 = _cap_support(+CAP_CENTER, CAP_HALF, n, CAP_HALF)
        f = CapFunction(lo1, hi1)
        # the stationary bump has width ~ t^{-1/2}; placing the box at 3R
        # keeps it well inside the caps already at the smallest R
        t0 = 3.0 * R
        box_center = np.zeros(n)
        box_center[0] = CAP_CENTER * t0
        box_center[-1] = t0
        box = Box(tuple(box_center - R / 8), tuple(box_center + R / 8))
        seed = np.zeros(n)
        seed[0] = -2 * CAP_CENTER * t0
        probes = _probe_points(box, n)
        g0 = CapFunction(lo2, hi2)
        x0, score = _search_modulation(g0, phi, seed, R / 4, probes,
                                       active_axes=[0])
        predicted_amp = t0 ** (-(n - 1) / 2.0)
        if score < 0.5 * predicted_amp:
            raise ModulationSearchError(
                f"best amplitude {score:.3g} < half the predicted {predicted_amp:.3g}"
            )
        g = CapFunction(lo2, hi2, tuple(x0))
        return f, g, box
    delta = float(scale)
    if delta > 0.25:
        raise WitnessError("need delta <= 1/4")
    if kind == C1_SQUASHED:
        lo1, hi1 = _cap_support(-CAP_CENTER, delta**2, n, delta)
        lo2, hi2 = _cap_support(+CAP_CENTER, delta**2, n, delta)
        f = CapFunction(lo1, hi1)
        g = CapFunction(lo2, hi2)
        rho = 1.0 / (C * delta**2)
        box = CylinderDomain(disc_axes=(0, n - 1), disc_center=(0.0, 0.0),
                             disc_radius=rho,
                             rest_lo=(-1.0 / (C * delta),) * (n - 2),
                             rest_hi=(1.0 / (C * delta),) * (n - 2))
        return f, g, box
    if kind == C2_STRETCHED:
        if n < 3:
            raise WitnessError("the stretched family needs n >= 3")
        lo1, hi1 = _cap_support(-CAP_CENTER, CAP_HALF, n, delta)
        lo2, hi2 = _cap_support(+CAP_CENTER, CAP_HALF, n, delta)
        rho = 1.0 / (C * delta**2)
        shift = 8.0 * rho
        box = CylinderDomain(disc_axes=(0, n - 1), disc_center=(0.0, 0.0),
                             disc_radius=rho,
                             rest_lo=(-1.0 / (C * delta),) * (n - 2),
                             rest_hi=(1.0 / (C * delta),) * (n - 2))
        probes = _probe_points(box, n)
        predicted_amp = (2 * delta) ** (n - 2) * shift ** -0.5
        caps = []
        for sign, (lo, hi) in ((+1, (lo1, hi1)), (-1, (lo2, hi2))):
            seed = np.zeros(n)
            seed[0] = sign * shift / 2
            seed[-1] = shift
            cap0 = CapFunction(lo, hi)
            x0, score = _search_modulation(cap0, phi, seed, rho, probes,
                                           active_axes=[0, n - 1])
            if score < 0.25 * predicted_amp:
                raise ModulationSearchError(
                    f"best amplitude {score:.3g} < a quarter of {predicted_amp:.3g}"
                )
            caps.append(CapFunction(lo, hi, tuple(x0)))
        return caps[0], caps[1], box
    # single Knapp cap at the first cap center; its dual box is sheared by
    # the tangent slope there
    lo1, hi1 = _cap_support(-CAP_CENTER, delta / 2, n, delta / 2)
    f = CapFunction(lo1, hi1)
    box = ShearedBox(shear=-CAP_CENTER, w1=1.0 / (C * delta),
                     w_mid=(1.0 / (C * delta),) * (n - 2),
                     w_n=1.0 / (C * delta**2))
    return f, None, box


def witness_ratio(kind: str, n: int, scale: float, p: float, q: float,
                  grid_n: int = 16, grid_refine: int = 1,
                  box_constant: float = DEFAULT_BOX_CONSTANT,
                  phi: Optional[EllipticPhase] = None) -> float:
    """The localized product-norm ratio of a witness at one scale.

    grid_n floors the quadrature nodes per support axis; the oscillation
    guard raises it further where needed.  grid_refine scales all counts,
    for quadrature-independence checks."""
    f, g, box = build_witness(kind, n, scale, box_constant=box_constant, phi=phi)
    if phi is None:
        phi = quadratic_phase(n - 1)
    ratio, _stats = domain_norm_ratio(f, g, phi, p, q, box,
                                      min_nodes=grid_n, grid_refine=grid_refine)
    return ratio


def trace_caps(n: int, R: float) -> Tuple[CapFunction, CapFunction]:
    """Shrinking separated caps of half-side 1/R: the pair that drives the
    localized bilinear L^2 x L^2 -> L^1 growth at its full rate R."""
    a = 1.0 / R
    if a > CAP_HALF:
        raise WitnessError("need R >= 4")
    lo1, hi1 = _cap_support(-CAP_CENTER, a, n, a)
    lo2, hi2 = _cap_support(+CAP_CENTER, a, n, a)
    return CapFunction(lo1, hi1), CapFunction(lo2, hi2)


def run_sweep(kind: str, n: int, p: float, q: float, scales, grid_n: int = 16,
              grid_refine: int = 1, seed: int = 0,
              box_constant: float = DEFAULT_BOX_CONSTANT,
              phi: Optional[EllipticPhase] = None):
    """Witness ratios across scales plus the log-log fit.

    Returns (fit, rows) where rows are (scale, ratio) in the given scale
    variable.  For the modulated family the fit abscissa is 1/R, matching
    the sign convention of predicted_exponent."""
    scales = sorted(float(s) for s in scales)
    if len(scales) < 3:
        raise WitnessError("need at least three scales")
    for a, b in zip(scales, scales[1:]):
        if not math.isclose(b / a, 2.0, rel_tol=1e-9):
            raise WitnessError("scales must be dyadically spaced")
    rows = []
    for s in scales:
        ratio = witness_ratio(kind, n, s, p, q, grid_n=grid_n,
                              grid_refine=grid_refine,
                              box_constant=box_constant, phi=phi)
        rows.append((s, ratio))
    if kind == C0_MODULATED:
        fit_pts = sorted((1.0 / s, v) for s, v in rows)
    else:
        fit_pts = rows
    fit = fit_power_law(fit_pts)
    return fit, rows
