"""Dyadic cubes on Q = [-1,1]^{n-1}, close-pair structure, delta-nets,
slanted tubes with intersection volumes, and parabolic phase rescaling.

Level convention: level-j cubes have sidelength 2^-j, so level j partitions
Q into 2^{(j+1)(n-1)} cubes (level 0 has 2^{n-1} unit cubes).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_BALL_VOLUME = {0: 1.0, 1: 2.0, 2: math.pi, 3: 4 * math.pi / 3}


def unit_ball_volume(k: int) -> float:
    if k in _BALL_VOLUME:
        return _BALL_VOLUME[k]
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


class GeometryError(ValueError):
    pass


class DepthExceededError(GeometryError):
    pass


class DegenerateInputError(GeometryError):
    pass


# ---------------------------------------------------------------------------
# dyadic cubes and the close-pair (Whitney) structure


@dataclass(frozen=True)
class DyadicCube:
    level_j: int
    index_k: tuple

    def __post_init__(self):
        top = 2 ** (self.level_j + 1)
        if not all(0 <= k < top for k in self.index_k):
            raise GeometryError(f"index {self.index_k} out of range at level {self.level_j}")

    @property
    def sidelength(self) -> float:
        return 2.0 ** (-self.level_j)

    def bounds(self):
        """Per-axis (lo, hi); cubes tile [-1,1]^{n-1}."""
        s = self.sidelength
        return [(-1.0 + k * s, -1.0 + (k + 1) * s) for k in self.index_k]

    def parent(self) -> "DyadicCube":
        if self.level_j == 0:
            raise GeometryError("level-0 cube has no parent")
        return DyadicCube(self.level_j - 1, tuple(k // 2 for k in self.index_k))

    def contains(self, x) -> bool:
        return all(lo <= xi < hi for (lo, hi), xi in zip(self.bounds(), x))


def dyadic_cubes(n: int, j: int) -> list:
    """All level-j cubes partitioning [-1,1]^{n-1}."""
    if j < 0:
        raise GeometryError("need j >= 0")
    top = 2 ** (j + 1)
    return [DyadicCube(j, idx) for idx in itertools.product(range(top), repeat=n - 1)]


def _adjacent(k1: tuple, k2: tuple) -> bool:
    # closures intersect; a cube is adjacent to itself
    return all(abs(a - b) <= 1 for a, b in zip(k1, k2))


def cubes_close(c1: DyadicCube, c2: DyadicCube) -> bool:
    """Not adjacent, but the parents are adjacent."""
    if c1.level_j != c2.level_j or c1.level_j == 0:
        return False
    if _adjacent(c1.index_k, c2.index_k):
        return False
    return _adjacent(tuple(k // 2 for k in c1.index_k),
                     tuple(k // 2 for k in c2.index_k))


def close_pairs(n: int, j: int) -> list:
    """All ordered close pairs at level j."""
    if j < 1:
        raise GeometryError("close pairs need j >= 1 (parents must exist)")
    out = []
    top = 2 ** (j + 1)
    for k1 in itertools.product(range(top), repeat=n - 1):
        p1 = tuple(k // 2 for k in k1)
        # parents adjacent restricts k2 to a 6-wide window per axis
        ranges = [range(max(0, 2 * (p - 1)), min(top, 2 * (p + 2))) for p in p1]
        for k2 in itertools.product(*ranges):
            if _adjacent(k1, k2):
                continue
            p2 = tuple(k // 2 for k in k2)
            if _adjacent(p1, p2):
                out.append((DyadicCube(j, k1), DyadicCube(j, k2)))
    return out


def _locate_index(x: float, j: int) -> int:
    return int(math.floor((x + 1.0) * 2 ** j))


def whitney_locate(x, y, max_level: int):
    """The unique level j and close pair with x in the first, y in the second.

    Inputs must avoid dyadic hyperplanes up to max_level; points closer than
    the max-level resolution raise DepthExceededError.
    """
    x = tuple(float(v) for v in np.atleast_1d(x))
    y = tuple(float(v) for v in np.atleast_1d(y))
    for pt in (x, y):
        for v in pt:
            if not -1.0 <= v <= 1.0:
                raise GeometryError(f"point {pt} outside Q")
            scaled = (v + 1.0) * 2 ** max_level
            if scaled == math.floor(scaled):
                raise DegenerateInputError(f"coordinate {v} on a dyadic boundary")
    for j in range(1, max_level + 1):
        k1 = tuple(_locate_index(v, j) for v in x)
        k2 = tuple(_locate_index(v, j) for v in y)
        if not _adjacent(k1, k2):
            c1, c2 = DyadicCube(j, k1), DyadicCube(j, k2)
            if not cubes_close(c1, c2):  # cannot happen: level j-1 was adjacent
                raise GeometryError("close-pair structure violated")
            return j, c1, c2
    raise DepthExceededError(
        f"points are adjacent at level {max_level}; |x-y| too small"
    )


# ---------------------------------------------------------------------------
# elliptic phases


@dataclass
class EllipticPhase:
    """Phase on Q with Hessian eigenvalues pinned to [1-eps0, 1+eps0].

    evaluator takes an (m, n-1) array of points and returns (m,) values;
    gradient/hessian, when given, are exact and vectorized the same way.
    """

    evaluator: Callable
    bound_A: float
    smoothness_N: int
    eps0: float
    dim: int  # n - 1
    gradient: Optional[Callable] = None
    hessian: Optional[Callable] = None
    tag: str = "generic"  # "quadratic" unlocks separable evaluation

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self.evaluator(pts)

    def grad(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.gradient is not None:
            return self.gradient(pts)
        return _fd_gradient(self.evaluator, pts)

    def hess(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.hessian is not None:
            return self.hessian(pts)
        if self.gradient is not None:
            return _fd_jacobian(self.gradient, pts)
        return _fd_hessian(self.evaluator, pts)

    def max_gradient_norm(self, samples_per_axis: int = 9) -> float:
        g = self.grad(_sample_grid(self.dim, samples_per_axis))
        return float(np.max(np.linalg.norm(g, axis=-1)))

    def validate(self, samples_per_axis: int = 9, tol: float = 1e-6):
        """Check the defining properties on a sample grid; raise on failure."""
        zero = np.zeros((1, self.dim))
        if abs(float(self(zero)[0])) > tol:
            raise GeometryError("phase does not vanish at 0")
        if float(np.max(np.abs(self.grad(zero)))) > tol:
            raise GeometryError("phase gradient does not vanish at 0")
        H = self.hess(_sample_grid(self.dim, samples_per_axis))
        eigs = np.linalg.eigvalsh(H)
        lo, hi = float(eigs.min()), float(eigs.max())
        if lo < 1 - self.eps0 - tol or hi > 1 + self.eps0 + tol:
            raise GeometryError(
                f"Hessian eigenvalues [{lo}, {hi}] escape [1-eps0, 1+eps0]"
            )
        return lo, hi


def _sample_grid(dim: int, per_axis: int) -> np.ndarray:
    axes = [np.linspace(-1.0, 1.0, per_axis)] * dim
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)


_FD_STEP = 1e-5


def _fd_gradient(f, pts, h=_FD_STEP):
    m, d = pts.shape
    out = np.empty((m, d))
    for a in range(d):
        e = np.zeros(d)
        e[a] = h
        out[:, a] = (f(pts + e) - f(pts - e)) / (2 * h)
    return out


def _fd_jacobian(gradf, pts, h=_FD_STEP):
    m, d = pts.shape
    out = np.empty((m, d, d))
    for a in range(d):
        e = np.zeros(d)
        e[a] = h
        out[:, :, a] = (gradf(pts + e) - gradf(pts - e)) / (2 * h)
    return 0.5 * (out + np.swapaxes(out, 1, 2))


def _fd_hessian(f, pts, h=1e-4):
    # value-based second differences lose ~eps/h^2; only a fallback
    m, d = pts.shape
    out = np.empty((m, d, d))
    for a in range(d):
        ea = np.zeros(d)
        ea[a] = h
        out[:, a, a] = (f(pts + ea) - 2 * f(pts) + f(pts - ea)) / h**2
        for b in range(a + 1, d):
            eb = np.zeros(d)
            eb[b] = h
            mixed = (
                f(pts + ea + eb) - f(pts + ea - eb)
                - f(pts - ea + eb) + f(pts - ea - eb)
            ) / (4 * h**2)
            out[:, a, b] = mixed
            out[:, b, a] = mixed
    return out


def quadratic_phase(dim: int) -> EllipticPhase:
    """The model phase |x|^2 / 2."""
    return EllipticPhase(
        evaluator=lambda p: 0.5 * np.sum(p * p, axis=-1),
        gradient=lambda p: p.copy(),
        hessian=lambda p: np.broadcast_to(np.eye(p.shape[-1]), (p.shape[0], p.shape[-1], p.shape[-1])).copy(),
        bound_A=2.0,
        smoothness_N=1000,
        eps0=0.0,
        dim=dim,
        tag="quadratic",
    )


_BUMP_CENTERS = {
    1: [(0.35,), (-0.55,)],
    2: [(0.35, -0.2), (-0.55, 0.4), (0.15, 0.6)],
}
_BUMP_WEIGHTS = {1: [0.6, -0.5], 2: [0.6, -0.5, 0.45]}
_BUMP_SIGMA = 0.55


def perturbed_phase(dim: int, eps0: float) -> EllipticPhase:
    """|x|^2/2 + eps0 * psi(x) with psi a fixed Gaussian-bump combination.

    psi has psi(0) = 0, grad psi(0) = 0 and Hessian operator norm <= 1 on Q,
    so the Hessian eigenvalues stay in [1-eps0, 1+eps0].
    """
    centers = np.array(_BUMP_CENTERS[dim], dtype=float)
    weights = np.array(_BUMP_WEIGHTS[dim], dtype=float)
    sig2 = _BUMP_SIGMA**2

    def raw(p):
        # sum_k w_k sig2 exp(-|p - z_k|^2 / (2 sig2))
        d2 = np.sum((p[:, None, :] - centers[None, :, :]) ** 2, axis=-1)
        return sig2 * np.sum(weights * np.exp(-d2 / (2 * sig2)), axis=-1)

    def raw_grad(p):
        diff = p[:, None, :] - centers[None, :, :]
        g = np.exp(-np.sum(diff**2, axis=-1) / (2 * sig2))
        return -np.sum(weights[None, :, None] * g[:, :, None] * diff, axis=1)

    def raw_hess(p):
        diff = p[:, None, :] - centers[None, :, :]
        g = np.exp(-np.sum(diff**2, axis=-1) / (2 * sig2))
        eye = np.eye(dim)
        outer = diff[:, :, :, None] * diff[:, :, None, :] / sig2
        terms = weights[None, :, None, None] * g[:, :, None, None] * (outer - eye)
        return np.sum(terms, axis=1)

    # normalize so the Hessian 2-norm of psi is exactly <= 1 on Q
    grid = _sample_grid(dim, 41)
    H = raw_hess(grid)
    scale = float(np.max(np.abs(np.linalg.eigvalsh(H))))
    g0 = raw(np.zeros((1, dim)))[0]
    dg0 = raw_grad(np.zeros((1, dim)))[0]

    def psi(p):
        return (raw(p) - g0 - p @ dg0) / scale

    def psi_grad(p):
        return (raw_grad(p) - dg0) / scale

    def psi_hess(p):
        return raw_hess(p) / scale

    return EllipticPhase(
        evaluator=lambda p: 0.5 * np.sum(p * p, axis=-1) + eps0 * psi(p),
        gradient=lambda p: p + eps0 * psi_grad(p),
        hessian=lambda p: (
            np.broadcast_to(np.eye(dim), (p.shape[0], dim, dim)) + eps0 * psi_hess(p)
        ),
        bound_A=4.0,
        smoothness_N=1000,
        eps0=eps0,
        dim=dim,
    )


def parabolic_rescale(phi: EllipticPhase, j: int, center) -> EllipticPhase:
    """Recenter at `center`, strip value and gradient, and rescale:
    new(x) = 2^{2j} (Phi(c + 2^{-j} x) - Phi(c) - grad Phi(c) . 2^{-j} x).

    Ellipticity parameters are preserved (the Hessian is just resampled).
    """
    center = np.asarray(center, dtype=float).reshape(1, -1)
    if center.shape[1] != phi.dim:
        raise GeometryError("center dimension mismatch")
    lam = 2.0**j
    phi_c = float(phi(center)[0])
    grad_c = phi.grad(center)[0]
    if not np.all(np.isfinite([lam, phi_c])) or not np.all(np.isfinite(grad_c)):
        raise GeometryError("rescaled phase escapes numerical range")

    def ev(p):
        base = center + p / lam
        return lam**2 * (phi(base) - phi_c - (p / lam) @ grad_c)

    grad = None
    hess = None
    if phi.gradient is not None:
        def grad(p):
            return lam * (phi.grad(center + p / lam) - grad_c)
    if phi.hessian is not None:
        def hess(p):
            return phi.hess(center + p / lam)

    return EllipticPhase(
        evaluator=ev,
        gradient=grad,
        hessian=hess,
        bound_A=phi.bound_A,
        smoothness_N=phi.smoothness_N,
        eps0=phi.eps0,
        dim=phi.dim,
    )


# ---------------------------------------------------------------------------
# delta-nets and tubes


@dataclass
class DirectionNet:
    """Axis-aligned lattice delta-net of Q with two separated subsets."""

    delta: float
    points: np.ndarray          # (m, n-1), lexicographically ordered
    e1_indices: np.ndarray      # indices into points
    e2_indices: np.ndarray
    separation: float

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def e1(self) -> np.ndarray:
        return self.points[self.e1_indices]

    @property
    def e2(self) -> np.ndarray:
        return self.points[self.e2_indices]

    def nearest_index(self, x) -> int:
        d = np.linalg.norm(self.points - np.asarray(x, dtype=float), axis=1)
        return int(np.argmin(d))

    def to_json(self) -> dict:
        fmt = lambda v: float(f"{v:.17g}")
        return {
            "delta": fmt(self.delta),
            "separation": fmt(self.separation),
            "points": [[fmt(c) for c in p] for p in self.points],
            "e1_indices": self.e1_indices.tolist(),
            "e2_indices": self.e2_indices.tolist(),
        }


def build_net(n: int, delta: float, separation: float = 0.5) -> DirectionNet:
    """Lattice net delta Z^{n-1} cap Q, with E1/E2 the net points inside the
    sub-cubes of side 1/2 centered at -+ (1/2) e1."""
    if not (0 < delta <= 0.25):
        raise GeometryError("need 0 < delta <= 1/4")
    if not (0 < separation <= 1):
        raise GeometryError("need 0 < separation <= 1")
    dim = n - 1
    kmax = int(math.floor(1.0 / delta + 1e-9))
    axis = np.arange(-kmax, kmax + 1, dtype=float) * delta
    pts = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    # lexicographic order, first axis major
    order = np.lexsort(tuple(pts[:, a] for a in reversed(range(dim))))
    pts = pts[order]

    def in_subcube(center1):
        # half-open boxes keep the lattice count at exactly (2 delta)^{1-n},
        # so net-normalized direction measures carry no rounding bias
        ok = (pts[:, 0] >= center1 - 0.25 - 1e-12) & (pts[:, 0] < center1 + 0.25 - 1e-12)
        for a in range(1, dim):
            ok &= (pts[:, a] >= -0.25 - 1e-12) & (pts[:, a] < 0.25 - 1e-12)
        return np.nonzero(ok)[0]

    e1 = in_subcube(-0.5)
    e2 = in_subcube(+0.5)
    if len(e1) == 0 or len(e2) == 0:
        raise GeometryError(f"delta = {delta} too coarse to populate E1/E2")
    net = DirectionNet(delta=float(delta), points=pts,
                       e1_indices=e1, e2_indices=e2, separation=float(separation))
    gap = np.min(net.e2[:, 0]) - np.max(net.e1[:, 0])
    if gap < separation - 1e-12:
        raise GeometryError("E1/E2 separation not met")
    return net


@dataclass(frozen=True)
class Tube:
    """T = {(y_, y_n): |y_n| <= 1, ||y_ - y_n omega - i|| <= delta}."""

    direction_omega: tuple
    base_i: tuple
    delta: float

    @property
    def dim(self) -> int:
        return len(self.direction_omega)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (m, n) array of points."""
        pts = np.atleast_2d(pts)
        y_, yn = pts[:, :-1], pts[:, -1]
        omega = np.asarray(self.direction_omega)
        base = np.asarray(self.base_i)
        dev = y_ - yn[:, None] * omega[None, :] - base[None, :]
        return (np.abs(yn) <= 1.0) & (np.sum(dev * dev, axis=1) <= self.delta**2)

    def bounding_box(self):
        """Axis-aligned box containing the tube."""
        omega = np.asarray(self.direction_omega)
        base = np.asarray(self.base_i)
        lo = base - np.abs(omega) - self.delta
        hi = base + np.abs(omega) + self.delta
        return np.append(lo, -1.0), np.append(hi, 1.0)

    def to_json(self) -> dict:
        fmt = lambda v: float(f"{v:.17g}")
        return {
            "omega": [fmt(v) for v in self.direction_omega],
            "base": [fmt(v) for v in self.base_i],
            "delta": fmt(self.delta),
        }


def tube_volume(t: Tube, n: int) -> float:
    """2 v_{n-1} delta^{n-1}; the shear does not change cross-sections."""
    return 2.0 * unit_ball_volume(n - 1) * t.delta ** (n - 1)


def _axis_distance(t1: Tube, t2: Tube):
    """Coefficients of d(t) = || (i1-i2) + t (w1-w2) ||."""
    di = np.asarray(t1.base_i) - np.asarray(t2.base_i)
    dw = np.asarray(t1.direction_omega) - np.asarray(t2.direction_omega)
    return di, dw


def _overlap_interval(t1: Tube, t2: Tube):
    """The y_n interval on which cross-sections can overlap (d(t) <= 2 delta),
    intersected with [-1, 1]; returns None when empty."""
    di, dw = _axis_distance(t1, t2)
    r = t1.delta + t2.delta
    a = float(dw @ dw)
    b = 2.0 * float(di @ dw)
    c = float(di @ di) - r * r
    if a < 1e-30:
        if c > 0:
            return None
        return (-1.0, 1.0)
    disc = b * b - 4 * a * c
    if disc < 0:
        return None
    s = math.sqrt(disc)
    lo, hi = (-b - s) / (2 * a), (-b + s) / (2 * a)
    lo, hi = max(lo, -1.0), min(hi, 1.0)
    if lo >= hi:
        return None
    return (lo, hi)


def _lens_area(d: np.ndarray, r: float) -> np.ndarray:
    """Area of the intersection of two discs of radius r at center distance d."""
    d = np.asarray(d, dtype=float)
    out = np.zeros_like(d)
    mask = d < 2 * r
    dm = np.clip(d[mask], 0.0, 2 * r)
    half = dm / (2 * r)
    out[mask] = 2 * r * r * np.arccos(half) - 0.5 * dm * np.sqrt(
        np.maximum(4 * r * r - dm * dm, 0.0)
    )
    return out


def tube_intersection_exact(t1: Tube, t2: Tube, n: int) -> float:
    """|T1 cap T2| via cross-section overlap.

    n=2: closed-form integral of the interval overlap max(0, 2 delta - |d(t)|).
    n=3: fixed-order quadrature of the two-disc lens area (d(t) is smooth and
    the integrand is piecewise smooth; 4096 midpoint nodes on the overlap
    interval keep the error far below the tolerances used by callers).
    """
    if t1.delta != t2.delta:
        raise GeometryError("tubes must share delta")
    iv = _overlap_interval(t1, t2)
    if iv is None:
        return 0.0
    lo, hi = iv
    di, dw = _axis_distance(t1, t2)
    if n == 2:
        # integrand max(0, 2 delta - |di + t dw|) is piecewise linear in t
        r = 2 * t1.delta
        a, b = float(dw[0]), float(di[0])
        if a == 0.0:
            return max(0.0, r - abs(b)) * (hi - lo)
        # kinks where |a t + b| = 0
        knots = sorted({lo, hi, min(max(-b / a, lo), hi)})
        total = 0.0
        for u, v in zip(knots[:-1], knots[1:]):
            mid = 0.5 * (u + v)
            val_mid = r - abs(a * mid + b)
            if val_mid <= 0:
                continue
            # linear on this piece: integrate exactly via endpoint mean
            vu = r - abs(a * u + b)
            vv = r - abs(a * v + b)
            total += 0.5 * (vu + vv) * (v - u)
        return total
    if n == 3:
        m = 4096
        t = lo + (np.arange(m) + 0.5) * (hi - lo) / m
        d = np.sqrt(
            (di[0] + t * dw[0]) ** 2 + (di[1] + t * dw[1]) ** 2
        )
        return float(np.sum(_lens_area(d, t1.delta)) * (hi - lo) / m)
    raise GeometryError("exact intersection implemented for n in {2, 3}")


def tube_intersection_volume(t1: Tube, t2: Tube, n: int, mc_samples: int, seed: int):
    """Monte-Carlo |T1 cap T2| with standard error.

    Samples uniformly from a tight axis-aligned box that contains the
    intersection (the y_n overlap interval crossed with the T1 slab there),
    so the estimate stays informative for small delta.
    """
    if mc_samples < 1000:
        raise GeometryError("mc_samples must be >= 1000")
    if t1.delta != t2.delta:
        raise GeometryError("tubes must share delta")
    iv = _overlap_interval(t1, t2)
    if iv is None:
        return 0.0, 0.0
    lo, hi = iv
    omega1 = np.asarray(t1.direction_omega)
    base1 = np.asarray(t1.base_i)
    # T1's spatial extent over [lo, hi]
    c_lo = base1 + lo * omega1
    c_hi = base1 + hi * omega1
    box_lo = np.minimum(c_lo, c_hi) - t1.delta
    box_hi = np.maximum(c_lo, c_hi) + t1.delta
    lo_full = np.append(box_lo, lo)
    hi_full = np.append(box_hi, hi)
    vol_box = float(np.prod(hi_full - lo_full))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo_full, hi_full, size=(mc_samples, n))
    inside = t1.contains(pts) & t2.contains(pts)
    k = int(np.count_nonzero(inside))
    p_hat = k / mc_samples
    est = p_hat * vol_box
    # +1 pseudo-hit keeps the error bar honest when k == 0
    p_err = max(p_hat, 1.0 / mc_samples)
    stderr = vol_box * math.sqrt(p_err * (1 - p_hat) / mc_samples)
    return est, stderr
