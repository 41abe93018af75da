"""Discretized tube transform X, its adjoint X*, the linear and bilinear
tube-maximal norm ratios, the inner-product constant, and the necessity
witness configurations.

Rasterization convention: a grid cell belongs to a tube iff its center does.
The transform guard requires grid spacing <= delta/4 so the delta-wide
cross-section is resolved by at least four cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import GridFunction, NetFunction, SUM_I, SUP_I, lp_norm, mixed_norm
from .geometry import DirectionNet, Tube, tube_intersection_exact

class XrayError(ValueError):
    pass


@dataclass
class XrayField:
    net: DirectionNet
    delta: float
    values: NetFunction

    def __post_init__(self):
        if abs(self.delta - self.net.delta) > 1e-12:
            raise XrayError("delta does not match the net")

    def entries(self):
        """(omega point, base point, value) triples."""
        pts = self.net.points
        return [(pts[w], pts[i], v) for (w, i), v in sorted(self.values.values.items())]

    def norm_l1l1(self) -> float:
        """L^1_omega L^1_i with the normalized direction measure."""
        return self.net.delta**self.net.dim * self.values.total()

    def to_json(self) -> dict:
        return {"delta": float(self.delta), "values": self.values.to_json()}


@dataclass
class KakeyaRatio:
    p: float
    q: float
    delta: float
    value: float
    bilinear: bool

    def __post_init__(self):
        if self.value < 0:
            raise XrayError("ratio must be nonnegative")


def _check_spacing(spacing, delta):
    if max(spacing) > delta / 4 + 1e-12:
        raise XrayError(
            f"grid spacing {max(spacing)} too coarse; need <= delta/4 = {delta / 4}"
        )


def _candidate_base_indices(net: DirectionNet, omega: np.ndarray, lo, hi):
    """Net points i for which the tube T_omega^i can meet the box [lo, hi]."""
    pts = net.points
    t_lo, t_hi = max(-1.0, lo[-1]), min(1.0, hi[-1])
    if t_lo > t_hi:
        return np.empty(0, dtype=int)
    ok = np.ones(len(pts), dtype=bool)
    for a in range(net.dim):
        reach = (min(t_lo * omega[a], t_hi * omega[a]),
                 max(t_lo * omega[a], t_hi * omega[a]))
        ok &= pts[:, a] >= lo[a] - net.delta - reach[1]
        ok &= pts[:, a] <= hi[a] + net.delta - reach[0]
    return np.nonzero(ok)[0]


def xray_transform(f: GridFunction, net: DirectionNet) -> XrayField:
    """X f(omega, i) = delta^{1-n} * (midpoint quadrature of f over the tube).

    Only tubes that can meet the support box of f are evaluated; all other
    values vanish identically and are left out of the sparse field.
    """
    delta = net.delta
    _check_spacing(f.spacing, delta)
    n = f.ndim
    if n - 1 != net.dim:
        raise XrayError("grid dimension does not match net")
    centers = f.centers()
    vals = np.real(f.samples).reshape(-1)
    live = np.abs(f.samples.reshape(-1)) > 0
    centers, vals = centers[live], vals[live]
    if centers.shape[0] == 0:
        return XrayField(net, delta, NetFunction(net, {}))
    lo = centers.min(axis=0)
    hi = centers.max(axis=0)
    keep_t = np.abs(centers[:, -1]) <= 1.0
    centers, vals = centers[keep_t], vals[keep_t]
    scale = delta ** (1 - n) * f.cell_measure
    out = {}
    x_, yn = centers[:, :-1], centers[:, -1]
    for w_idx, omega in enumerate(net.points):
        cand = _candidate_base_indices(net, omega, lo, hi)
        if cand.size == 0:
            continue
        c = x_ - yn[:, None] * omega[None, :]
        dev = c[:, None, :] - net.points[cand][None, :, :]
        inside = (np.sum(dev * dev, axis=2) <= delta**2).astype(float)
        sums = inside.T @ vals
        for k, i_idx in enumerate(cand):
            if sums[k] != 0.0:
                out[(w_idx, int(i_idx))] = float(sums[k] * scale)
    return XrayField(net, delta, NetFunction(net, out))


def _slab_rasterize(entries, delta, x_axes, yn, out):
    """Add value * chi_tube to `out` on the x-grid at height yn."""
    steps = [ax[1] - ax[0] if len(ax) > 1 else 1.0 for ax in x_axes]
    for omega, base, value in entries:
        center = base + yn * omega
        sel = []
        okay = True
        for a, ax in enumerate(x_axes):
            lo = int(np.searchsorted(ax, center[a] - delta - 1e-12))
            hi = int(np.searchsorted(ax, center[a] + delta + 1e-12))
            if lo >= hi:
                okay = False
                break
            sel.append((lo, hi))
        if not okay:
            continue
        local = [x_axes[a][lo:hi] - center[a] for a, (lo, hi) in enumerate(sel)]
        if len(local) == 1:
            mask = local[0] ** 2 <= delta**2
            out[sel[0][0]:sel[0][1]][mask] += value
        else:
            d2 = local[0][:, None] ** 2 + local[1][None, :] ** 2
            mask = d2 <= delta**2
            block = out[sel[0][0]:sel[0][1], sel[1][0]:sel[1][1]]
            block[mask] += value


def xray_adjoint(g: XrayField, grid: GridFunction) -> GridFunction:
    """X* g = sum over (omega, i) of g(omega, i) chi_tube, rasterized on the
    template grid (counting-measure form of the adjoint)."""
    _check_spacing(grid.spacing, g.delta)
    n = grid.ndim
    if n - 1 != g.net.dim:
        raise XrayError("grid dimension does not match net")
    entries = g.entries()
    x_axes = [grid.axis_centers(a) for a in range(n - 1)]
    yn_axis = grid.axis_centers(n - 1)
    out = np.zeros(grid.dims, dtype=float)
    for s, yn in enumerate(yn_axis):
        if abs(yn) > 1.0:
            continue
        _slab_rasterize(entries, g.delta, x_axes, yn, out[..., s])
    return GridFunction(grid.dims, grid.origin, grid.spacing, out)


def _tube_union_box(field: XrayField, pad: float):
    lo = np.full(field.net.dim, np.inf)
    hi = np.full(field.net.dim, -np.inf)
    for omega, base, _v in field.entries():
        lo = np.minimum(lo, base - np.abs(omega) - field.delta)
        hi = np.maximum(hi, base + np.abs(omega) + field.delta)
    return lo - pad, hi + pad


def _adjoint_product_norms(F: XrayField, G: XrayField, exponents,
                           spacing: float):
    """|| X*F . X*G ||_s for each requested s, over a grid covering both
    tube unions, streamed one height slab at a time; also returns the
    plain inner product integral.  s = inf gives the sup."""
    delta = F.delta
    lo1, hi1 = _tube_union_box(F, spacing)
    lo2, hi2 = _tube_union_box(G, spacing)
    lo, hi = np.minimum(lo1, lo2), np.maximum(hi1, hi2)
    x_axes = []
    for a in range(F.net.dim):
        m = int(math.ceil((hi[a] - lo[a]) / spacing))
        x_axes.append(lo[a] + (np.arange(m) + 0.5) * spacing)
    m_n = int(math.ceil(2.0 / spacing))
    yn_axis = -1.0 + (np.arange(m_n) + 0.5) * (2.0 / m_n)
    cellvol = spacing ** F.net.dim * (2.0 / m_n)
    ent_f, ent_g = F.entries(), G.entries()
    shape = tuple(len(ax) for ax in x_axes)
    exponents = list(exponents)
    totals = {s: 0.0 for s in exponents}
    sup = 0.0
    inner = 0.0
    xf = np.zeros(shape)
    xg = np.zeros(shape)
    for yn in yn_axis:
        xf.fill(0.0)
        xg.fill(0.0)
        _slab_rasterize(ent_f, delta, x_axes, yn, xf)
        _slab_rasterize(ent_g, delta, x_axes, yn, xg)
        prod = xf * xg
        mx = float(prod.max(initial=0.0))
        sup = max(sup, mx)
        if mx > 0:
            pos = prod[prod > 0]
            inner += float(np.sum(pos)) * cellvol
            for s in exponents:
                if s != np.inf:
                    totals[s] += float(np.sum(pos**s)) * cellvol
    norms = {s: (sup if s == np.inf else totals[s] ** (1.0 / s))
             for s in exponents}
    return norms, inner


def _adjoint_product_norm(F: XrayField, G: XrayField, exponent: float,
                          spacing: float):
    norms, inner = _adjoint_product_norms(F, G, [exponent], spacing)
    return norms[exponent], inner


def kakeya_ratio(f: GridFunction, net: DirectionNet, p: float, q: float) -> KakeyaRatio:
    """|| Xf ||_{L^q_omega L^inf_i} / (delta^{1 - n/p} ||f||_p)."""
    n = f.ndim
    denom_f = lp_norm(f, p)
    if denom_f == 0:
        raise XrayError("||f||_p = 0")
    xf = xray_transform(f, net)
    num = mixed_norm(xf.values, q, SUP_I)
    denom = net.delta ** (1.0 - n / p) * denom_f
    return KakeyaRatio(p=p, q=q, delta=net.delta, value=num / denom, bilinear=False)


def _check_support(field: XrayField, allowed: np.ndarray, name: str):
    allowed_set = set(int(a) for a in allowed)
    for (w, _i) in field.values.values:
        if w not in allowed_set:
            raise XrayError(f"{name} has direction support outside its set")


def bilinear_kakeya_ratios(F: XrayField, G: XrayField, pq_pairs,
                           spacing: Optional[float] = None):
    """|| X*F X*G ||_{p'/2} / (delta^{2 - 2n/p} ||F|| ||G||) for each (p, q),
    with the L^{q'}_omega L^1_i norms in the denominator.  The rasterized
    product field is shared across the exponent pairs."""
    if F.net is not G.net and abs(F.delta - G.delta) > 1e-12:
        raise XrayError("fields must share a net scale")
    _check_support(F, F.net.e1_indices, "F")
    _check_support(G, G.net.e2_indices, "G")
    n = F.net.dim + 1
    delta = F.delta
    if spacing is None:
        spacing = delta / 4
    _check_spacing([spacing], delta)
    pairs = list(pq_pairs)
    exps = {}
    for p, q in pairs:
        exps[(p, q)] = np.inf if p == 1 else (p / (p - 1)) / 2
    norms, _inner = _adjoint_product_norms(F, G, set(exps.values()), spacing)
    out = []
    for p, q in pairs:
        q_prime = np.inf if q == 1 else q / (q - 1)
        norm_f = mixed_norm(F.values, q_prime, SUM_I)
        norm_g = mixed_norm(G.values, q_prime, SUM_I)
        if norm_f == 0 or norm_g == 0:
            raise XrayError("zero denominator")
        denom = delta ** (2.0 - 2.0 * n / p) * norm_f * norm_g
        out.append(KakeyaRatio(p=p, q=q, delta=delta,
                               value=norms[exps[(p, q)]] / denom, bilinear=True))
    return out


def bilinear_kakeya_ratio(F: XrayField, G: XrayField, p: float, q: float,
                          spacing: Optional[float] = None) -> KakeyaRatio:
    return bilinear_kakeya_ratios(F, G, [(p, q)], spacing=spacing)[0]


@dataclass
class Prop111Result:
    grid_value: float
    pair_value: float
    delta: float

    @property
    def relative_gap(self) -> float:
        ref = max(self.grid_value, self.pair_value)
        if ref == 0:
            return 0.0
        return abs(self.grid_value - self.pair_value) / ref


def prop111_constant(F: XrayField, G: XrayField,
                     spacing: Optional[float] = None) -> Prop111Result:
    """<X*F, X*G> normalized by delta^{2-n} ||F||_{L1 L1} ||G||_{L1 L1},
    computed two ways: a grid inner product and the exact tube-pair sum
    sum F G |T cap T'| (cross-section overlap integrals)."""
    _check_support(F, F.net.e1_indices, "F")
    _check_support(G, G.net.e2_indices, "G")
    n = F.net.dim + 1
    delta = F.delta
    if spacing is None:
        spacing = delta / 8
    _check_spacing([spacing], delta)
    denom = delta ** (2.0 - n) * F.norm_l1l1() * G.norm_l1l1()
    if denom == 0:
        raise XrayError("zero denominator")
    _norm, inner = _adjoint_product_norm(F, G, 1.0, spacing)
    pair_sum = 0.0
    for omega1, base1, v1 in F.entries():
        t1 = Tube(tuple(omega1), tuple(base1), delta)
        for omega2, base2, v2 in G.entries():
            t2 = Tube(tuple(omega2), tuple(base2), delta)
            vol = tube_intersection_exact(t1, t2, n)
            if vol > 0:
                pair_sum += v1 * v2 * vol
    return Prop111Result(grid_value=inner / denom, pair_value=pair_sum / denom,
                         delta=delta)


# ---------------------------------------------------------------------------
# necessity witnesses

K0_DELTAS = "k0-deltas"
K1_SLAB = "k1-slab"
BUSH = "bush"


def _bush_cover_score(net: DirectionNet, base1, base2) -> int:
    """Probe-count of points inside both continuum direction cones.

    The score is deliberately independent of delta so that the chosen apex
    is stable across scales of a sweep."""
    dim = net.dim
    probes_axis = np.linspace(-1.2, 1.2, 25)
    t_axis = np.linspace(0.05, 1.0, 20)
    mesh = np.meshgrid(*([probes_axis] * dim + [t_axis]), indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, dim + 1)
    x_, t = pts[:, :-1], pts[:, -1]
    both = np.ones(len(pts), dtype=bool)
    for base, center1 in ((base1, -0.5), (base2, +0.5)):
        ratio = (x_ - np.asarray(base)) / t[:, None]
        ok = np.abs(ratio[:, 0] - center1) <= 0.25
        for a in range(1, dim):
            ok &= np.abs(ratio[:, a]) <= 0.25
        both &= ok
    return int(np.count_nonzero(both))


def kakeya_witness(kind: str, n: int, delta: float):
    """The necessity configurations: point-base direction bushes (k0),
    coplanar-direction slabs (k1), and the diagnostic bush.

    Returns (F, G, predicted) where predicted(p, q) is the delta-exponent
    the bilinear ratio should follow (>= 0 exactly when the corresponding
    feasibility condition holds).
    """
    from .geometry import build_net

    net = build_net(n, delta)
    origin_idx = net.nearest_index(np.zeros(net.dim))

    def field_from(omega_indices, base_idx):
        return XrayField(net, delta, NetFunction(
            net, {(int(w), int(base_idx)): 1.0 for w in omega_indices}
        ))

    if kind == K0_DELTAS:
        # bushes crossing at height ~ 3/4: base separation matching the
        # direction separation, refined over a coarse candidate lattice.
        # Restricting candidates to the 1/8-sublattice keeps the choice
        # identical across the deltas of a sweep.
        coarse = max(delta, 0.125)
        seed = np.zeros(net.dim)
        seed[0] = -0.75
        cands = []
        for i in range(len(net.points)):
            pt = net.points[i]
            on_coarse = all(abs(c / coarse - round(c / coarse)) < 1e-9 for c in pt)
            if on_coarse and np.linalg.norm(pt - seed) <= 0.3:
                cands.append(i)
        best = max(cands, key=lambda i: _bush_cover_score(
            net, np.zeros(net.dim), net.points[i]))
        F = field_from(net.e1_indices, origin_idx)
        G = field_from(net.e2_indices, best)

        def predicted(p, q):
            return 2.0 * n / p - 2.0

        return F, G, predicted
    if kind == K1_SLAB:
        def in_slab(idx):
            pt = net.points[idx]
            return all(abs(pt[a]) <= delta + 1e-12 for a in range(1, net.dim))

        e1 = [i for i in net.e1_indices if in_slab(i)]
        e2 = [i for i in net.e2_indices if in_slab(i)]
        b1 = np.zeros(net.dim)
        b1[0] = +0.5
        b2 = np.zeros(net.dim)
        b2[0] = -0.5
        F = field_from(e1, net.nearest_index(b1))
        G = field_from(e2, net.nearest_index(b2))

        def predicted(p, q):
            return 2.0 * ((n - 2) / q + 2.0 / p - 1.0)

        return F, G, predicted
    if kind == BUSH:
        F = field_from(net.e1_indices, origin_idx)
        G = field_from(net.e2_indices, origin_idx)

        def predicted(p, q):
            return 2.0 * n / p - 2.0

        return F, G, predicted
    raise XrayError(f"unknown witness kind {kind!r}")


DELTA_BALL = "delta-ball"


def delta_ball_ratio(n: int, p: float, q: float, delta: float,
                     resolution: int = 8) -> KakeyaRatio:
    """Tube-maximal ratio for the delta-ball input, the sharpness witness
    for the delta^{1 - n/p} normalization."""
    from .geometry import build_net
    from .fields import grid_from_sampler

    net = build_net(n, delta)
    h = delta / resolution
    pad = delta + 2 * h

    def sampler(pts):
        return (np.sum(pts * pts, axis=1) <= delta**2).astype(complex)

    m = int(math.ceil(2 * pad / h))
    f = grid_from_sampler(sampler, [-pad] * n, [pad] * n, [m] * n)
    return kakeya_ratio(f, net, p, q)


def run_kakeya_sweep(kind: str, n: int, p: float, q: float, deltas,
                     resolution: int = 8):
    """Ratio observations across delta for a witness family, with the
    predicted exponent; fitting is left to the caller (see witnesses)."""
    rows, preds = run_kakeya_sweep_multi(kind, n, [(p, q)], deltas,
                                         resolution=resolution)
    return rows[(p, q)], preds[(p, q)]


def run_kakeya_sweep_multi(kind: str, n: int, pq_pairs, deltas,
                           resolution: int = 8):
    """Like run_kakeya_sweep for several exponent pairs at once; the witness
    construction and rasterization are shared per delta."""
    pairs = list(pq_pairs)
    rows = {pq: [] for pq in pairs}
    preds = {}
    for delta in sorted(deltas):
        if kind == DELTA_BALL:
            for p, q in pairs:
                ratio = delta_ball_ratio(n, p, q, delta, resolution=resolution)
                rows[(p, q)].append((delta, ratio.value))
                preds[(p, q)] = 0.0
        else:
            F, G, pred = kakeya_witness(kind, n, delta)
            ratios = bilinear_kakeya_ratios(F, G, pairs)
            for (p, q), ratio in zip(pairs, ratios):
                rows[(p, q)].append((delta, ratio.value))
                preds[(p, q)] = pred(p, q)
    return rows, preds
