import math

import numpy as np
import pytest

from tubelab import extension as ext
from tubelab import witnesses
from tubelab.fields import Ball, grid_from_sampler
from tubelab.geometry import perturbed_phase, quadratic_phase


PHI2 = quadratic_phase(1)
PHI3 = quadratic_phase(2)


def test_full_cap_at_origin_gives_measure():
    f = ext.CapFunction((-1, -1), (1, 1))
    val = ext.evaluate_extension(f, PHI3, [[0, 0, 0]], 32)
    assert val[0] == pytest.approx(4.0)


def test_modulation_covariance():
    pts = np.array([[0.5, 0.4, 1.2], [1.0, -0.3, 2.0], [0.0, 0.0, 0.5]])
    shift = np.array([0.3, -0.2, 0.0])
    plain = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25))
    # density route (generic quadrature), against shifted evaluation
    dens = ext.CapFunction(
        (-0.75, -0.25), (-0.25, 0.25),
        density=lambda y: np.exp(-2j * np.pi * (y @ shift[:2])))
    va = ext.evaluate_extension(dens, PHI3, pts, 64)
    vb = ext.evaluate_extension(plain, PHI3, pts + shift, 64)
    assert np.max(np.abs(va - vb)) < 1e-10


def test_modulation_vector_route_matches_density_route():
    pts = np.array([[0.2, 0.1, 0.7], [1.5, 0.0, 3.0]])
    x0 = (0.4, -0.1, 0.8)
    cap_mod = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25), modulation=x0)
    phi = PHI3

    def density(y):
        return np.exp(-2j * np.pi * (y @ np.asarray(x0[:2])
                                     + phi(y) * x0[2]))

    cap_dens = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25), density=density)
    gn = ext.required_grid_n(cap_mod, phi, pts)
    va = ext.evaluate_extension(cap_mod, phi, pts, gn)
    vb = ext.evaluate_extension(cap_dens, phi, pts, gn)
    assert np.max(np.abs(va - vb)) < 1e-9


def test_linearity():
    pts = np.array([[0.3, -0.2, 1.0], [1.2, 0.5, 2.5]])
    f = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25))
    af = f.scaled(2.0 - 1.0j)
    va = ext.evaluate_extension(af, PHI3, pts, 64)
    vb = (2.0 - 1.0j) * ext.evaluate_extension(f, PHI3, pts, 64)
    assert np.max(np.abs(va - vb)) < 1e-12


def test_uniform_bound_by_l1():
    rng = np.random.default_rng(0)
    f = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25))
    pts = np.concatenate([rng.uniform(-3, 3, size=(30, 2)),
                          rng.uniform(0, 4, size=(30, 1))], axis=1)
    gn = ext.required_grid_n(f, PHI3, pts)
    vals = ext.evaluate_extension(f, PHI3, pts, gn)
    assert np.all(np.abs(vals) <= f.norm_lp(1) + 1e-9)


def test_stationary_decay_and_oracle_agreement():
    f = ext.CapFunction((-1, -1), (1, 1))
    vals = []
    for t in (8, 16, 32):
        v1 = abs(ext.evaluate_extension(f, PHI3, [[0, 0, t]], 4096)[0])
        v2 = abs(ext.evaluate_extension(f, PHI3, [[0, 0, t]], 8192)[0])
        assert abs(v1 - v2) <= 1e-6
        vals.append((t, v1))
    fit = witnesses.fit_power_law(vals)
    assert abs(fit.slope - (-1.0)) <= 0.1


def test_oscillation_guard_raises_with_required_size():
    f = ext.CapFunction((-1, -1), (1, 1))
    with pytest.raises(ext.OscillationGuardError) as err:
        ext.evaluate_extension(f, PHI3, [[0, 0, 64]], 16)
    assert "grid_n" in str(err.value)


def test_separable_path_matches_generic():
    # same midpoint sum, factored; compare against a tagless clone of the
    # quadratic phase which takes the generic route
    from tubelab.geometry import EllipticPhase

    generic_quadratic = EllipticPhase(
        evaluator=lambda p: 0.5 * np.sum(p * p, axis=-1),
        gradient=lambda p: p.copy(),
        bound_A=2.0, smoothness_N=100, eps0=0.0, dim=2)
    f = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25), modulation=(0.5, 0.0, 1.0))
    pts = np.array([[0.3, -0.2, 1.0], [2.0, 0.5, 3.5], [0.0, 0.0, 0.0]])
    gn = ext.required_grid_n(f, PHI3, pts)
    va = ext.evaluate_extension(f, PHI3, pts, gn)
    vb = ext.evaluate_extension(f, generic_quadratic, pts, gn)
    assert np.max(np.abs(va - vb)) < 1e-10


def test_parabolic_rescaling_covariance():
    # with the rescaled phase, the field of f at (a, b) equals
    # 2^{(n-1)j} times the field of f(2^j .) at (2^j a, 2^{2j} b)
    from tubelab.geometry import parabolic_rescale

    j = 2
    lam = 2.0**j
    f = ext.CapFunction((-0.6, -0.2), (-0.3, 0.2))
    shrunk = ext.CapFunction(tuple(v / lam for v in f.support_lo),
                             tuple(v / lam for v in f.support_hi))
    phi_resc = parabolic_rescale(PHI3, j, [0.0, 0.0])
    pts = np.array([[0.5, 0.25, 1.5], [1.0, -0.5, 0.25]])
    scaled_pts = pts * np.array([lam, lam, lam**2])
    lhs = ext.evaluate_extension(f, phi_resc, pts, 64)
    rhs = lam**2 * ext.evaluate_extension(shrunk, PHI3, scaled_pts, 64)
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_local_ratio_scalar_invariance():
    f = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25))
    g = ext.CapFunction((0.25, -0.25), (0.75, 0.25))
    r1 = ext.local_ratio(f, g, PHI3, 2, 2, 8)
    r2 = ext.local_ratio(f.scaled(3.0), g.scaled(0.5j), PHI3, 2, 2, 8)
    assert r1.value == pytest.approx(r2.value, rel=1e-12)
    assert r1.bilinear


def test_local_ratio_zero_denominator():
    f = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25), amplitude=0.0)
    g = ext.CapFunction((0.25, -0.25), (0.75, 0.25))
    with pytest.raises(ext.ExtensionError):
        ext.local_ratio(f, g, PHI3, 2, 1, 8)


def test_local_ratio_separation_enforced():
    f = ext.CapFunction((-0.75, -0.25), (-0.25, 0.25))
    g = ext.CapFunction((-0.2, -0.25), (0.3, 0.25))
    with pytest.raises(ext.ExtensionError):
        ext.local_ratio(f, g, PHI3, 2, 2, 8)


def test_trace_growth_and_flat_l2():
    # bilinear trace behaviour: p=2, q=1 grows ~ R; n=2 (2,2) stays bounded
    rows = []
    for R in (8, 16, 32):
        f, g = witnesses.trace_caps(3, R)
        rows.append((R, ext.local_ratio(f, g, PHI3, 2, 1, R).value))
    fit = witnesses.fit_power_law(rows)
    assert 0.8 <= fit.slope <= 1.2

    f2 = ext.CapFunction((-0.75,), (-0.25,))
    g2 = ext.CapFunction((0.25,), (0.75,))
    rows = [(R, ext.local_ratio(f2, g2, PHI2, 2, 2, R).value)
            for R in (8, 16, 32, 64)]
    fit = witnesses.fit_power_law(rows)
    assert abs(fit.slope) <= 0.1


def annulus_function(n, R, support_lo, support_hi, phi, m=48, thickness=1.0):
    def sampler(P):
        x_, xn = P[:, :-1], P[:, -1]
        ok = np.all((x_ >= np.asarray(support_lo)) & (x_ <= np.asarray(support_hi)),
                    axis=1)
        ok &= np.abs(xn - phi(x_)) <= thickness / R
        return ok.astype(complex)

    lo = list(support_lo) + [-0.1]
    hi = list(support_hi) + [0.7]
    dims = [m] * (n - 1) + [m]
    return grid_from_sampler(sampler, lo, hi, dims)


def test_annulus_ratio_scaling_and_homogeneity():
    R = 16.0
    f = annulus_function(2, R, [-0.75], [-0.25], PHI2)
    g = annulus_function(2, R, [0.25], [0.75], PHI2)
    base = ext.annulus_ratio(f, g, 2, R)
    f3 = grid_from_sampler(lambda P: 3 * f.generator(P),
                           [-0.75, -0.1], [-0.25, 0.7], list(f.dims))
    assert ext.annulus_ratio(f3, g, 2, R) == pytest.approx(base, rel=1e-9)


def test_annulus_ratio_zero_denominator():
    R = 8.0
    f = annulus_function(2, R, [-0.75], [-0.25], PHI2)
    zero = grid_from_sampler(lambda P: np.zeros(P.shape[0], dtype=complex),
                             [0.25, -0.1], [0.75, 0.7], list(f.dims))
    with pytest.raises(ext.ExtensionError):
        ext.annulus_ratio(f, zero, 2, R)


def test_annulus_ratio_support_check():
    R = 8.0
    bad = grid_from_sampler(lambda P: np.ones(P.shape[0], dtype=complex),
                            [-0.75, 0.5], [-0.25, 0.9], [16, 16])
    good = annulus_function(2, R, [0.25], [0.75], PHI2)
    with pytest.raises(ext.ExtensionError):
        ext.annulus_ratio(bad, good, 2, R)


def test_annulus_ratio_cross_validates_local_ratio():
    # slope agreement between the two formulations, n=2, p=q=2
    ann_rows, loc_rows = [], []
    f_cap = ext.CapFunction((-0.75,), (-0.25,))
    g_cap = ext.CapFunction((0.25,), (0.75,))
    for R in (8.0, 16.0, 32.0):
        f = annulus_function(2, R, [-0.75], [-0.25], PHI2)
        g = annulus_function(2, R, [0.25], [0.75], PHI2)
        ann_rows.append((R, ext.annulus_ratio(f, g, 2, R)))
        loc_rows.append((R, ext.local_ratio(f_cap, g_cap, PHI2, 2, 2, R).value))
    slope_a = witnesses.fit_power_law(ann_rows).slope
    slope_l = witnesses.fit_power_law(loc_rows).slope
    assert abs(slope_a - slope_l) <= 0.25


def test_annulus_ratio_three_dimensional_smoke():
    R = 4.0

    def sampler(P):
        x_, xn = P[:, :-1], P[:, -1]
        ok = np.all((x_ >= np.array([-0.75, -0.25]))
                    & (x_ <= np.array([-0.25, 0.25])), axis=1)
        ok &= np.abs(xn - PHI3(x_)) <= 1.0 / R
        return ok.astype(complex)

    def sampler_g(P):
        x_, xn = P[:, :-1], P[:, -1]
        ok = np.all((x_ >= np.array([0.25, -0.25]))
                    & (x_ <= np.array([0.75, 0.25])), axis=1)
        ok &= np.abs(xn - PHI3(x_)) <= 1.0 / R
        return ok.astype(complex)

    f = grid_from_sampler(sampler, [-0.75, -0.25, -0.1], [-0.25, 0.25, 0.7],
                          [20, 20, 24])
    g = grid_from_sampler(sampler_g, [0.25, -0.25, -0.1], [0.75, 0.25, 0.7],
                          [20, 20, 24])
    val = ext.annulus_ratio(f, g, 2, R)
    assert np.isfinite(val) and val > 0


def test_rotational_curvature_quadratic():
    assert ext.rotational_curvature(PHI3, [0.8, 0.0], [0.6, 0.0]) == (
        pytest.approx(0.36, abs=1e-8))
    assert ext.rotational_curvature(PHI3, [0.3, 0.2], [0.0, 0.0]) == (
        pytest.approx(0.0, abs=1e-12))
    rng = np.random.default_rng(1)
    for _ in range(100):
        y = rng.uniform(-1, 1, 2)
        w = rng.uniform(-1, 1, 2)
        det = ext.rotational_curvature(PHI3, y, w)
        assert abs(det - w @ w) <= 1e-8


def test_rotational_curvature_perturbed_band():
    phi = perturbed_phase(2, 0.05)
    rng = np.random.default_rng(2)
    for _ in range(100):
        y = rng.uniform(-1, 1, 2)
        w = rng.uniform(-1, 1, 2)
        det = ext.rotational_curvature(phi, y, w)
        assert abs(det - w @ w) <= 10 * 0.05 * (y @ y + w @ w) + 1e-12
