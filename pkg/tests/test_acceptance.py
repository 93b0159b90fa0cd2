"""Acceptance criteria 1-10, each printed as a single PASS/FAIL line."""

import time

import numpy as np

from lapsewick import action, backgrounds, diffeos, gauge, hessian, wick
from lapsewick.geometry import Grid, flat_spec, random_spec, static_spec
from lapsewick.suites import ALGEBRA_MIN_POINTS, SuiteConfig, emit_artifacts, lagrangian_fd_order, run_suite

THETAS_COV = (0.3, np.pi / 2, 2.5)
COV_MAPS = ("boost:0.5", "shear:0.1,1")


def _cov_setup():
    triple = random_spec(1, seed=0).on(Grid(1, 16, 32))
    maps = [diffeos.map_from_string(m, 1) for m in COV_MAPS]
    return triple, maps


def test_criterion_01_covariance(acceptance):
    start = time.perf_counter()
    triple, maps = _cov_setup()
    worst = max(wick.line_element_residual(triple, m, th) for m in maps for th in THETAS_COV)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 10
    assert acceptance(1, "line-element invariance", ok, f"max residual {worst:.2e} < 1e-10, runtime {elapsed:.2f}s < 10s")


def test_criterion_02_rank_one(acceptance):
    triple, maps = _cov_setup()
    worst = {v: max(wick.rank_one_residual(triple, m, th, v) for m in maps for th in THETAS_COV) for v in ("metric", "inverse")}
    ok = max(worst.values()) < 1e-11
    assert acceptance(2, "rank-one reassembly", ok, f"metric {worst['metric']:.2e}, inverse {worst['inverse']:.2e} < 1e-11")


def test_criterion_03_action_decomposition(acceptance):
    rng = np.random.default_rng(3)
    worst_dec, worst_im = 0.0, np.inf
    for _ in range(100):
        d = int(rng.integers(1, 3))
        th = float(rng.uniform(0.01, np.pi - 0.01))
        tr = random_spec(d, seed=int(rng.integers(1 << 31))).on(Grid(d, 8, 8))
        phi = action.random_scalar_field(d, seed=int(rng.integers(1 << 31)), amp=float(rng.uniform(0.1, 2.0)))
        U = action.quartic_potential(float(rng.uniform(0.0, 2.0)), float(rng.uniform(0.0, 2.0)))
        worst_dec = max(worst_dec, action.action_decomposition_residual(tr, phi, U, th))
        worst_im = min(worst_im, float(np.imag(action.evaluate_action(tr, phi, U, th))))
    ok = worst_dec < 1e-12 and worst_im > 0
    assert acceptance(3, "action decomposition", ok, f"relative residual {worst_dec:.2e} < 1e-12, min Im S {worst_im:.3e} > 0 over 100 draws")


def test_criterion_04_wec_limit(acceptance):
    tr = random_spec(1, seed=4).on(Grid(1, 8, 16))
    phi = action.random_scalar_field(1, seed=5)
    U = action.quartic_potential(0.7, 0.5)
    thetas = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    res = np.array([action.wec_limit_residual(tr, phi, U, t) for t in thetas])
    slope = float(np.polyfit(np.log(thetas), np.log(res), 1)[0])
    ok = abs(slope - 1.0) <= 0.1 and np.all(np.diff(res) < 0)
    assert acceptance(4, "WEC limit", ok, f"log-log slope {slope:.3f} (1.0 +/- 0.1), residuals {', '.join(f'{r:.1e}' for r in res)}")


def test_criterion_05_lagrangian_scalarity(acceptance):
    orders = []
    for m in COV_MAPS:
        for th in (0.3, 1.2):
            order, _ = lagrangian_fd_order(0, diffeos.map_from_string(m, 1), th)
            orders.append(order)
    ok = all(abs(o - 2.0) <= 0.3 for o in orders)
    assert acceptance(5, "Lagrangian scalarity", ok, f"observed orders {', '.join(f'{o:.2f}' for o in orders)} (2.0 +/- 0.3) over 8->16->32")


def test_criterion_06_sectoriality(acceptance):
    start = time.perf_counter()
    thetas = (0.3, np.pi / 3, 2.5)
    cases = [
        # (label, triple, thetas, eigen method)
        ("flat 1d 16x32", flat_spec(1).on(Grid(1, 16, 32)), thetas, "dense"),
        ("flat 2d 6x12x12", flat_spec(2).on(Grid(2, 6, 12)), thetas, "dense"),
        ("flat 1d 50x80", flat_spec(1).on(Grid(1, 50, 80)), thetas, "time_blocks"),
        ("flat 2d 10x20x20", flat_spec(2).on(Grid(2, 10, 20)), thetas, "time_blocks"),
        ("random 1d 16x32", random_spec(1, seed=6).on(Grid(1, 16, 32)), thetas, "dense"),
        ("random 2d 8x12x12", random_spec(2, seed=7).on(Grid(2, 8, 12)), thetas, "dense"),
        ("random 1d 32x64", random_spec(1, seed=8).on(Grid(1, 32, 64)), (np.pi / 3,), "dense"),
        ("static random 1d 40x100", static_spec(random_spec(1, seed=9)).on(Grid(1, 40, 100)), thetas, "time_blocks"),
        ("static random 2d 10x20x20", static_spec(random_spec(2, seed=10)).on(Grid(2, 10, 20)), thetas, "time_blocks"),
    ]
    margin, adjoint, symbol, largest = np.inf, 0.0, 0.0, 0
    for label, tr, ths, method in cases:
        for th in ths:
            op = hessian.assemble_hessian(tr, 1.0, th)
            rep = hessian.spectral_report(op, 1e-10, method=method)
            margin = min(margin, rep.wedge_margin)
            adjoint = max(adjoint, hessian.adjoint_residual(op, op.with_theta(np.pi - th)))
            if label.startswith("flat"):
                symbol = max(symbol, hessian.match_spectra(rep.eigenvalues, hessian.flat_torus_spectrum(tr.grid, 1.0, th)))
            largest = max(largest, op.size)
    elapsed = time.perf_counter() - start
    ok = margin >= -1e-10 and adjoint < 1e-12 and symbol < 1e-10 and elapsed < 60 and largest >= 4000
    detail = (f"wedge margin {margin:.2e} >= -1e-10, adjoint {adjoint:.2e} < 1e-12, symbol match {symbol:.2e} < 1e-10, "
              f"up to {largest} points, runtime {elapsed:.1f}s < 60s")
    assert acceptance(6, "sectoriality", ok, detail)


def test_criterion_07_surface_deformation_algebra(acceptance):
    worst = {"plain": 0.0, "rotated": 0.0}
    for d in (1, 2):
        n = ALGEBRA_MIN_POINTS[d]
        grid = Grid(d, n, n)
        tr = random_spec(d, seed=11, max_k=1).on(grid)
        phi = action.random_scalar_field(d, seed=12, max_k=1).on(grid)
        pairs = 10 if d == 1 else 3
        for k in range(pairs):
            d1, d2 = gauge.random_descriptor(grid, 2 * k), gauge.random_descriptor(grid, 2 * k + 1)
            worst["plain"] = max(worst["plain"], gauge.commutator_structure_check(tr, d1, d2, phi=phi).residual)
            th = 0.2 + 0.27 * k
            r1 = gauge.random_descriptor(grid, 100 + 2 * k, theta=th)
            r2 = gauge.random_descriptor(grid, 101 + 2 * k, theta=th)
            worst["rotated"] = max(worst["rotated"], gauge.commutator_structure_check(tr, r1, r2, theta=th, phi=phi).residual)
    ok = max(worst.values()) < 1e-6
    assert acceptance(7, "surface-deformation algebra", ok,
                      f"plain {worst['plain']:.2e}, rotated {worst['rotated']:.2e} < 1e-6 (10 pairs d=1, 3 pairs d=2)")


def test_criterion_08_propagator(acceptance):
    rng = np.random.default_rng(8)
    n = 10_000
    p0, p2 = rng.normal(0, 3, n), np.sum(rng.normal(0, 3, (n, 3)) ** 2, axis=1)
    m = rng.uniform(0, 2, n)
    th = rng.uniform(1e-6, np.pi - 1e-6, n)
    exact = bool(np.array_equal(backgrounds.propagator(p0, p2, m, np.pi / 2), 1.0 / (p0**2 + p2 + m**2) + 0j))
    mag = np.abs(backgrounds.propagator(p0, p2, m, th))
    lo, hi = backgrounds.propagator_bounds(p0, p2, m, th)
    bounds = bool(np.all(mag >= lo) and np.all(mag <= hi))
    # include points on the real-time pole p0^2 = p^2 + m^2
    p0s = np.concatenate([p0, np.sqrt(p2 + m**2)])
    p2s, ms = np.concatenate([p2, p2]), np.concatenate([m, m])

    def dev(t):
        g = backgrounds.propagator(p0s, p2s, ms, t)
        return float(np.max(np.abs(g - backgrounds.zimmermann_form(p0s, p2s, ms, t)) / np.abs(g)))

    order = float(np.log2(dev(1e-3) / dev(5e-4)))
    ok = exact and bounds and abs(order - 1.0) < 0.1 and dev(1e-3) < 1e-2
    assert acceptance(8, "rotated propagator", ok,
                      f"theta=pi/2 exact: {exact}, bounds on {n} samples: {bounds}, small-angle deviation {dev(1e-3):.2e} at order {order:.3f}")


def test_criterion_09_de_sitter_kernel(acceptance):
    start = time.perf_counter()
    t = np.array([0.0, 0.3, -0.4, 0.1, 0.6])
    x = np.array([[0.0, 0.0], [0.2, 0.1], [0.5, -0.3], [1.0, 0.7], [-0.8, 0.2]])
    zt, zx = np.zeros(5), np.zeros((5, 2))
    oracle_err = 0.0
    for H in (1.0, 0.6):
        for s in (0.05, 0.5, 2.0):
            k = backgrounds.ds_heat_kernel(backgrounds.DeSitterParams(H=H, d=2, theta=np.pi / 2, s=s), t, x, zt, zx).value
            rho = np.arccosh(backgrounds.ds_embedding_distance(t, x, zt, zx, H, np.pi / 2).real)
            ref = backgrounds.hyperbolic3_kernel(s * H * H, rho, H)
            oracle_err = max(oracle_err, float(np.max(np.abs(k - ref) / ref)))
    heat = 0.0
    pts_t = np.array([0.2, -0.3, 0.1])
    pts_x = np.array([[0.3, 0.1], [-0.2, 0.25], [0.15, -0.4]])
    for th in (0.5, 1.5):
        r, _ = backgrounds.heat_residual(backgrounds.DeSitterParams(H=1.0, d=2, theta=th, s=0.5), pts_t, pts_x, 0.0, np.zeros(2))
        heat = max(heat, float(np.max(r)))
    elapsed = time.perf_counter() - start
    ok = oracle_err < 1e-6 and heat < 1e-4 and elapsed < 120
    assert acceptance(9, "de Sitter heat kernel", ok,
                      f"oracle relative error {oracle_err:.2e} < 1e-6, heat residual {heat:.2e} < 1e-4, runtime {elapsed:.1f}s < 120s")


def test_criterion_10_determinism(acceptance, tmp_path):
    cfg = SuiteConfig(seed=42)
    outputs = []
    for run in ("a", "b"):
        rep = run_suite(cfg, "all")
        files = emit_artifacts(rep, tmp_path / run, cfg.formats)
        outputs.append({p.name: p.read_bytes() for p in files})
    same = outputs[0] == outputs[1]
    assert acceptance(10, "determinism", same, f"{len(outputs[0])} artifact files byte-identical across two runs of every suite: {same}")
