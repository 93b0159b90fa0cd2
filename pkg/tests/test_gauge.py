import numpy as np
import pytest

from lapsewick import action, backgrounds, gauge, wick
from lapsewick.errors import DoubleRotationError, InvalidTripleError
from lapsewick.geometry import Grid, flat_spec, random_spec
from lapsewick.suites import ALGEBRA_MIN_POINTS


def _setup(d, seed=0):
    n = ALGEBRA_MIN_POINTS[d]
    grid = Grid(d, n, n)
    tr = random_spec(d, seed=seed, max_k=1).on(grid)
    t, x = grid.coords()
    phi = action.random_scalar_field(d, seed=seed + 1, max_k=1)(t, x)
    return grid, tr, phi


def test_structure_antisymmetric():
    grid, tr, phi = _setup(1)
    alg = gauge.GaugeAlgebra(grid, tr.signature, "spectral")
    F = gauge.fields_from_triple(tr, phi)
    d1, d2 = gauge.random_descriptor(grid, 1), gauge.random_descriptor(grid, 2)
    g12, g21 = alg.structure(F, d1, d2), alg.structure(F, d2, d1)
    assert np.max(np.abs(g12.eps0 + g21.eps0)) < 1e-12
    assert np.max(np.abs(g12.eps + g21.eps)) < 1e-12


def test_equal_descriptors_commute():
    grid, tr, phi = _setup(1)
    d1 = gauge.random_descriptor(grid, 4)
    assert gauge.commutator_structure_check(tr, d1, d1, phi=phi).residual < 1e-9


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_commutator_closes_d1(seed):
    grid, tr, phi = _setup(1, seed)
    d1, d2 = gauge.random_descriptor(grid, 10 + seed), gauge.random_descriptor(grid, 20 + seed)
    assert gauge.commutator_structure_check(tr, d1, d2, phi=phi).residual < 1e-6


def test_spatial_only_descriptors():
    grid, tr, phi = _setup(1)
    d1 = gauge.random_descriptor(grid, 5, spatial_only=True)
    d2 = gauge.random_descriptor(grid, 6, spatial_only=True)
    assert gauge.commutator_structure_check(tr, d1, d2, phi=phi).residual < 1e-7


@pytest.mark.parametrize("theta", [0.4, np.pi / 2, 2.5])
def test_commutator_closes_rotated(theta):
    grid, tr, phi = _setup(1)
    d1 = gauge.random_descriptor(grid, 7, theta=theta)
    d2 = gauge.random_descriptor(grid, 8, theta=theta)
    assert gauge.commutator_structure_check(tr, d1, d2, theta=theta, phi=phi).residual < 1e-6


def test_commutator_closes_d2():
    grid, tr, phi = _setup(2)
    d1, d2 = gauge.random_descriptor(grid, 1), gauge.random_descriptor(grid, 2)
    assert gauge.commutator_structure_check(tr, d1, d2, phi=phi).residual < 1e-6


def test_forward_scheme_first_order():
    grid, tr, phi = _setup(1)
    d1, d2 = gauge.random_descriptor(grid, 1), gauge.random_descriptor(grid, 2)
    rep = gauge.commutator_structure_check(tr, d1, d2, phi=phi, scheme="forward", gap_tol=1e-3)
    r = rep.raw_residuals
    assert 0.9 < np.log2(r[0] / r[1]) < 1.1
    assert rep.residual < 1e-6


def test_central_scheme_second_order():
    grid, tr, phi = _setup(1)
    d1, d2 = gauge.random_descriptor(grid, 1), gauge.random_descriptor(grid, 2)
    r = gauge.commutator_structure_check(tr, d1, d2, phi=phi).raw_residuals
    assert 1.8 < np.log2(r[0] / r[1]) < 2.2


def test_rotation_mode_mismatch():
    grid, tr, _ = _setup(1)
    d1 = gauge.random_descriptor(grid, 1, theta=0.5)
    with pytest.raises(ValueError):
        gauge.commutator_structure_check(tr, d1, gauge.random_descriptor(grid, 2))


def test_descriptor_phase_validated():
    grid = Grid(1, 8, 8)
    d = gauge.random_descriptor(grid, 0)
    with pytest.raises(ValueError):
        gauge.Descriptor(d.eps0.astype(complex) * np.exp(0.3j), d.eps, theta=0.5)


def test_rotated_triple_rejected(random_triple1):
    with pytest.raises(DoubleRotationError):
        gauge.fields_from_triple(wick.wick_rotate_fiducial(random_triple1, 0.5))


def test_variation_needs_grid():
    tr = flat_spec(1).at(np.zeros(3), np.zeros((3, 1)))
    with pytest.raises(InvalidTripleError):
        gauge.gauge_variation(tr, 0.0, 0.0)


def test_translation_of_flat_is_trivial():
    grid = Grid(1, 8, 8)
    v = gauge.gauge_variation(flat_spec(1).on(grid), 0.3, np.array([0.7]))
    assert all(np.max(np.abs(p)) < 1e-13 for p in v.parts() if p is not None)


def test_time_translation_of_friedmann():
    grid = Grid(1, 16, 16)
    tr = backgrounds.friedmann_triple(lambda t: 1.0 + 0 * t, lambda t: 1 + 0.2 * np.sin(t), grid)
    v = gauge.gauge_variation(tr, 1.0, np.array([0.0]))
    t, _ = grid.coords()
    a, da = 1 + 0.2 * np.sin(t), 0.2 * np.cos(t)
    assert np.max(np.abs(v.lapse)) < 1e-13 and np.max(np.abs(v.shift)) < 1e-13
    assert np.max(np.abs(v.metric[..., 0, 0] - 2 * a * da)) < 1e-12


def test_linearization_first_order():
    grid = Grid(1, 16, 16)
    spec = random_spec(1, seed=1, max_k=1)
    xi0 = lambda t, x: 0.3 * np.sin(x[..., 0] + t)
    xi = lambda t, x: (0.2 * np.cos(x[..., 0]))[..., None] * np.ones(x.shape)
    eps = np.array([1e-2, 5e-3, 2.5e-3])
    r = gauge.linearization_residuals(spec, grid, xi0, xi, eps)
    slope = np.polyfit(np.log(eps), np.log(r), 1)[0]
    assert 0.8 < slope < 1.3
