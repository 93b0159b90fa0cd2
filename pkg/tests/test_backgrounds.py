import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lapsewick import backgrounds as bg
from lapsewick.errors import DomainError, QuadratureError
from lapsewick.geometry import Grid, reconstruct_metric

# propagator

def test_euclidean_point_exact():
    rng = np.random.default_rng(0)
    p0, p2, m = rng.uniform(0, 5, 50), rng.uniform(0, 25, 50), 1.3
    G = bg.propagator(p0, p2, m, np.pi / 2)
    assert np.array_equal(G, 1.0 / (p0**2 + p2 + m**2) + 0j)


def test_bounds_on_samples():
    rng = np.random.default_rng(1)
    n = 10_000
    p0, p2 = rng.uniform(-10, 10, n), rng.uniform(0, 100, n)
    m = rng.uniform(0, 3, n)
    th = rng.uniform(1e-3, np.pi - 1e-3, n)
    mag = np.abs(bg.propagator(p0, p2, m, th))
    lo, hi = bg.propagator_bounds(p0, p2, m, th)
    assert np.all(mag >= lo * (1 - 1e-12)) and np.all(mag <= hi * (1 + 1e-12))


@given(p0=st.floats(-20, 20), p=st.floats(0, 20), m=st.floats(0, 5), th=st.floats(1e-3, np.pi - 1e-3))
def test_bounds_property(p0, p, m, th):
    assume(p0 * p0 + p * p + m * m > 1e-12)
    pt = bg.MomentumPoint(p0, np.array([p]), m)
    bg.minkowski_propagator(pt, th, check=True)


def test_small_angle_form_first_order():
    p0, p2, m = np.array([0.5, 2.0, 1.0]), np.array([1.0, 0.3, 0.0]), 1.0  # last point on the pole
    dev = [np.max(np.abs(bg.propagator(p0, p2, m, th) - bg.zimmermann_form(p0, p2, m, th))
                  / np.abs(bg.zimmermann_form(p0, p2, m, th))) for th in (1e-3, 5e-4)]
    assert abs(np.log2(dev[0] / dev[1]) - 1.0) < 0.1


@pytest.mark.parametrize("theta", [0.0, np.pi, -0.1, 4.0])
def test_propagator_domain(theta):
    with pytest.raises(DomainError):
        bg.propagator(1.0, 1.0, 1.0, theta)


def test_negative_mass_rejected():
    with pytest.raises(DomainError):
        bg.MomentumPoint(1.0, np.array([0.0]), -1.0)

# Friedmann


def test_friedmann_unit_is_minkowski():
    tr = bg.friedmann_triple(lambda t: 1.0, lambda t: 1.0, Grid(2, 4, 4))
    assert np.all(tr.lapse == 1) and np.all(tr.shift == 0)
    assert np.allclose(tr.spatial_metric, np.eye(2))


def test_friedmann_metric_components():
    H = 0.7
    grid = Grid(1, 6, 4)
    tr = bg.friedmann_triple(lambda t: 1 + 0 * t, lambda t: np.exp(H * t), grid, t0=0.5)
    g = reconstruct_metric(tr).metric
    assert np.allclose(g[..., 0, 0], -1.0)
    assert np.allclose(g[..., 1, 1], np.exp(2 * H * tr.t))


def test_friedmann_rejects_nonpositive():
    with pytest.raises(DomainError):
        bg.friedmann_triple(lambda t: np.cos(t), lambda t: 1.0, Grid(1, 8, 4))

# de Sitter kernel ingredients


def test_embedding_distance():
    t, x = np.array([0.3]), np.array([[0.2, -0.1]])
    assert bg.ds_embedding_distance(t, x, t, x, 1.0, 0.7)[0] == 1.0
    a = bg.ds_embedding_distance(t, x, -t, -x, 1.3, 0.7)
    b = bg.ds_embedding_distance(-t, -x, t, x, 1.3, 0.7)
    assert a == b
    rng = np.random.default_rng(2)
    xi = bg.ds_embedding_distance(rng.normal(size=20), rng.normal(size=(20, 2)), rng.normal(size=20), rng.normal(size=(20, 2)), 1.0, np.pi / 2)
    assert np.all(xi.real >= 1) and np.all(xi.imag == 0)


def test_spectral_density():
    w = np.linspace(0.1, 4, 9)
    assert np.allclose(bg.harish_chandra_c(w, 2), w**2 / (2 * np.pi) ** 3)
    from scipy.special import gamma

    ref = np.abs(gamma(1j * w + 0.5) / gamma(1j * w)) ** 2 / (2 * np.pi) ** 2
    assert np.allclose(bg.harish_chandra_c(w, 1), ref, rtol=1e-12)


def test_legendre_matches_mpmath():
    import mpmath

    for w, z in [(0.7, 1.8 + 0.3j), (2.5, 1.1 - 0.9j), (0.0, 3.0)]:
        ref = complex(mpmath.legenp(-0.5 + 1j * w, 0, z, type=3))
        got = complex(bg.legendre_conical(np.array(w), np.array(z)))
        assert abs(got - ref) < 1e-10 * max(1, abs(ref))


def test_conical_small_rho_limit():
    w = np.array([0.5, 3.0])
    assert np.allclose(bg.conical_omega_d2(w, 0.0), 4 * np.pi)
    assert np.allclose(bg.conical_omega_d2(w, 1e-9), 4 * np.pi)


@pytest.mark.parametrize("s", [0.05, 0.5, 2.0])
def test_d2_matches_hyperbolic_closed_form(s):
    H = 1.3
    prm = bg.DeSitterParams(H=H, d=2, theta=np.pi / 2, s=s)
    t = np.array([0.0, 0.2, -0.4, 0.1])
    x = np.array([[0.0, 0.0], [0.3, 0.1], [0.5, -0.2], [0.0, 0.0]])
    K = bg.ds_heat_kernel(prm, t, x, np.zeros(4), np.zeros((4, 2)))
    rho = np.arccosh(bg.ds_embedding_distance(t, x, np.zeros(4), np.zeros((4, 2)), H, np.pi / 2).real)
    ref = bg.hyperbolic3_kernel(s * H**2, rho, H)
    assert np.max(np.abs(K.value - ref) / ref) < 1e-6
    assert np.all(np.abs(K.value.imag) < 1e-12 * np.abs(K.value))


@pytest.mark.parametrize("s", [0.2, 1.0])
def test_d1_matches_hyperbolic_plane(s):
    prm = bg.DeSitterParams(H=1.0, d=1, theta=np.pi / 2, s=s)
    t, x = np.array([0.1, -0.3]), np.array([[0.4], [0.0]])
    K = bg.ds_heat_kernel(prm, t, x, np.zeros(2), np.zeros((2, 1)))
    rho = np.arccosh(bg.ds_embedding_distance(t, x, np.zeros(2), np.zeros((2, 1)), 1.0, np.pi / 2).real)
    ref = np.array([bg.hyperbolic2_kernel(s, r) for r in rho])
    assert np.max(np.abs(K.value - ref) / ref) < 1e-6
    assert np.all(K.value.real > 0)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("theta", [0.5, 1.5])
def test_heat_equation_residual(d, theta):
    prm = bg.DeSitterParams(H=1.0, d=d, theta=theta, s=0.5)
    pts_t = np.array([0.2, -0.3])
    pts_x = np.array([[0.3, 0.1], [-0.2, 0.25]])[:, :d]
    r, K = bg.heat_residual(prm, pts_t, pts_x, 0.0, np.zeros(d))
    assert np.all(np.isfinite(K)) and np.max(r) < 1e-4


def test_kernel_error_estimates_reported():
    prm = bg.DeSitterParams(H=1.0, d=2, theta=1.0, s=0.5)
    K = bg.ds_heat_kernel(prm, np.array([0.1]), np.array([[0.2, 0.0]]), np.zeros(1), np.zeros((1, 2)))
    assert K.error[0] <= 1e-8 * abs(K.value[0])
    assert K.tail_bound[0] <= 1e-10 * abs(K.value[0]) * 10


@pytest.mark.parametrize("kw", [dict(H=-1.0), dict(s=0.0), dict(d=3), dict(theta=0.0), dict(theta=np.pi)])
def test_params_validation(kw):
    with pytest.raises(DomainError):
        bg.DeSitterParams(**kw)


def test_quadrature_tolerance_enforced():
    prm = bg.DeSitterParams(H=1.0, d=2, theta=1.0, s=0.5)
    with pytest.raises(QuadratureError):
        bg.ds_heat_kernel(prm, np.array([0.1]), np.array([[0.2, 0.0]]), np.zeros(1), np.zeros((1, 2)), epsrel=1e-20)
