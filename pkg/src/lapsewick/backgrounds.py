"""Closed-form backgrounds: flat-space propagator, Friedmann triples, de Sitter.

The de Sitter kernel is the spectral integral over ``omega`` of the
Harish-Chandra density times a conical function of the complex embedding
distance. For ``d = 2`` the conical function is elementary; for ``d = 1``
it is evaluated from the Laplace integral
``P_nu(z) = (1/pi) int_0^pi (z + sqrt(z^2 - 1) cos phi)^nu dphi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from .errors import DomainError, QuadratureError
from .geometry import AdmTriple, Grid, TripleSpec


def _phases(theta: float):
    """``(cos theta, sin theta)`` with an exact zero cosine at ``pi/2``."""
    c = 0.0 if theta == np.pi / 2 else np.cos(theta)
    return c, np.sin(theta)


def _interior(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= np.pi):
        raise DomainError("theta must lie strictly inside (0, pi)")


@dataclass(frozen=True)
class MomentumPoint:
    p0: float
    p: np.ndarray
    m: float = 0.0

    def __post_init__(self):
        if self.m < 0:
            raise DomainError("mass must be non-negative")

    @property
    def p2(self) -> float:
        return float(np.sum(np.asarray(self.p, dtype=float) ** 2))

    @property
    def pE2(self) -> float:
        return self.p0**2 + self.p2


def propagator(p0, p2, m, theta, check: bool = False):
    """Vectorized ``i e^{-i th} / (p0^2 - e^{-2 i th} (p^2 + m^2))``."""
    _interior(theta)
    p0 = np.asarray(p0, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    m2 = np.asarray(m, dtype=float) ** 2
    if np.ndim(theta) == 0:
        c, s = _phases(float(theta))
    else:
        th = np.asarray(theta, dtype=float)
        c, s = np.where(th == np.pi / 2, 0.0, np.cos(th)), np.sin(th)
    num = 1j * (c - 1j * s)
    e2 = (c * c - s * s) - 2j * c * s
    # grouped so that theta = pi/2 reproduces (p0^2 + p^2) + m^2 bit for bit
    den = (p0**2 - e2 * p2) - e2 * m2
    G = num / den
    if check:
        lower, upper = propagator_bounds(p0, p2, m, theta)
        mag = np.abs(G)
        tol = 1e-12
        assert np.all(mag >= lower * (1 - tol)) and np.all(mag <= upper * (1 + tol)), "propagator bounds violated"
    return G


def minkowski_propagator(pt: MomentumPoint, theta: float, check: bool = __debug__) -> complex:
    """Rotated flat-space propagator at one momentum point."""
    return complex(propagator(pt.p0, pt.p2, pt.m, theta, check=check))


def propagator_bounds(p0, p2, m, theta):
    """``(1/(pE^2 + m^2), 1/(sin(theta) (pE^2 + m^2)))``."""
    base = np.asarray(p0, dtype=float) ** 2 + np.asarray(p2, dtype=float) + np.asarray(m, dtype=float) ** 2
    return 1.0 / base, 1.0 / (np.sin(theta) * base)


def zimmermann_form(p0, p2, m, theta):
    """Small-angle form ``i / (p0^2 - p^2 - m^2 + 2 i theta (p^2 + m^2))``."""
    q = np.asarray(p2, dtype=float) + np.asarray(m, dtype=float) ** 2
    return 1j / (np.asarray(p0, dtype=float) ** 2 - q + 2j * theta * q)


def friedmann_spec(lapse_fn, scale_fn, d: int = 1, signature: int = -1) -> TripleSpec:
    """``(N(t), 0, a(t)^2 delta_ab)`` as a closed-form triple."""

    def n(t, x):
        return np.asarray(lapse_fn(t), dtype=float) * np.ones(np.shape(t))

    def s(t, x):
        return np.zeros(np.shape(t) + (d,))

    def g(t, x):
        a = np.asarray(scale_fn(t), dtype=float) * np.ones(np.shape(t))
        return (a**2)[..., None, None] * np.eye(d)

    return TripleSpec(n, s, g, d, signature, name="friedmann")


def friedmann_triple(lapse_fn, scale_fn, grid: Grid, signature: int = -1, t0: float = 0.0) -> AdmTriple:
    """Friedmann triple on a grid whose time axis starts at ``t0``."""
    t, x = grid.coords()
    t = t + t0
    N = np.asarray(lapse_fn(t), dtype=float) * np.ones(t.shape)
    a = np.asarray(scale_fn(t), dtype=float) * np.ones(t.shape)
    if np.any(N <= 0) or np.any(a <= 0):
        raise DomainError("lapse and scale factor must be positive on the time range")
    spec = friedmann_spec(lapse_fn, scale_fn, grid.d, signature)
    tr = spec.at(t, x)
    return AdmTriple(tr.lapse, tr.shift, tr.spatial_metric, signature, t=t, x=x, grid=grid)


def de_sitter_spec(H: float = 1.0, d: int = 2, signature: int = -1) -> TripleSpec:
    """Flat slicing ``N = 1``, ``a = exp(H t)``."""
    return friedmann_spec(lambda t: np.ones_like(np.asarray(t, dtype=float)), lambda t: np.exp(H * np.asarray(t)), d, signature)


def ds_embedding_distance(t, x, tp, xp, H: float, theta: float):
    """``cosh H(t-t') - (H^2/2) e^{2 i th} e^{(t+t')H} |x - x'|^2``."""
    t = np.asarray(t, dtype=float)
    tp = np.asarray(tp, dtype=float)
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    r2 = np.sum((x - xp) ** 2, axis=-1)
    c, s = _phases(theta)
    phase2 = (c * c - s * s) + 2j * c * s
    return np.cosh(H * (t - tp)) - 0.5 * H**2 * phase2 * np.exp((t + tp) * H) * r2


@dataclass(frozen=True)
class DeSitterParams:
    H: float = 1.0
    d: int = 2
    theta: float = np.pi / 2
    s: float = 0.5

    def __post_init__(self):
        if self.H <= 0 or self.s <= 0:
            raise DomainError("H and s must be positive")
        if self.d not in (1, 2):
            raise DomainError("only d = 1 and d = 2 are supported")
        _interior(self.theta)


def harish_chandra_c(omega, d: int):
    """``(2 pi)^{-(d+1)} |Gamma(i w + d/2) / Gamma(i w)|^2`` in closed form."""
    omega = np.asarray(omega, dtype=float)
    if d == 2:
        return omega**2 / (2 * np.pi) ** 3
    if d == 1:
        return omega * np.tanh(np.pi * omega) / (2 * np.pi) ** 2
    raise DomainError("only d = 1 and d = 2 are supported")


def _rho(xi):
    return np.arccosh(np.asarray(xi, dtype=complex))


def conical_omega_d2(omega, rho):
    """``4 pi sin(omega rho) / (omega sinh rho)`` with the ``rho -> 0`` limit."""
    omega = np.asarray(omega, dtype=float)
    rho = np.asarray(rho, dtype=complex)
    small = np.abs(rho) < 1e-8
    safe = np.where(small, 1.0, rho)
    ratio = np.where(small, 1.0 + 0j, safe / np.sinh(safe))
    z = omega * rho
    tiny = np.abs(z) < 1e-8
    sinc = np.where(tiny, 1.0 - z**2 / 6, np.sin(z) / np.where(tiny, 1.0, z))
    return 4 * np.pi * sinc * ratio


def _laplace_nodes(n):
    # trapezoid on [0, pi] for an even periodic integrand
    phi = np.linspace(0.0, np.pi, n + 1)
    w = np.full(n + 1, np.pi / n)
    w[0] = w[-1] = 0.5 * np.pi / n
    return phi, w


def legendre_conical(omega, z, n_phi: int = 256):
    """``P_{-1/2 + i omega}(z)`` from the Laplace integral (trapezoid rule).

    Valid where the base ``z + sqrt(z^2-1) cos(phi)`` avoids the negative
    real axis, which holds for ``|Im arccosh z| < pi/2``.
    """
    omega = np.asarray(omega, dtype=float)
    z = np.asarray(z, dtype=complex)
    phi, w = _laplace_nodes(n_phi)
    root = np.sqrt(z * z - 1)
    base = z[..., None] + root[..., None] * np.cos(phi)
    logb = np.log(base)
    nu = -0.5 + 1j * omega
    return np.sum(w * np.exp(nu[..., None] * logb), axis=-1) / np.pi


@dataclass(frozen=True)
class KernelResult:
    value: np.ndarray
    error: np.ndarray
    omega_max: float
    tail_bound: np.ndarray


def _tail_integral(w, p, kappa, sigma):
    """Bound on ``int_w^inf u^p exp(kappa u - sigma u^2) du``."""
    denom = 2 * sigma * w - kappa - p / w
    if np.any(denom <= 0):
        return np.full(np.shape(kappa), np.inf)
    return w**p * np.exp(kappa * w - sigma * w * w) / denom


def ds_heat_kernel(params: DeSitterParams, t, x, tp, xp, epsrel: float = 1e-8, n_phi: int = 256) -> KernelResult:
    """Rotated heat kernel between point arrays ``(t, x)`` and ``(t', x')``.

    The ``omega`` integral is truncated at an ``omega_max`` certified by a
    Gaussian envelope (tail below ``1e-10`` of the integral) and computed
    with adaptive Gauss-Kronrod; each component must meet ``epsrel``.
    """
    H, d, theta, s = params.H, params.d, params.theta, params.s
    xi = np.atleast_1d(ds_embedding_distance(t, x, tp, xp, H, theta))
    shape = np.shape(ds_embedding_distance(t, x, tp, xp, H, theta))
    xi = xi.ravel()
    c, sn = _phases(theta)
    ieth = 1j * (c + 1j * sn)  # i e^{i theta}
    sigma = s * sn * H**2
    shift = d * d / 4.0
    if d == 2:
        rho = _rho(xi)
        kappa = np.abs(rho.imag)
        small = np.abs(rho) < 1e-8
        ratio = np.abs(np.where(small, 1.0, rho / np.sinh(np.where(small, 1.0, rho))))
        C = 4 * np.pi * ratio / (2 * np.pi) ** 3 * np.exp(-sigma * shift)
        p = 2

        def integrand(w):
            return harish_chandra_c(w, 2) * np.exp(s * ieth * H**2 * (shift + w * w)) * conical_omega_d2(w, rho)

    else:
        phi, _ = _laplace_nodes(n_phi)
        root = np.sqrt(xi * xi - 1)
        base = xi[:, None] + root[:, None] * np.cos(phi)
        if np.any((np.abs(base.imag) <= 1e-14 * np.abs(base)) & (base.real <= 0)):
            raise DomainError("Laplace integral base crosses the branch cut")
        kappa = np.max(np.abs(np.angle(base)), axis=1)
        C = 2 * np.pi * np.max(np.abs(base) ** -0.5, axis=1) / (2 * np.pi) ** 2 * np.exp(-sigma * shift)
        p = 1

        def integrand(w):
            return harish_chandra_c(w, 1) * np.exp(s * ieth * H**2 * (shift + w * w)) * 2 * np.pi * legendre_conical(w, xi, n_phi)

    kmax = float(np.max(kappa))
    # omega_max where the envelope drops by ~ 1e-16 relative to its peak scale
    L = 40.0 + np.log(max(1.0, float(np.max(C))))
    w_max = (kmax + np.sqrt(kmax**2 + 4 * sigma * L)) / (2 * sigma)
    w_max = max(w_max, 4.0)
    for _ in range(8):
        coarse, _ = quad_vec(integrand, 0.0, w_max, epsrel=1e-6, norm="max", limit=2000)
        scale = np.maximum(np.abs(coarse), 1e-300)
        tail = C * _tail_integral(w_max, p, kappa, sigma)
        if np.all(tail <= 1e-10 * scale):
            break
        w_max *= 1.5
    else:
        raise QuadratureError(f"could not certify truncation (omega_max={w_max:.3g})")

    def scaled(w):
        return integrand(w) / scale

    res, err = quad_vec(scaled, 0.0, w_max, epsabs=1e-12, epsrel=0.0, norm="max", limit=4000)
    rel = float(np.max(np.abs(err) / np.maximum(np.abs(res), 1e-300)))
    if not np.all(np.isfinite(res)) or rel > epsrel:
        raise QuadratureError(f"kernel quadrature error estimate {rel:.2e} above {epsrel:.1e} (omega_max={w_max:.3g})")
    pref = (-ieth) ** d * H ** (d + 1)
    value = pref * res * scale
    errs = np.abs(pref) * err * scale
    return KernelResult(value.reshape(shape), np.broadcast_to(errs, value.shape).reshape(shape), float(w_max), (C * _tail_integral(w_max, p, kappa, sigma)).reshape(shape))


def hyperbolic3_kernel(s_tilde, rho, H: float = 1.0):
    """Closed-form heat kernel of hyperbolic 3-space with curvature ``-H^2``."""
    rho = np.asarray(rho, dtype=float)
    small = np.abs(rho) < 1e-8
    ratio = np.where(small, 1.0, rho / np.sinh(np.where(small, 1.0, rho)))
    return H**3 * (4 * np.pi * s_tilde) ** -1.5 * ratio * np.exp(-s_tilde - rho**2 / (4 * s_tilde))


def _log_sinh(a: float) -> float:
    return a + np.log1p(-np.exp(-2 * a)) - np.log(2.0) if a > 1 else np.log(np.sinh(a))


def hyperbolic2_kernel(s_tilde, rho, H: float = 1.0):
    """Heat kernel of the hyperbolic plane (McKean's integral form)."""
    from scipy.integrate import quad

    rho = float(rho)

    def f(u):
        # r = rho + u^2 removes the inverse square-root endpoint singularity
        r = rho + u * u
        if u == 0.0:
            return 2 * r / np.sqrt(np.sinh(rho)) if rho > 0 else 2 * np.sqrt(2.0)
        # cosh r - cosh rho = 2 sinh((r + rho)/2) sinh((r - rho)/2)
        log_gap = np.log(2.0) + _log_sinh(0.5 * (r + rho)) + _log_sinh(0.5 * u * u)
        return 2 * u * r * np.exp(-r * r / (4 * s_tilde) - 0.5 * log_gap)

    val, _ = quad(f, 0.0, np.inf, epsabs=0, epsrel=1e-13, limit=400)
    return H**2 * np.sqrt(2) * np.exp(-s_tilde / 4) / (4 * np.pi * s_tilde) ** 1.5 * val


def heat_residual(params: DeSitterParams, points_t, points_x, tp: float, xp, h: float = 2e-3, ds_rel: float = 1e-3, n_phi: int = 256):
    """``|(d_s - Delta_theta) K| / |K|`` at sample points, fixed second point.

    ``Delta_theta`` is the paired-stencil operator of the flat-slicing
    triple (``N = 1``, zero shift, ``g = exp(2Ht)``) applied by
    :class:`lapsewick.hessian.PointwiseHessian`; ``d_s`` is a central
    difference.
    """
    from dataclasses import replace

    from .hessian import PointwiseHessian, spec_fields

    spec = de_sitter_spec(params.H, params.d)
    xp = np.asarray(xp, dtype=float)

    def kernel_at(prm):
        def f(t, x):
            tt = np.asarray(t, dtype=float)
            return ds_heat_kernel(prm, tt, x, np.full(tt.shape, tp), np.broadcast_to(xp, np.shape(x)), n_phi=n_phi).value

        return f

    f = kernel_at(params)
    op = PointwiseHessian(spec_fields(spec), None, [h] * (1 + params.d), params.d)
    lap = op.apply_theta(f, points_t, points_x, params.theta)
    ds = ds_rel * params.s
    k_plus = kernel_at(replace(params, s=params.s + ds))(points_t, points_x)
    k_minus = kernel_at(replace(params, s=params.s - ds))(points_t, points_x)
    dk = (k_plus - k_minus) / (2 * ds)
    k0 = f(points_t, points_x)
    return np.abs(dk - lap) / np.abs(k0), k0
