"""Scalar field action in 1+d form, its rotated version and admissibility.

The action of a real triple with signature ``eps`` is

    S = sum vol sqrt(g) [ e0(phi)^2 / (2N) + eps/2 N g^ab d_a phi d_b phi + eps N U(phi) ]

and the rotated action is ``S_-`` with ``N -> exp(-i theta) N``. Two
gradient stencils are offered. ``"paired"`` averages the forward and the
backward one-sided stencils of the squared gradients, which makes the
discrete action an exact quadratic form whose Hessian is the operator
assembled in :mod:`lapsewick.hessian`. ``"central"`` uses central
differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AdmissibilityError, DoubleRotationError, InvalidTripleError, point_label
from .geometry import AdmTriple, Grid
from .jacobians import DiffeoMap
from .stencils import derivative
from .wick import leaf_data, transform_triple, wick_rotate_fiducial


@dataclass(frozen=True)
class Potential:
    """Non-negative potential ``U`` with first and second derivatives."""

    U: Callable[[np.ndarray], np.ndarray]
    dU: Callable[[np.ndarray], np.ndarray]
    d2U: Callable[[np.ndarray], np.ndarray]
    name: str = "U"
    sup_d2U: float | None = None

    def __call__(self, phi):
        return self.U(phi)

    def check(self, phi: np.ndarray) -> None:
        u = np.asarray(self.U(phi))
        if np.any(u < 0):
            idx = np.argwhere(u < 0)[0]
            raise AdmissibilityError(f"potential {self.name} negative at {point_label(idx)}")


def zero_potential() -> Potential:
    z = lambda p: np.zeros_like(np.asarray(p, dtype=float))
    return Potential(z, z, z, "zero", 0.0)


def constant_potential(u: float) -> Potential:
    if u < 0:
        raise AdmissibilityError("constant potential must be non-negative")
    z = lambda p: np.zeros_like(np.asarray(p, dtype=float))
    return Potential(lambda p: np.full(np.shape(p), float(u)), z, z, f"const({u:g})", 0.0)


def mass_potential(m: float) -> Potential:
    """``U = m^2 phi^2 / 2``."""
    m2 = float(m) ** 2
    return Potential(
        lambda p: 0.5 * m2 * np.asarray(p) ** 2,
        lambda p: m2 * np.asarray(p),
        lambda p: np.full(np.shape(p), m2),
        f"mass({m:g})",
        m2,
    )


def quartic_potential(m: float, lam: float) -> Potential:
    """``U = m^2 phi^2 / 2 + lam phi^4 / 24`` with ``lam >= 0``."""
    if lam < 0:
        raise AdmissibilityError("quartic coupling must be non-negative")
    m2 = float(m) ** 2
    return Potential(
        lambda p: 0.5 * m2 * np.asarray(p) ** 2 + lam / 24.0 * np.asarray(p) ** 4,
        lambda p: m2 * np.asarray(p) + lam / 6.0 * np.asarray(p) ** 3,
        lambda p: m2 + 0.5 * lam * np.asarray(p) ** 2,
        f"quartic({m:g},{lam:g})",
    )


def cosine_potential(amp: float) -> Potential:
    """``U = amp (1 - cos phi)``; bounded second derivative."""
    if amp < 0:
        raise AdmissibilityError("amplitude must be non-negative")
    return Potential(
        lambda p: amp * (1.0 - np.cos(p)),
        lambda p: amp * np.sin(p),
        lambda p: amp * np.cos(p),
        f"cosine({amp:g})",
        float(amp),
    )


@dataclass(frozen=True)
class ScalarField:
    """Closed-form scalar field with an optional analytic gradient."""

    fn: Callable
    grad: Callable | None = None
    name: str = "phi"

    def __call__(self, t, x):
        return np.asarray(self.fn(t, x), dtype=float) * np.ones(np.shape(t))

    def on(self, grid: Grid) -> np.ndarray:
        t, x = grid.coords()
        return self(t, x)


def constant_field(c: float) -> ScalarField:
    return ScalarField(
        lambda t, x: np.full(np.shape(t), float(c)),
        lambda t, x: np.zeros(np.shape(x)[:-1] + (np.shape(x)[-1] + 1,)),
        f"const({c:g})",
    )


def random_scalar_field(
    d: int = 1,
    seed: int = 0,
    n_modes: int = 4,
    amp: float = 1.0,
    max_k: int = 2,
    offset: float = 0.0,
    extent_t: float = 2 * np.pi,
    extent_x: float = 2 * np.pi,
) -> ScalarField:
    """Random periodic trigonometric polynomial with analytic gradient."""
    rng = np.random.default_rng(seed)
    ks = rng.integers(-max_k, max_k + 1, size=(n_modes, 1 + d)).astype(float)
    ks[np.all(ks == 0, axis=1), 0] = 1.0
    ks *= np.concatenate([[2 * np.pi / extent_t], np.full(d, 2 * np.pi / extent_x)])
    ph = rng.uniform(0, 2 * np.pi, n_modes)
    c = amp * rng.uniform(-1, 1, n_modes) / np.sqrt(n_modes)

    def arg(t, x):
        y = np.concatenate([np.asarray(t, dtype=float)[..., None], np.asarray(x, dtype=float)], axis=-1)
        return y @ ks.T + ph

    def fn(t, x):
        return offset + np.sin(arg(t, x)) @ c

    def grad(t, x):
        return (np.cos(arg(t, x)) * c) @ ks

    return ScalarField(fn, grad, f"random(seed={seed})")


def field_values(phi, triple: AdmTriple) -> np.ndarray:
    if isinstance(phi, ScalarField):
        if triple.t is None:
            raise InvalidTripleError("triple has no points to sample the field on")
        return phi(triple.t, triple.x)
    values = np.asarray(phi, dtype=float)
    if values.shape != triple.shape:
        raise ValueError(f"field shape {values.shape} != triple shape {triple.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("scalar field has non-finite values")
    return values


def _grid_of(triple: AdmTriple) -> Grid:
    if triple.grid is None:
        raise InvalidTripleError("a grid triple is required for quadrature")
    return triple.grid


def gradient_squares(values, triple: AdmTriple, stencil: str = "paired"):
    """Return ``(e0(phi)^2, g^ab d_a phi d_b phi)`` on the grid."""
    grid = _grid_of(triple)
    ginv = triple.metric_inverse()
    kinds = ("forward", "backward") if stencil == "paired" else (stencil,)
    e0sq = 0.0
    gradsq = 0.0
    for kind in kinds:
        dt = derivative(values, grid, 0, kind)
        dx = np.stack([derivative(values, grid, 1 + a, kind) for a in range(grid.d)], axis=-1)
        e0 = dt - np.einsum("...a,...a->...", triple.shift, dx)
        e0sq = e0sq + e0**2
        gradsq = gradsq + np.einsum("...a,...ab,...b->...", dx, ginv, dx)
    return e0sq / len(kinds), gradsq / len(kinds)


def _resolve_lapse(triple: AdmTriple, theta):
    if theta is not None:
        if triple.is_rotated:
            raise DoubleRotationError("pass an un-rotated triple together with theta")
        return np.exp(-1j * theta) * np.real(triple.lapse), -1
    if triple.is_rotated:
        return triple.lapse, -1
    return np.real(triple.lapse), triple.signature


def action_density(triple: AdmTriple, phi, potential: Potential, theta=None, stencil="paired"):
    """Integrand of the 1+d action per unit coordinate volume."""
    values = field_values(phi, triple)
    potential.check(values)
    N, eps = _resolve_lapse(triple, theta)
    e0sq, gradsq = gradient_squares(values, triple, stencil)
    root = np.sqrt(np.linalg.det(np.real(triple.spatial_metric)))
    return root * (e0sq / (2 * N) + 0.5 * eps * N * gradsq + eps * N * potential(values))


def evaluate_action(triple: AdmTriple, phi, potential: Potential, theta=None, stencil="paired"):
    """Rectangle-rule action on the periodic grid.

    Without ``theta`` the real action of the triple's signature is returned;
    with ``theta`` (or for a fiducially rotated triple) the rotated action.
    """
    grid = _grid_of(triple)
    dens = action_density(triple, phi, potential, theta, stencil)
    total = np.sum(dens.ravel()) * grid.cell_volume
    return complex(total) if np.iscomplexobj(total) else float(total)


def energy_momentum_bitransversal(triple: AdmTriple, phi, potential: Potential, stencil="central") -> np.ndarray:
    """``e0^2/(2N^2) - eps/2 g^ab d_a phi d_b phi - eps U`` on the grid."""
    if triple.is_rotated:
        raise DoubleRotationError("energy-momentum projection expects an un-rotated triple")
    values = field_values(phi, triple)
    N = np.real(triple.lapse)
    eps = triple.signature
    e0sq, gradsq = gradient_squares(values, triple, stencil)
    return e0sq / (2 * N**2) - 0.5 * eps * gradsq - eps * potential(values)


def wec_limit_residual(triple: AdmTriple, phi, potential: Potential, theta: float, stencil="paired") -> float:
    """``|(S_theta - S_-)/(i theta) - S_+|``."""
    s_theta = evaluate_action(triple, phi, potential, theta, stencil)
    s_minus = evaluate_action(triple.with_signature(-1), phi, potential, None, stencil)
    s_plus = evaluate_action(triple.with_signature(1), phi, potential, None, stencil)
    return float(abs((s_theta - s_minus) / (1j * theta) - s_plus))


def action_decomposition_residual(triple: AdmTriple, phi, potential: Potential, theta: float, stencil="paired") -> float:
    """Relative gap ``|S_theta - (cos S_- + i sin S_+)| / |S_theta|``."""
    s_theta = evaluate_action(triple, phi, potential, theta, stencil)
    s_minus = evaluate_action(triple.with_signature(-1), phi, potential, None, stencil)
    s_plus = evaluate_action(triple.with_signature(1), phi, potential, None, stencil)
    combo = np.cos(theta) * s_minus + 1j * np.sin(theta) * s_plus
    return float(abs(s_theta - combo) / max(abs(s_theta), 1e-300))


# pointwise (two-chart) quantities ------------------------------------------------


def _fd_steps(h, d):
    h = np.broadcast_to(np.asarray(h, dtype=float), (1 + d,))
    return h


def fiducial_gradient(phi: ScalarField, t, x, derivatives="analytic", h=1e-3) -> np.ndarray:
    """``d_mu phi`` at arbitrary points (analytic, or central differences)."""
    if derivatives == "analytic":
        if phi.grad is None:
            raise ValueError("field has no analytic gradient")
        return np.asarray(phi.grad(t, x), dtype=float)
    d = np.shape(x)[-1]
    steps = _fd_steps(h, d)
    out = []
    for mu in range(1 + d):
        dt = steps[0] if mu == 0 else 0.0
        dx = np.zeros(d)
        if mu > 0:
            dx[mu - 1] = steps[mu]
        out.append((phi(t + dt, x + dx) - phi(t - dt, x - dx)) / (2 * steps[mu]))
    return np.stack(out, axis=-1)


def primed_gradient(phi: ScalarField, diffeo: DiffeoMap, t, x, derivatives="analytic", h=1e-3, blocks=None) -> np.ndarray:
    """``d'_mu phi'`` at the image points of ``(t, x)``.

    Analytic mode applies the inverse Jacobian to the analytic gradient.
    Finite-difference mode differentiates ``phi o chi^-1`` in primed
    coordinates with central differences.
    """
    if derivatives == "analytic":
        blocks = blocks if blocks is not None else diffeo.blocks(t, x)
        Jinv = blocks.inverse().matrix()
        return np.einsum("...nm,...n->...m", Jinv, fiducial_gradient(phi, t, x))
    tp, xp = diffeo(t, x)
    pulled = ScalarField(lambda a, b: phi(*diffeo.pullback(a, b)), None, "pullback")
    return fiducial_gradient(pulled, tp, xp, "fd", h)


def _combination(lapse, shift, ginv, grad, sign):
    e0 = grad[..., 0] - np.einsum("...a,...a->...", shift, grad[..., 1:])
    g2 = np.einsum("...a,...ab,...b->...", grad[..., 1:], ginv, grad[..., 1:])
    return (e0 / lapse) ** 2 + sign * g2


@dataclass(frozen=True)
class GradientCombinationReport:
    residual: float
    lhs: np.ndarray
    rhs: np.ndarray
    rhs_min: float
    mode: str


def gradient_combination_transform(
    triple: AdmTriple, phi: ScalarField, diffeo: DiffeoMap, sign: str = "sum", derivatives="analytic", h=1e-3
) -> GradientCombinationReport:
    """Transformation of ``[N^-1 e0 phi]^2 +/- eps g^ab d phi d phi``.

    ``sum`` compares the primed combination with the unprimed one (a scalar);
    ``difference`` compares it with the closed form in terms of ``C`` and
    ``D`` and reports the minimum of that closed form.
    """
    if sign not in ("sum", "difference"):
        raise ValueError("sign must be 'sum' or 'difference'")
    if triple.is_rotated:
        raise DoubleRotationError("use an un-rotated triple")
    t, x = triple.t, triple.x
    eps = triple.signature
    blocks = diffeo.blocks(t, x)
    image = transform_triple(triple, diffeo, blocks=blocks)
    grad = fiducial_gradient(phi, t, x, derivatives, h)
    gradp = primed_gradient(phi, diffeo, t, x, derivatives, h, blocks=blocks)
    s = eps if sign == "sum" else -eps
    lhs = _combination(image.lapse, image.shift, image.metric_inverse(), gradp, s)
    if sign == "sum":
        rhs = _combination(triple.lapse, triple.shift, triple.metric_inverse(), grad, s)
    else:
        ld = leaf_data(triple, blocks)
        N = triple.lapse
        v = blocks.tx
        e0 = grad[..., 0] - np.einsum("...a,...a->...", triple.shift, grad[..., 1:])
        first = ld.C * e0 / N + eps * N * np.einsum("...c,...cd,...d->...", v, ld.ginv, grad[..., 1:])
        w = ld.C[..., None] * grad[..., 1:] - v * e0[..., None]
        rhs = (first**2 - eps * np.einsum("...c,...cd,...d->...", w, ld.ginv, w)) / ld.D**2
    return GradientCombinationReport(
        float(np.max(np.abs(lhs - rhs))), lhs, rhs, float(np.min(rhs)), sign
    )


def rotated_lagrangian(lapse, shift, ginv, grad, u, theta) -> np.ndarray:
    """``-exp(-i theta) L(phi, g_theta)`` for a (possibly complex) -1 triple."""
    e0 = grad[..., 0] - np.einsum("...a,...a->...", shift, grad[..., 1:])
    g2 = np.einsum("...a,...ab,...b->...", grad[..., 1:], ginv, grad[..., 1:])
    return np.exp(-1j * theta) * (e0**2 / (2 * lapse**2) - 0.5 * g2 - u)


def signature_lagrangian(lapse, shift, ginv, grad, u, eps) -> np.ndarray:
    """``L(phi, g_eps) = 1/2 g_eps^{mu nu} d phi d phi + U``."""
    e0 = grad[..., 0] - np.einsum("...a,...a->...", shift, grad[..., 1:])
    g2 = np.einsum("...a,...ab,...b->...", grad[..., 1:], ginv, grad[..., 1:])
    return 0.5 * (eps * e0**2 / lapse**2 + g2) + u


@dataclass(frozen=True)
class LagrangianScalarReport:
    """Residuals of the two-chart comparison of the rotated Lagrangian."""

    residual: float
    real_residual: float
    imag_residual: float
    decomposition_residual: float
    fiducial: np.ndarray
    image: np.ndarray


def lagrangian_scalar_residual(
    triple: AdmTriple,
    phi: ScalarField,
    potential: Potential,
    diffeo: DiffeoMap,
    theta: float,
    derivatives: str = "analytic",
    h=1e-3,
) -> LagrangianScalarReport:
    """Compare ``-exp(-i theta) L`` in the fiducial and the image chart.

    The image side uses the transformed rotated triple and the derivatives
    of the pulled-back field; the decomposition into real-signature
    Lagrangians uses the matching-signature transforms of the real triple.
    """
    if triple.is_rotated:
        raise DoubleRotationError("use an un-rotated triple")
    t, x = triple.t, triple.x
    blocks = diffeo.blocks(t, x)
    rotated = wick_rotate_fiducial(triple, theta)
    image = transform_triple(rotated, diffeo, blocks=blocks)
    u = potential(phi(t, x))
    grad = fiducial_gradient(phi, t, x, derivatives, h)
    gradp = primed_gradient(phi, diffeo, t, x, derivatives, h, blocks=blocks)
    fid = rotated_lagrangian(rotated.lapse, rotated.shift, rotated.metric_inverse(), grad, u, theta)
    img = rotated_lagrangian(image.lapse, image.shift, image.metric_inverse(), gradp, u, theta)
    parts = {}
    for eps in (-1, 1):
        im_eps = transform_triple(triple.with_signature(eps), diffeo, blocks=blocks)
        lag_img = signature_lagrangian(im_eps.lapse, im_eps.shift, im_eps.metric_inverse(), gradp, u, eps)
        lag_fid = signature_lagrangian(triple.lapse, triple.shift, triple.metric_inverse(), grad, u, eps)
        parts[eps] = (lag_fid, lag_img)
    combo = -np.cos(theta) * parts[-1][1] + 1j * np.sin(theta) * parts[1][1]
    re_res = np.cos(theta) * np.max(np.abs(parts[-1][0] - parts[-1][1]))
    im_res = np.sin(theta) * np.max(np.abs(parts[1][0] - parts[1][1]))
    return LagrangianScalarReport(
        residual=float(np.max(np.abs(fid - img))),
        real_residual=float(re_res),
        imag_residual=float(im_res),
        decomposition_residual=float(np.max(np.abs(img - combo))),
        fiducial=fid,
        image=img,
    )


def image_chart_imag_action(
    triple: AdmTriple, phi: ScalarField, potential: Potential, diffeo: DiffeoMap, theta: float,
    derivatives: str = "fd", h=None,
) -> tuple[float, float]:
    """``Im S_theta`` from fiducial-chart and image-chart pointwise data.

    Both sums run over the fiducial grid; the image side uses the measure
    ``|det J| exp(i theta) sqrt(-g'_theta)`` and the image-chart Lagrangian.
    """
    grid = _grid_of(triple)
    h = h if h is not None else np.array(grid.spacings)
    lag = lagrangian_scalar_residual(triple, phi, potential, diffeo, theta, derivatives, h)
    t, x = triple.t, triple.x
    blocks = diffeo.blocks(t, x)
    image = transform_triple(wick_rotate_fiducial(triple, theta), diffeo, blocks=blocks)
    neg_det = image.lapse**2 * np.linalg.det(image.spatial_metric)
    measure_img = np.sqrt(np.exp(2j * theta) * neg_det) * np.abs(blocks.determinant())
    measure_fid = np.real(triple.lapse) * np.sqrt(np.linalg.det(triple.spatial_metric))
    vol = grid.cell_volume
    fid = float(np.imag(np.sum((measure_fid * lag.fiducial).ravel()) * vol))
    img = float(np.imag(np.sum((measure_img * lag.image).ravel()) * vol))
    return fid, img
