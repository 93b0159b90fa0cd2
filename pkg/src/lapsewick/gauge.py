"""Linearized gauge variations and the algebra of surface deformations.

Variations are evaluated on grid fields with Fourier derivatives (exact
Leibniz rule for resolved products). Second variations are directional
finite differences in field space: ``delta_1 delta_2 F`` is the derivative
of the expression ``delta_2 F`` (descriptors held fixed, field-dependent
reparameterization included) along ``delta_1 F``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DoubleRotationError, InvalidTripleError, NumericalDifferentiationError
from .geometry import AdmTriple, Grid, TripleSpec
from .jacobians import DiffeoMap
from .stencils import derivative
from .wick import transform_triple

FIELDS = ("lapse", "shift", "metric", "phi")


@dataclass(frozen=True)
class GaugeFields:
    """Grid fields ``(N, N^a, g_ab, phi)``; ``phi`` may be ``None``."""

    lapse: np.ndarray
    shift: np.ndarray
    metric: np.ndarray
    phi: np.ndarray | None = None

    def parts(self):
        return [p for p in (self.lapse, self.shift, self.metric, self.phi) if p is not None]

    def axpy(self, eta, other: "GaugeFields") -> "GaugeFields":
        return GaugeFields(
            self.lapse + eta * other.lapse,
            self.shift + eta * other.shift,
            self.metric + eta * other.metric,
            None if self.phi is None else self.phi + eta * other.phi,
        )

    def combine(self, coeffs, others) -> "GaugeFields":
        out = self.scaled(0.0)
        for c, o in zip(coeffs, others):
            out = out.axpy(c, o)
        return out

    def scaled(self, c) -> "GaugeFields":
        return GaugeFields(
            c * self.lapse, c * self.shift, c * self.metric, None if self.phi is None else c * self.phi
        )

    def max_abs(self) -> dict[str, float]:
        names = FIELDS if self.phi is not None else FIELDS[:3]
        return {n: float(np.max(np.abs(p))) for n, p in zip(names, self.parts())}


@dataclass(frozen=True)
class Descriptor:
    """Field-independent descriptors ``(eps0, eps^a)``.

    With ``theta`` set, ``eps0`` holds the rotated component
    ``eps^theta = exp(-i theta) eps^0``.
    """

    eps0: np.ndarray
    eps: np.ndarray
    theta: float | None = None

    def __post_init__(self):
        if not (np.all(np.isfinite(self.eps0)) and np.all(np.isfinite(self.eps))):
            raise ValueError("descriptor has non-finite values")
        if self.theta is not None:
            nz = np.abs(self.eps0) > 1e-14
            ref = self.eps0[nz] * np.exp(1j * self.theta)
            if np.any(np.abs(ref.imag) > 1e-12 * np.maximum(1.0, np.abs(ref))):
                raise ValueError("rotated descriptor must have phase -theta")

    def scaled(self, c: float) -> "Descriptor":
        return replace(self, eps0=c * self.eps0, eps=c * self.eps)


def random_descriptor(grid: Grid, seed: int = 0, amp: float = 0.5, max_k: int = 1, theta: float | None = None, spatial_only: bool = False) -> Descriptor:
    """Smooth random descriptors made of a few low Fourier modes."""
    rng = np.random.default_rng(seed)
    t, x = grid.coords()
    y = np.concatenate([t[..., None], x], axis=-1)
    freq = np.array([2 * np.pi / grid.extent_t] + [2 * np.pi / grid.extent_x] * grid.d)

    def trig():
        ks = rng.integers(-max_k, max_k + 1, size=(3, 1 + grid.d)) * freq
        c = rng.uniform(-1, 1, 3) * amp / 3
        ph = rng.uniform(0, 2 * np.pi, 3)
        return (amp * 0.5 * rng.uniform(-1, 1)) + np.cos(y @ ks.T + ph) @ c

    eps0 = np.zeros(grid.shape) if spatial_only else trig()
    eps = np.stack([trig() for _ in range(grid.d)], axis=-1)
    if theta is not None:
        eps0 = np.exp(-1j * theta) * eps0
    return Descriptor(eps0, eps, theta)


@dataclass
class GaugeAlgebra:
    """Variations on a grid with a fixed derivative stencil."""

    grid: Grid
    signature: int = -1
    kind: str = "spectral"

    def d(self, f, mu):
        return derivative(f, self.grid, mu, self.kind)

    def dx(self, f):
        """Spatial gradient, new last axis."""
        return np.stack([self.d(f, 1 + a) for a in range(self.grid.d)], axis=-1)

    # Lie derivatives along a spatial vector X
    def lie_scalar(self, X, f):
        return np.einsum("...a,...a->...", X, self.dx(f))

    def lie_vector(self, X, Y):
        dY = self.dx(Y)  # [..., a, b] = d_b Y^a
        dX = self.dx(X)
        return np.einsum("...b,...ab->...a", X, dY) - np.einsum("...b,...ab->...a", Y, dX)

    def lie_metric(self, X, g):
        dg = self.dx(g)  # [..., a, b, c] = d_c g_ab
        dX = self.dx(X)  # [..., c, a] = d_a X^c
        return (
            np.einsum("...c,...abc->...ab", X, dg)
            + np.einsum("...cb,...ca->...ab", g, dX)
            + np.einsum("...ac,...cb->...ab", g, dX)
        )

    def variation(self, F: GaugeFields, xi0, xi) -> GaugeFields:
        """Linearized transformation generated by ``(xi^0, xi^a)``."""
        N, S, g = F.lapse, F.shift, F.metric
        ginv = np.linalg.inv(g)
        X = xi + xi0[..., None] * S
        e0 = lambda f: self.d(f, 0) - self.lie_scalar(S, f)
        dN = e0(xi0 * N) + self.lie_scalar(X, N)
        dS = (
            self.d(X, 0)
            - self.lie_vector(S, X)
            + self.signature * (N**2)[..., None] * np.einsum("...ab,...b->...a", ginv, self.dx(xi0))
        )
        dg = xi0[..., None, None] * (self.d(g, 0) - self.lie_metric(S, g)) + self.lie_metric(X, g)
        dphi = None
        if F.phi is not None:
            dphi = xi0 * self.d(F.phi, 0) + self.lie_scalar(xi, F.phi)
        return GaugeFields(dN, dS, dg, dphi)

    def variation_descriptor(self, F: GaugeFields, desc: Descriptor) -> GaugeFields:
        """Variation with ``xi^0 = eps0/N``, ``xi^a = eps^a - eps0 N^a / N``."""
        xi0 = desc.eps0 / F.lapse
        xi = desc.eps - xi0[..., None] * F.shift
        return self.variation(F, xi0, xi)

    def structure(self, F: GaugeFields, d1: Descriptor, d2: Descriptor) -> Descriptor:
        """``gamma^0`` and ``gamma^a`` of the algebra at the fields ``F``."""
        ginv = np.linalg.inv(F.metric)
        g0 = self.lie_scalar(d1.eps, d2.eps0) - self.lie_scalar(d2.eps, d1.eps0)
        cross = d1.eps0[..., None] * self.dx(d2.eps0) - d2.eps0[..., None] * self.dx(d1.eps0)
        ga = self.lie_vector(d1.eps, d2.eps) - self.signature * np.einsum("...ab,...b->...a", ginv, cross)
        return Descriptor(g0, ga, None)

    def second_variation(self, F, outer: Descriptor, inner: Descriptor, eta: float, scheme: str = "central") -> GaugeFields:
        """Directional difference of ``delta_inner F`` along ``delta_outer F``."""
        step = self.variation_descriptor(F, outer)
        if scheme == "central":
            plus = self.variation_descriptor(F.axpy(eta, step), inner)
            minus = self.variation_descriptor(F.axpy(-eta, step), inner)
            return _diff(plus, minus, 2 * eta)
        if scheme == "forward":
            plus = self.variation_descriptor(F.axpy(eta, step), inner)
            base = self.variation_descriptor(F, inner)
            return _diff(plus, base, eta)
        raise ValueError(f"unknown scheme {scheme!r}")

    def commutator(self, F, d1, d2, eta, scheme="central") -> GaugeFields:
        a = self.second_variation(F, d1, d2, eta, scheme)
        b = self.second_variation(F, d2, d1, eta, scheme)
        return _diff(a, b, 1.0)


def _diff(a: GaugeFields, b: GaugeFields, denom) -> GaugeFields:
    return GaugeFields(
        (a.lapse - b.lapse) / denom,
        (a.shift - b.shift) / denom,
        (a.metric - b.metric) / denom,
        None if a.phi is None else (a.phi - b.phi) / denom,
    )


def _max_gap(a: GaugeFields, b: GaugeFields) -> float:
    return float(max(np.max(np.abs(p - q)) for p, q in zip(a.parts(), b.parts())))


def fields_from_triple(triple: AdmTriple, phi=None, theta: float | None = None) -> GaugeFields:
    """Grid fields of a real triple, optionally with the rotated lapse."""
    if triple.is_rotated:
        raise DoubleRotationError("pass the un-rotated triple and theta separately")
    N = np.real(triple.lapse)
    if theta is not None:
        N = np.exp(-1j * theta) * N
    return GaugeFields(N, np.real(triple.shift), np.real(triple.spatial_metric), None if phi is None else np.asarray(phi, dtype=float))


def gauge_variation(triple: AdmTriple, xi0, xi, phi=None, kind: str = "spectral") -> GaugeFields:
    """``(delta N, delta N^a, delta g_ab, delta phi)`` on the triple's grid."""
    if triple.grid is None:
        raise InvalidTripleError("a grid triple is required")
    alg = GaugeAlgebra(triple.grid, triple.signature, kind)
    return alg.variation(fields_from_triple(triple, phi), np.asarray(xi0, dtype=float) * np.ones(triple.shape), np.asarray(xi, dtype=float) * np.ones(triple.shape + (triple.d,)))


@dataclass(frozen=True)
class CommutatorReport:
    residual: float
    per_field: dict
    raw_residuals: tuple
    etas: tuple
    extrapolation_gap: float
    scale: float


def commutator_structure_check(
    triple: AdmTriple,
    d1: Descriptor,
    d2: Descriptor,
    theta: float | None = None,
    phi=None,
    eta: float = 1e-3,
    scheme: str = "central",
    kind: str = "spectral",
    gap_tol: float = 1e-5,
) -> CommutatorReport:
    """``(delta_1 delta_2 - delta_2 delta_1) F + delta_gamma F`` after extrapolation.

    For ``theta`` the triple enters with lapse ``exp(-i theta) N`` in the
    ``-1`` convention and the descriptors must be rotated accordingly.
    """
    if (theta is None) != (d1.theta is None) or (theta is None) != (d2.theta is None):
        raise ValueError("descriptor rotation must match the requested mode")
    signature = -1 if theta is not None else triple.signature
    alg = GaugeAlgebra(triple.grid, signature, kind)
    F = fields_from_triple(triple, phi, theta)
    gamma = alg.structure(F, d1, d2)
    target = alg.variation_descriptor(F, gamma).scaled(-1.0)
    order = 2 if scheme == "central" else 1
    etas = (eta, eta / 2, eta / 4)
    raw = [alg.commutator(F, d1, d2, e, scheme) for e in etas]
    fac = 2.0**order
    ext1 = raw[1].combine([fac / (fac - 1), -1 / (fac - 1)], [raw[1], raw[0]])
    ext2 = raw[2].combine([fac / (fac - 1), -1 / (fac - 1)], [raw[2], raw[1]])
    scale = max(target.max_abs().values()) or 1.0
    gap = _max_gap(ext1, ext2)
    if gap > gap_tol * max(scale, 1.0):
        raise NumericalDifferentiationError(
            f"Richardson extrapolation not converged: gap {gap:.3e} at eta={eta}"
        )
    names = FIELDS if phi is not None else FIELDS[:3]
    per = {n: float(np.max(np.abs(p - q))) for n, p, q in zip(names, ext2.parts(), target.parts())}
    return CommutatorReport(
        residual=max(per.values()),
        per_field=per,
        raw_residuals=tuple(_max_gap(r, target) for r in raw),
        etas=etas,
        extrapolation_gap=gap,
        scale=scale,
    )


def flow_map(xi0_fn, xi_fn, eps: float, d: int, extent_t=2 * np.pi, extent_x=2 * np.pi) -> DiffeoMap:
    """``t' = t - eps xi0(t, x)``, ``x' = x - eps xi(t, x)`` with FD Jacobian.

    The inverse is a fixed-point iteration (a contraction for small ``eps``).
    """

    def fwd(t, x):
        return t - eps * xi0_fn(t, x), x - eps * xi_fn(t, x)

    def inv(tp, xp):
        t, x = tp.copy(), xp.copy()
        for _ in range(200):
            tn = tp + eps * xi0_fn(t, x)
            xn = xp + eps * xi_fn(t, x)
            delta = max(np.max(np.abs(tn - t)), np.max(np.abs(xn - x)))
            t, x = tn, xn
            if delta < 1e-15:
                break
        return t, x

    return DiffeoMap(fwd, d, None, inv, mode="fd", extent_t=extent_t, extent_x=extent_x, name=f"flow(eps={eps:g})")


def linearization_residuals(spec: TripleSpec, grid: Grid, xi0_fn, xi_fn, epsilons=(1e-2, 5e-3, 2.5e-3)):
    """``max |[transf(T, chi_eps) - T]/eps - delta_xi T|`` for each ``eps``.

    The transformed triple is evaluated back on the grid points by
    transforming at the preimages ``chi_eps^{-1}(grid)``.
    """
    t, x = grid.coords()
    base = spec.on(grid)
    alg = GaugeAlgebra(grid, spec.signature, "spectral")
    delta = alg.variation(fields_from_triple(base), xi0_fn(t, x) * np.ones(t.shape), xi_fn(t, x) * np.ones(x.shape))
    out = []
    for eps in epsilons:
        chi = flow_map(xi0_fn, xi_fn, eps, grid.d, grid.extent_t, grid.extent_x)
        tz, xz = chi.pullback(t, x)
        img = transform_triple(spec.at(tz, xz), chi)
        diff = GaugeFields(
            (img.lapse - base.lapse) / eps,
            (img.shift - base.shift) / eps,
            (img.spatial_metric - base.spatial_metric) / eps,
        )
        out.append(_max_gap(diff, delta))
    return np.array(out)
