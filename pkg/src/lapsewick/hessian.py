"""Rotated Hessian on a periodic grid and its spectral checks.

With ``w = vol N sqrt(g)`` the weighted operators are assembled as

    W D_+ = A_t + A_s + W V,   W D_- = -A_t + A_s + W V,
    A_t = 1/2 sum_s E_s^T diag(vol sqrt(g)/N) E_s,       E_s = d_t^s - N^a d_a^s,
    A_s = 1/2 sum_s (d_a^s)^T diag(vol N sqrt(g) g^ab) d_b^s,

where ``s`` runs over forward and backward one-sided differences. Both
``A`` are symmetric positive semidefinite, so ``D_+`` and ``D_-`` are
exactly self-adjoint for ``<f, g> = sum w conj(f) g``, and
``Delta_theta = -sin(theta) D_+ - i cos(theta) D_-``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment

from .errors import ContractError, DoubleRotationError, EigensolverError, InvalidTripleError, PreconditionError
from .geometry import AdmTriple, Grid, TripleSpec
from .jacobians import DiffeoMap
from .stencils import difference_matrix
from .wick import transform_triple, wick_rotate_fiducial

ORIGIN_TOL = 1e-12
DENSE_CAP = 4096


def _potential_values(V, triple: AdmTriple) -> np.ndarray:
    if callable(V):
        vals = np.asarray(V(triple.t, triple.x), dtype=float) * np.ones(triple.shape)
    else:
        vals = np.asarray(V, dtype=float) * np.ones(triple.shape)
    if not np.all(np.isfinite(vals)):
        raise PreconditionError("potential has non-finite values")
    if np.any(vals < 0):
        raise PreconditionError(f"potential is negative (min {vals.min():.3e})")
    return vals


@dataclass(frozen=True)
class HessianOperator:
    """Weighted-grid realization of ``Delta_theta`` with its parts kept."""

    A_plus: sp.csr_matrix
    A_minus: sp.csr_matrix
    weight: np.ndarray
    theta: float
    grid: Grid

    @property
    def size(self) -> int:
        return self.weight.size

    @property
    def D_plus(self) -> sp.csr_matrix:
        return sp.diags(1.0 / self.weight) @ self.A_plus

    @property
    def D_minus(self) -> sp.csr_matrix:
        return sp.diags(1.0 / self.weight) @ self.A_minus

    @property
    def matrix(self) -> sp.csr_matrix:
        """``Delta_theta`` as a sparse complex matrix."""
        return (-np.sin(self.theta) * self.D_plus - 1j * np.cos(self.theta) * self.D_minus).tocsr()

    def with_theta(self, theta: float) -> "HessianOperator":
        return replace(self, theta=float(theta))

    def apply(self, f: np.ndarray) -> np.ndarray:
        flat = np.asarray(f).reshape(self.size)
        out = (-np.sin(self.theta) * (self.A_plus @ flat) - 1j * np.cos(self.theta) * (self.A_minus @ flat)) / self.weight
        return out.reshape(np.shape(f))

    def inner(self, f, g) -> complex:
        return complex(np.sum(self.weight * np.conj(np.ravel(f)) * np.ravel(g)))

    def self_adjointness_residual(self) -> float:
        """``max |W D - D^H W|`` for both real parts."""
        res = 0.0
        for D in (self.D_plus, self.D_minus):
            WD = sp.diags(self.weight) @ D
            DW = D.conj().T @ sp.diags(self.weight)
            diff = (WD - DW).tocoo()
            if diff.nnz:
                res = max(res, float(np.max(np.abs(diff.data))))
        return res

    def decomposition_residual(self) -> float:
        """``max |Delta_theta - (-sin D_+ - i cos D_-)|`` entrywise."""
        direct = sp.diags(1.0 / self.weight) @ (
            -np.sin(self.theta) * self.A_plus - 1j * np.cos(self.theta) * self.A_minus
        )
        diff = (direct - self.matrix).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    def symmetric_dense(self) -> np.ndarray:
        """``W^{1/2} Delta_theta W^{-1/2}``: complex symmetric, same spectrum."""
        if self.size > DENSE_CAP:
            raise PreconditionError(f"{self.size} points exceed the dense cap {DENSE_CAP}")
        r = 1.0 / np.sqrt(self.weight)
        A = -np.sin(self.theta) * self.A_plus.toarray() - 1j * np.cos(self.theta) * self.A_minus.toarray()
        return r[:, None] * A * r[None, :]

    def min_rayleigh_plus(self) -> float:
        """Smallest eigenvalue of ``D_+`` (generalized symmetric problem)."""
        r = 1.0 / np.sqrt(self.weight)
        S = r[:, None] * self.A_plus.toarray() * r[None, :]
        return float(sla.eigvalsh(S, subset_by_index=[0, 0])[0])


def assemble_parts(triple: AdmTriple) -> tuple[sp.csr_matrix, sp.csr_matrix, np.ndarray]:
    """Return ``(A_t, A_s, w)`` for a real grid triple."""
    if triple.is_rotated or not triple.is_real:
        raise DoubleRotationError("assemble from the un-rotated real triple")
    grid = triple.grid
    if grid is None:
        raise InvalidTripleError("a grid triple is required")
    n = grid.n_points
    d = grid.d
    vol = grid.cell_volume
    N = np.real(triple.lapse).reshape(n)
    root = np.sqrt(np.linalg.det(np.real(triple.spatial_metric))).reshape(n)
    ginv = triple.metric_inverse().reshape(n, d, d)
    shift = np.real(triple.shift).reshape(n, d)
    M = sp.diags(vol * root / N)
    A_t = sp.csr_matrix((n, n))
    A_s = sp.csr_matrix((n, n))
    for kind in ("forward", "backward"):
        Dt = difference_matrix(grid, 0, kind)
        Dx = [difference_matrix(grid, 1 + a, kind) for a in range(d)]
        E = Dt - sum(sp.diags(shift[:, a]) @ Dx[a] for a in range(d))
        A_t = A_t + 0.5 * (E.T @ M @ E)
        for a in range(d):
            for b in range(d):
                K = sp.diags(vol * N * root * ginv[:, a, b])
                A_s = A_s + 0.5 * (Dx[a].T @ K @ Dx[b])
    A_t = (0.5 * (A_t + A_t.T)).tocsr()
    A_s = (0.5 * (A_s + A_s.T)).tocsr()
    return A_t, A_s, vol * N * root


def assemble_hessian(triple: AdmTriple, V, theta: float) -> HessianOperator:
    """Assemble ``Delta_theta`` for the triple and a potential ``V >= 0``.

    ``V`` may be a scalar, a grid array, or a callable of ``(t, x)``.
    """
    vals = _potential_values(V, triple)
    A_t, A_s, w = assemble_parts(triple)
    WV = sp.diags(w * vals.reshape(-1))
    A_plus = (A_t + A_s + WV).tocsr()
    A_minus = (-A_t + A_s + WV).tocsr()
    return HessianOperator(A_plus, A_minus, w, float(theta), triple.grid)


def sort_spectrum(eigs: np.ndarray, decimals: int = 10) -> np.ndarray:
    """Deterministic ordering by rounded real part, then imaginary part."""
    eigs = np.asarray(eigs, dtype=complex)
    order = np.lexsort((np.round(eigs.imag, decimals), np.round(eigs.real, decimals)))
    return eigs[order]


def wedge_angle(theta: float) -> float:
    """``pi/2 + min(theta, pi - theta)``."""
    return np.pi / 2 + min(theta, np.pi - theta)


@dataclass(frozen=True)
class SpectralReport:
    theta: float
    eigenvalues: np.ndarray
    wedge_margin: float
    violations: int
    n_origin: int
    tolerance: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "wedge_margin": self.wedge_margin,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "violations": int(self.violations),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _time_blocks(A: sp.csr_matrix, n_t: int, m: int, atol: float) -> np.ndarray:
    """Fourier blocks ``sum_j C_j exp(2 pi i j k / n_t)`` of a block-circulant ``A``."""
    top = A[:m].toarray()
    P = sp.kron(sp.diags(np.ones(n_t - 1), 1, shape=(n_t, n_t)) + sp.diags([1.0], -(n_t - 1), shape=(n_t, n_t)), sp.identity(m))
    gap = abs(A - P.T @ A @ P)
    if gap.nnz and gap.max() > atol * max(1.0, abs(A).max()):
        raise PreconditionError("operator is not invariant under time translation")
    C = top.reshape(m, n_t, m).transpose(1, 0, 2)
    return np.fft.ifft(C, axis=0) * n_t


def time_block_eigenvalues(op: HessianOperator, atol: float = 1e-13) -> np.ndarray:
    """Eigenvalues for a time-independent triple from ``n_t`` blocks of size ``n_x^d``.

    Time translation commutes with the operator, so each temporal Fourier
    mode spans an invariant subspace; each block is solved densely.
    """
    n_t = op.grid.n_t
    m = op.size // n_t
    w = op.weight.reshape(n_t, m)
    if np.max(np.abs(w - w[0])) > atol * np.max(np.abs(w)):
        raise PreconditionError("weight depends on time")
    Bp = _time_blocks(op.A_plus, n_t, m, atol)
    Bm = _time_blocks(op.A_minus, n_t, m, atol)
    r = 1.0 / np.sqrt(w[0])
    out = []
    for k in range(n_t):
        S = r[:, None] * (-np.sin(op.theta) * Bp[k] - 1j * np.cos(op.theta) * Bm[k]) * r[None, :]
        try:
            out.append(sla.eigvals(S, overwrite_a=True, check_finite=False))
        except (sla.LinAlgError, ValueError) as exc:
            raise EigensolverError(f"block eigensolve failed at temporal mode {k}: {exc}") from exc
    eigs = np.concatenate(out)
    if not np.all(np.isfinite(eigs)):
        raise EigensolverError(f"non-finite eigenvalues for n={op.size}, theta={op.theta}")
    return sort_spectrum(eigs)


def eigenvalues(op: HessianOperator, method: str = "dense") -> np.ndarray:
    """All eigenvalues of ``Delta_theta``.

    ``method="dense"`` solves the full matrix; ``"time_blocks"`` requires a
    time-independent triple and solves one block per temporal mode.
    """
    if method == "time_blocks":
        return time_block_eigenvalues(op)
    if method != "dense":
        raise ValueError(f"unknown eigenvalue method {method!r}")
    S = op.symmetric_dense()
    try:
        if np.isclose(op.theta, np.pi / 2, rtol=0, atol=0):
            eigs = sla.eigvalsh(S.real) + 0j
        else:
            eigs = sla.eigvals(S, overwrite_a=True, check_finite=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"dense eigensolve failed for n={op.size}, theta={op.theta}: {exc}") from exc
    if not np.all(np.isfinite(eigs)):
        raise EigensolverError(f"non-finite eigenvalues for n={op.size}, theta={op.theta}")
    return sort_spectrum(eigs)


def spectral_report(op: HessianOperator, tolerance: float = 1e-10, origin_tol: float = ORIGIN_TOL, method: str = "dense") -> SpectralReport:
    """Wedge statistics ``min(|Arg lambda| - (pi/2 + theta~))`` over the spectrum."""
    eigs = eigenvalues(op, method)
    origin = np.abs(eigs) < origin_tol
    args = np.abs(np.angle(eigs[~origin]))
    margins = args - wedge_angle(op.theta)
    margin = float(np.min(margins)) if margins.size else float("inf")
    return SpectralReport(
        theta=op.theta,
        eigenvalues=eigs,
        wedge_margin=margin,
        violations=int(np.sum(margins < -tolerance)),
        n_origin=int(np.sum(origin)),
        tolerance=tolerance,
    )


def discrete_symbols(grid: Grid) -> np.ndarray:
    """``(omega^2, p^2)`` of the 3-point Laplacians for every Fourier mode."""
    axes = []
    for i, n in enumerate(grid.shape):
        h = grid.spacings[i]
        k = 2 * np.pi * np.fft.fftfreq(n, d=h)
        axes.append(2.0 * (1.0 - np.cos(k * h)) / h**2)
    mesh = np.meshgrid(*axes, indexing="ij")
    omega2 = mesh[0].ravel()
    p2 = sum(m.ravel() for m in mesh[1:])
    return np.stack([omega2, p2], axis=-1)


def flat_torus_spectrum(grid: Grid, m2: float, theta: float, part: str = "delta") -> np.ndarray:
    """Symbol oracle for ``N = 1``, zero shift, unit spatial metric, ``V = m2``."""
    sym = discrete_symbols(grid)
    plus = sym[:, 0] + sym[:, 1] + m2
    minus = -sym[:, 0] + sym[:, 1] + m2
    if part == "plus":
        return np.sort(plus)
    if part == "minus":
        return np.sort(minus)
    return sort_spectrum(-np.sin(theta) * plus - 1j * np.cos(theta) * minus)


def match_spectra(a: np.ndarray, b: np.ndarray) -> float:
    """Max distance under an optimal one-to-one pairing of two spectra."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("spectra have different sizes")
    a = sort_spectrum(a, 8)
    b = sort_spectrum(b, 8)
    dist = np.abs(a - b)
    scale = max(1.0, float(np.max(np.abs(a))))
    bad = np.nonzero(dist > 1e-9 * scale)[0]
    if bad.size:
        cost = np.abs(a[bad][:, None] - b[bad][None, :])
        r, c = linear_sum_assignment(cost)
        dist[bad] = cost[r, c]
    return float(np.max(dist))


def adjoint_residual(op: HessianOperator, op_reflected: HessianOperator, n_pairs: int = 8, seed: int = 0) -> float:
    """``max |<f, Delta_theta g> - <Delta_{pi-theta} f, g>| / (|f| |g|)``."""
    if op.size != op_reflected.size or not np.array_equal(op.weight, op_reflected.weight):
        raise ContractError("operators use different weights")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        f = rng.standard_normal(op.size) + 1j * rng.standard_normal(op.size)
        g = rng.standard_normal(op.size) + 1j * rng.standard_normal(op.size)
        lhs = op.inner(f, op.apply(g))
        rhs = op.inner(op_reflected.apply(f), g)
        norm = np.sqrt(op.inner(f, f).real * op.inner(g, g).real)
        worst = max(worst, abs(lhs - rhs) / norm)
    return float(worst)


def numerical_range_violation(op: HessianOperator, n_vectors: int = 1000, seed: int = 0) -> float:
    """Largest ``(|<f, D_- f>| - <f, D_+ f>) / (|f|^2 |D_+|)`` over random ``f``.

    Non-positive values mean every sampled point of the numerical range
    lies in the wedge.
    """
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((op.size, n_vectors)) + 1j * rng.standard_normal((op.size, n_vectors))
    plus = np.real(np.sum(np.conj(F) * (op.A_plus @ F), axis=0))
    minus = np.real(np.sum(np.conj(F) * (op.A_minus @ F), axis=0))
    norm = np.real(np.sum(op.weight[:, None] * np.abs(F) ** 2, axis=0))
    scale = float(np.max(np.abs(op.D_plus.data))) if op.D_plus.nnz else 1.0
    return float(np.max((np.abs(minus) - plus) / (norm * scale)))


def numerical_range_args(op: HessianOperator, n_vectors: int = 200, seed: int = 0) -> np.ndarray:
    """``Arg <f, Delta_theta f>`` for random vectors."""
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((op.size, n_vectors)) + 1j * rng.standard_normal((op.size, n_vectors))
    plus = np.real(np.sum(np.conj(F) * (op.A_plus @ F), axis=0))
    minus = np.real(np.sum(np.conj(F) * (op.A_minus @ F), axis=0))
    return np.angle(-np.sin(op.theta) * plus - 1j * np.cos(op.theta) * minus)


# closed-form (pointwise) application ------------------------------------------


class PointwiseHessian:
    """Paired-stencil operators applied to closed-form functions at any points.

    ``fields(t, x)`` returns ``(N, shift, g_ab)`` (possibly complex). The
    stencil arithmetic mirrors :func:`assemble_parts`, with unit cell volume,
    so on grid points it reproduces the assembled matrices.
    """

    def __init__(self, fields: Callable, potential: Callable | None, steps, d: int):
        self.fields = fields
        self.potential = potential
        self.steps = np.asarray(steps, dtype=float)
        self.d = d

    def _shift_pts(self, t, x, mu, k):
        if mu == 0:
            return t + k * self.steps[0], x
        xs = x.copy()
        xs[..., mu - 1] = xs[..., mu - 1] + k * self.steps[mu]
        return t, xs

    def _coeffs(self, t, x):
        N, shift, g = self.fields(t, x)
        ginv = np.linalg.inv(g)
        root = np.sqrt(np.linalg.det(g) + 0j) if np.iscomplexobj(g) else np.sqrt(np.linalg.det(g))
        return N, shift, root, ginv

    def _E(self, s, f, t, x, shift):
        h = self.steps
        f0 = f(t, x)
        if s > 0:
            out = (f(*self._shift_pts(t, x, 0, 1)) - f0) / h[0]
        else:
            out = (f0 - f(*self._shift_pts(t, x, 0, -1))) / h[0]
        for a in range(self.d):
            if s > 0:
                diff = (f(*self._shift_pts(t, x, a + 1, 1)) - f0) / h[a + 1]
            else:
                diff = (f0 - f(*self._shift_pts(t, x, a + 1, -1))) / h[a + 1]
            out = out - shift[..., a] * diff
        return out

    def _ET(self, s, g, t, x):
        """``(E_s^T g)(z)`` where ``g`` is a callable of points."""
        h = self.steps
        g0 = g(t, x)
        _, sh0, _, _ = self._coeffs(t, x)
        if s > 0:
            out = (g(*self._shift_pts(t, x, 0, -1)) - g0) / h[0]
        else:
            out = (g0 - g(*self._shift_pts(t, x, 0, 1))) / h[0]
        for a in range(self.d):
            tn, xn = self._shift_pts(t, x, a + 1, -s)
            _, shn, _, _ = self._coeffs(tn, xn)
            gn = g(tn, xn)
            if s > 0:
                out = out + (sh0[..., a] * g0 - shn[..., a] * gn) / h[a + 1]
            else:
                out = out + (shn[..., a] * gn - sh0[..., a] * g0) / h[a + 1]
        return out

    def _Dx(self, s, a, f, t, x):
        h = self.steps[a + 1]
        if s > 0:
            return (f(*self._shift_pts(t, x, a + 1, 1)) - f(t, x)) / h
        return (f(t, x) - f(*self._shift_pts(t, x, a + 1, -1))) / h

    def _DxT(self, s, a, g, t, x):
        h = self.steps[a + 1]
        if s > 0:
            return (g(*self._shift_pts(t, x, a + 1, -1)) - g(t, x)) / h
        return (g(t, x) - g(*self._shift_pts(t, x, a + 1, 1))) / h

    def parts(self, f: Callable, t, x):
        """``(A_t f / w, A_s f / w, V)`` at the points."""
        N, shift, root, ginv = self._coeffs(t, x)
        w = N * root
        At = 0.0
        As = 0.0
        for s in (1, -1):

            def g_t(tt, xx, s=s):
                Nn, sh, rt, _ = self._coeffs(tt, xx)
                return rt / Nn * self._E(s, f, tt, xx, sh)

            At = At + 0.5 * self._ET(s, g_t, t, x)
            for a in range(self.d):

                def g_s(tt, xx, s=s, a=a):
                    Nn, _, rt, gi = self._coeffs(tt, xx)
                    acc = 0.0
                    for b in range(self.d):
                        acc = acc + Nn * rt * gi[..., a, b] * self._Dx(s, b, f, tt, xx)
                    return acc

                As = As + 0.5 * self._DxT(s, a, g_s, t, x)
        V = self.potential(t, x) if self.potential is not None else 0.0
        return At / w, As / w, V

    def apply_plus(self, f, t, x):
        T, S, V = self.parts(f, t, x)
        return T + S + V * f(t, x)

    def apply_minus(self, f, t, x):
        T, S, V = self.parts(f, t, x)
        return -T + S + V * f(t, x)

    def apply_theta(self, f, t, x, theta):
        """``-sin D_+ f - i cos D_- f`` (real fields)."""
        T, S, V = self.parts(f, t, x)
        fv = f(t, x)
        return -np.sin(theta) * (T + S + V * fv) - 1j * np.cos(theta) * (-T + S + V * fv)

    def apply_complex(self, f, t, x, theta):
        """``-i exp(-i theta) D_-`` built from a rotated (complex) triple."""
        T, S, V = self.parts(f, t, x)
        return -1j * np.exp(-1j * theta) * (-T + S + V * f(t, x))


def spec_fields(spec: TripleSpec, signature_theta=None):
    """Field callable of a closed-form triple, optionally rotated."""

    def fields(t, x):
        tr = spec.at(t, x)
        N = tr.lapse if signature_theta is None else np.exp(-1j * signature_theta) * tr.lapse
        return N, tr.shift, tr.spatial_metric

    return fields


def image_fields(spec: TripleSpec, diffeo: DiffeoMap, signature: int | None = None, theta: float | None = None):
    """Fields of the transformed triple as a callable of image points."""

    def fields(tp, xp):
        t, x = diffeo.pullback(tp, xp)
        tr = spec.at(t, x)
        if theta is not None:
            tr = wick_rotate_fiducial(tr, theta)
        elif signature is not None:
            tr = tr.with_signature(signature)
        img = transform_triple(tr, diffeo)
        return img.lapse, img.shift, img.spatial_metric

    return fields


@dataclass(frozen=True)
class InvarianceResult:
    residual: float
    relative: float
    complex_route_residual: float


def hessian_invariance_residual(
    spec: TripleSpec,
    V: Callable,
    theta: float,
    diffeo: DiffeoMap,
    grid: Grid,
    test_fn: Callable,
) -> InvarianceResult:
    """Two-chart comparison of ``Delta_theta`` applied to a scalar.

    The fiducial side uses the real triple; the image side uses
    ``D'_+`` and ``D'_-`` from the matching-signature transforms and, as a
    second route, the transformed rotated (complex) triple. Test function
    and potential are transported as scalars. Steps equal the grid spacings.
    """
    t, x = grid.coords()
    steps = grid.spacings
    fid = PointwiseHessian(spec_fields(spec.with_signature(-1)), V, steps, grid.d)
    lhs = fid.apply_theta(test_fn, t, x, theta)

    def pulled(fn):
        return lambda a, b: fn(*diffeo.pullback(a, b))

    tp, xp = diffeo(t, x)
    f_img = pulled(test_fn)
    V_img = pulled(V)
    plus = PointwiseHessian(image_fields(spec, diffeo, signature=1), V_img, steps, grid.d)
    minus = PointwiseHessian(image_fields(spec, diffeo, signature=-1), V_img, steps, grid.d)
    rhs = -np.sin(theta) * plus.apply_plus(f_img, tp, xp) - 1j * np.cos(theta) * minus.apply_minus(f_img, tp, xp)
    cplx = PointwiseHessian(image_fields(spec, diffeo, theta=theta), V_img, steps, grid.d)
    rhs_c = cplx.apply_complex(f_img, tp, xp, theta)
    res = float(np.max(np.abs(lhs - rhs)))
    return InvarianceResult(
        residual=res,
        relative=res / float(np.max(np.abs(lhs))),
        complex_route_residual=float(np.max(np.abs(lhs - rhs_c))),
    )


def action_expansion_residuals(triple: AdmTriple, phi, potential, f, theta: float, scales=(1e-1, 5e-2, 2.5e-2)):
    """Remainders of the quadratic expansion of ``S_theta`` around ``phi``.

    For each scale ``e`` returns
    ``S[phi + e f] - S[phi] - e L1 - e^2 L2`` where ``L1`` uses the kinetic
    part of ``-i W Delta_theta`` and ``U'(phi)``, and ``L2`` is the
    quadratic form with ``V = U''(phi)``.
    """
    from .action import evaluate_action, field_values

    values = field_values(phi, triple)
    f = np.asarray(f, dtype=float).reshape(triple.shape)
    A_t, A_s, w = assemble_parts(triple)
    flat_phi = values.ravel()
    flat_f = f.ravel()
    kinetic = np.exp(1j * theta) * (A_t @ flat_phi) - np.exp(-1j * theta) * (A_s @ flat_phi)
    lin = np.dot(flat_f, kinetic) - np.exp(-1j * theta) * np.sum(w * potential.dU(flat_phi) * flat_f)
    op = assemble_hessian(triple, potential.d2U(values), theta)
    quad = 0.5 * np.sum(w * flat_f * (-1j) * op.apply(flat_f))
    base = evaluate_action(triple, values, potential, theta)
    out = []
    for e in scales:
        s = evaluate_action(triple, values + e * f, potential, theta)
        out.append(abs(s - base - e * lin - e * e * quad))
    return np.array(out)
