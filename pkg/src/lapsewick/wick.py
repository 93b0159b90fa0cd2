"""Lapse rotation, foliation-changing transformations and rank-one forms.

A rotated triple is stored in the ``-1`` convention with lapse
``N_theta = exp(-i theta) N``. The transformation of a triple under a
coordinate map uses the signature of the triple; for rotated triples the
same formulas are evaluated with the complex lapse.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    BranchError,
    DegenerateLeafError,
    DomainError,
    DoubleRotationError,
    InvalidTripleError,
    point_label,
)
from .geometry import AdmTriple, reconstruct_metric
from .jacobians import DiffeoMap, JacobianBlocks, invert_jacobian_blocks

LEAF_TOL = 1e-10
BRANCH_STEPS = 64

LORENTZIAN = -1
EUCLIDEAN = 1


def wick_rotate_fiducial(triple: AdmTriple, theta: float) -> AdmTriple:
    """Rotate the lapse in the fiducial foliation.

    ``N -> i eps^{-1/2} exp(-i theta) N``; written in the ``-1`` convention
    both signatures give the lapse ``exp(-i theta) N``.
    """
    if triple.is_rotated:
        raise DoubleRotationError("triple is already rotated")
    if not 0.0 <= theta < np.pi:
        raise DomainError(f"theta must lie in [0, pi), got {theta}")
    lapse = np.exp(-1j * theta) * np.real(triple.lapse)
    return replace(triple, lapse=lapse, signature=-1, theta=float(theta), fiducial=True)


def wick_flip(triple: AdmTriple, target: int) -> AdmTriple:
    """Flip in the fiducial foliation: retag a real triple to ``target``.

    ``target=+1`` is the Euclidean flip, ``target=-1`` the Lorentzian one.
    Both are idempotent, and the later flip wins when two are composed.
    """
    if target not in (-1, 1):
        raise ValueError("target signature must be -1 or +1")
    if triple.is_rotated:
        if triple.theta == 0.0:
            triple = triple.real_part()
        else:
            raise InvalidTripleError("flip expects an un-rotated triple")
    return triple.with_signature(target)


@dataclass(frozen=True)
class LeafData:
    """Per-point combinations of triple and Jacobian that recur everywhere."""

    C: np.ndarray
    D: np.ndarray
    radicand: np.ndarray
    X: np.ndarray
    ginv: np.ndarray
    blocks: JacobianBlocks
    inverse_blocks: JacobianBlocks


def _points(triple: AdmTriple):
    if triple.t is None or triple.x is None:
        raise InvalidTripleError("triple carries no point coordinates")
    return triple.t, triple.x


def _continued_sqrt(C2, Nabs2q, theta):
    """Square root of ``C2 - exp(-2i th) Nabs2q`` continued from ``th = pi/2``."""
    root = np.sqrt(C2 + Nabs2q + 0j)
    for th in np.linspace(np.pi / 2, theta, BRANCH_STEPS + 1)[1:]:
        nxt = np.sqrt(C2 - np.exp(-2j * th) * Nabs2q + 0j)
        root = np.where(np.abs(nxt - root) <= np.abs(nxt + root), nxt, -nxt)
    return root


def check_branch(triple: AdmTriple, C, q, radicand):
    """Reject radicands on the closed negative real axis.

    For a fiducially rotated triple the square root is additionally
    continued along ``theta`` from the Euclidean point and compared with
    the principal value.
    """
    scale = np.maximum(np.abs(radicand), 1e-300)
    on_cut = (np.abs(np.imag(radicand)) <= 1e-14 * scale) & (np.real(radicand) < 0)
    if np.any(on_cut):
        idx = np.argwhere(on_cut)[0]
        raise BranchError(f"radicand on the branch cut at {point_label(idx)}")
    if triple.theta is not None and triple.fiducial and triple.theta != np.pi / 2:
        n_abs2 = np.abs(triple.lapse) ** 2
        continued = _continued_sqrt(np.real(C) ** 2, n_abs2 * np.real(q), triple.theta)
        principal = np.sqrt(radicand + 0j)
        flipped = np.abs(continued - principal) > np.abs(continued + principal)
        if np.any(flipped):
            idx = np.argwhere(flipped)[0]
            raise BranchError(
                f"principal root differs from the continued root at {point_label(idx)}"
            )


def leaf_data(triple: AdmTriple, blocks: JacobianBlocks) -> LeafData:
    """``C``, ``D``, ``X`` and friends for a triple and map blocks."""
    N = triple.lapse
    shift = triple.shift
    eps = triple.signature
    ginv = triple.metric_inverse()
    T, v, w, A = blocks.tt, blocks.tx, blocks.xt, blocks.xx
    C = T - np.einsum("...c,...c->...", v, shift)
    q = np.einsum("...c,...cd,...d->...", v, ginv, v)
    rad = C**2 + eps * N**2 * q
    small = np.abs(rad) <= LEAF_TOL
    if np.any(small):
        raise DegenerateLeafError(f"|D^2| <= {LEAF_TOL} at {point_label(np.argwhere(small)[0])}")
    if np.isrealobj(rad):
        if np.any(rad < 0):
            idx = np.argwhere(rad < 0)[0]
            raise DegenerateLeafError(f"image leaves are not spacelike at {point_label(idx)}")
        D = np.sqrt(rad)
    else:
        check_branch(triple, C, q, rad)
        D = np.sqrt(rad)
    if np.any(np.abs(C) <= 1e-14):
        raise DegenerateLeafError("C vanishes; the frame transformation is singular")
    u = w - np.einsum("...ad,...d->...a", A, shift)
    X = A - np.einsum("...a,...b->...ab", u, v) / C[..., None, None]
    return LeafData(C, D, rad, X, ginv, blocks, invert_jacobian_blocks(blocks))


def transform_triple(
    triple: AdmTriple,
    diffeo: DiffeoMap,
    blocks: JacobianBlocks | None = None,
    check_orientation: bool = True,
) -> AdmTriple:
    """Image of an ADM triple under a foliation-changing map.

    The result lives on the image points and keeps the signature tag (and
    rotation angle) of the input.
    """
    t, x = _points(triple)
    if blocks is None:
        blocks = diffeo.blocks(t, x)
    if check_orientation:
        diffeo.check_orientation(t, x, blocks)
    ld = leaf_data(triple, blocks)
    N = triple.lapse
    shift = triple.shift
    eps = triple.signature
    v, w, A = blocks.tx, blocks.xt, blocks.xx
    inv = ld.inverse_blocks
    N_new = N / ld.D
    u = w - np.einsum("...ad,...d->...a", A, shift)
    Ag_v = np.einsum("...ad,...dc,...c->...a", A, ld.ginv, v)
    shift_new = -(u * ld.C[..., None] + eps * (N**2)[..., None] * Ag_v) / (ld.D**2)[..., None]
    P = np.swapaxes(inv.xx, -1, -2) + np.einsum("...a,...c->...ac", inv.tx, shift)
    g_new = np.einsum("...ac,...bd,...cd->...ab", P, P, triple.spatial_metric)
    g_new = g_new + eps * (N**2)[..., None, None] * np.einsum("...a,...b->...ab", inv.tx, inv.tx)
    g_new = 0.5 * (g_new + np.swapaxes(g_new, -1, -2))
    tp, xp = diffeo(t, x)
    return AdmTriple(
        lapse=N_new,
        shift=shift_new,
        spatial_metric=g_new,
        signature=eps,
        theta=triple.theta,
        fiducial=False if triple.theta is not None else True,
        t=tp,
        x=xp,
        grid=None,
    )


def wick_flip_nonfiducial(triple: AdmTriple, diffeo: DiffeoMap, target: int) -> AdmTriple:
    """Flip a transformed real triple to signature ``target``.

    The triple is pulled back to the fiducial foliation with the inverse map
    (using its own signature), flipped there, and pushed forward again with
    the target signature.
    """
    if triple.is_rotated:
        raise InvalidTripleError("flip expects an un-rotated triple")
    back = transform_triple(triple, diffeo.inverted())
    return transform_triple(wick_flip(back, target), diffeo)


@dataclass(frozen=True)
class CovectorComponents:
    """Components ``(v, v_a)`` of ``v N dt + v_a e^a``."""

    v: np.ndarray
    va: np.ndarray


@dataclass(frozen=True)
class VectorComponents:
    """Components ``(vc, vca)`` of ``eps vc N^-1 e_0 + vc^a d_a``."""

    v: np.ndarray
    va: np.ndarray


def covector_coordinates(comp: CovectorComponents, triple: AdmTriple) -> np.ndarray:
    """Coordinate components ``V_mu`` of the 1-form."""
    V_t = comp.v * triple.lapse + np.einsum("...a,...a->...", comp.va, triple.shift)
    return np.concatenate([V_t[..., None], comp.va], axis=-1)


def vector_coordinates(comp: VectorComponents, triple: AdmTriple) -> np.ndarray:
    """Coordinate components ``V^mu`` of the vector."""
    c = triple.signature * comp.v / triple.lapse
    return np.concatenate([c[..., None], comp.va - c[..., None] * triple.shift], axis=-1)


def transform_covector(
    comp: CovectorComponents, triple: AdmTriple, diffeo: DiffeoMap, blocks=None
) -> CovectorComponents:
    """Foliation-frame components of a 1-form in the image foliation."""
    t, x = _points(triple)
    blocks = blocks if blocks is not None else diffeo.blocks(t, x)
    ld = leaf_data(triple, blocks)
    N = triple.lapse
    eps = triple.signature
    v_t = blocks.tx
    inv = ld.inverse_blocks
    new_v = (ld.C * comp.v + eps * N * np.einsum("...c,...cd,...d->...", v_t, ld.ginv, comp.va)) / ld.D
    P = np.swapaxes(inv.xx, -1, -2) + np.einsum("...a,...c->...ac", inv.tx, triple.shift)
    new_va = np.einsum("...ab,...b->...a", P, comp.va) + (N * comp.v)[..., None] * inv.tx
    return CovectorComponents(new_v, new_va)


def transform_vector(
    comp: VectorComponents, triple: AdmTriple, diffeo: DiffeoMap, blocks=None
) -> VectorComponents:
    """Frame components of a vector in the image foliation."""
    t, x = _points(triple)
    blocks = blocks if blocks is not None else diffeo.blocks(t, x)
    ld = leaf_data(triple, blocks)
    N = triple.lapse
    eps = triple.signature
    v_t = blocks.tx
    bracket = ld.C * comp.v + eps * N * np.einsum("...a,...a->...", v_t, comp.va)
    new_v = bracket / ld.D
    g_v = np.einsum("...bc,...c->...b", ld.ginv, v_t)
    inner = comp.va - g_v * (N * bracket / ld.D**2)[..., None]
    new_va = np.einsum("...ab,...b->...a", ld.X, inner)
    return VectorComponents(new_v, new_va)


def _pushforward(blocks: JacobianBlocks, vectors: np.ndarray) -> np.ndarray:
    return np.einsum("...mn,...kn->...km", blocks.matrix(), vectors)


def line_element_residual(
    triple: AdmTriple, diffeo: DiffeoMap, theta: float | None = None, n_random: int = 4, seed: int = 0
) -> float:
    """Max violation of ``g(u, w) = g'(chi_* u, chi_* w)``.

    Uses every pair of coordinate basis vectors plus ``n_random`` random
    vectors per point. ``theta`` rotates the (un-rotated) input first.
    """
    if theta is not None:
        triple = wick_rotate_fiducial(triple, theta)
    t, x = _points(triple)
    blocks = diffeo.blocks(t, x)
    image = transform_triple(triple, diffeo, blocks=blocks)
    g = reconstruct_metric(triple).metric
    gp = reconstruct_metric(image).metric
    dim = triple.d + 1
    rng = np.random.default_rng(seed)
    vecs = np.concatenate(
        [np.broadcast_to(np.eye(dim), triple.shape + (dim, dim)),
         rng.standard_normal(triple.shape + (n_random, dim))],
        axis=-2,
    )
    pushed = _pushforward(blocks, vecs)
    lhs = np.einsum("...km,...mn,...ln->...kl", vecs, g, vecs)
    rhs = np.einsum("...km,...mn,...ln->...kl", pushed, gp, pushed)
    return float(np.max(np.abs(lhs - rhs)))


def inverse_metric_residual(
    triple: AdmTriple, diffeo: DiffeoMap, theta: float | None = None, n_random: int = 4, seed: int = 0
) -> float:
    """Same contract for the inverse metric paired with pulled-back covectors."""
    if theta is not None:
        triple = wick_rotate_fiducial(triple, theta)
    t, x = _points(triple)
    blocks = diffeo.blocks(t, x)
    image = transform_triple(triple, diffeo, blocks=blocks)
    gi = reconstruct_metric(triple).inverse
    gip = reconstruct_metric(image).inverse
    dim = triple.d + 1
    rng = np.random.default_rng(seed)
    covs = np.concatenate(
        [np.broadcast_to(np.eye(dim), triple.shape + (dim, dim)),
         rng.standard_normal(triple.shape + (n_random, dim))],
        axis=-2,
    )
    # a primed covector alpha' pulls back to alpha_nu = alpha'_mu J^mu_nu
    J = blocks.matrix()
    pulled = np.einsum("...km,...mn->...kn", covs, J)
    lhs = np.einsum("...km,...mn,...ln->...kl", pulled, gi, pulled)
    rhs = np.einsum("...km,...mn,...ln->...kl", covs, gip, covs)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class RankOneForm:
    """``base + coefficient * (frame (x) frame)`` in primed coordinates.

    ``components`` holds the foliation-frame components of the perturbing
    covector ``(v', v'_a)`` or vector ``(vc', vc'^a)``; ``frame`` holds the
    same object in coordinate components.
    """

    base: AdmTriple
    variant: str
    theta: float
    coefficient: complex
    components: tuple[np.ndarray, np.ndarray]
    frame: np.ndarray

    def base_matrix(self) -> np.ndarray:
        field = reconstruct_metric(self.base)
        return field.metric if self.variant == "metric" else field.inverse

    def reassemble(self) -> np.ndarray:
        outer = np.einsum("...m,...n->...mn", self.frame, self.frame)
        return self.base_matrix() + self.coefficient * outer


def rank_one_coefficient(signature: int, theta: float, variant: str = "metric") -> complex:
    sign = -1 if variant == "metric" else 1
    return complex(-(signature + np.exp(sign * 2j * theta)))


def rank_one_decompose(triple: AdmTriple, diffeo: DiffeoMap, theta: float, variant: str = "metric") -> RankOneForm:
    """Split the rotated metric (or inverse) in the image foliation.

    The base is the real transform with the triple's own signature.
    """
    if variant not in ("metric", "inverse"):
        raise ValueError("variant must be 'metric' or 'inverse'")
    if triple.is_rotated:
        raise DoubleRotationError("rank-one split expects an un-rotated triple")
    t, x = _points(triple)
    blocks = diffeo.blocks(t, x)
    ld = leaf_data(triple, blocks)
    base = transform_triple(triple, diffeo, blocks=blocks)
    N = triple.lapse
    eps = triple.signature
    coef = rank_one_coefficient(eps, theta, variant)
    if variant == "metric":
        comp = CovectorComponents(ld.C / ld.D, N[..., None] * ld.inverse_blocks.tx)
        frame = covector_coordinates(comp, base)
    else:
        g_v = np.einsum("...bc,...c->...b", ld.ginv, blocks.tx)
        va = -(N * ld.C / ld.D**2)[..., None] * np.einsum("...ab,...b->...a", ld.X, g_v)
        comp = VectorComponents(ld.C / ld.D, va)
        frame = vector_coordinates(comp, base)
    return RankOneForm(base, variant, float(theta), coef, (comp.v, comp.va), frame)


def rank_one_residual(triple: AdmTriple, diffeo: DiffeoMap, theta: float, variant: str = "metric") -> float:
    """Pointwise gap between the reassembled form and the direct transform."""
    form = rank_one_decompose(triple, diffeo, theta, variant)
    direct = reconstruct_metric(transform_triple(wick_rotate_fiducial(triple, theta), diffeo))
    target = direct.metric if variant == "metric" else direct.inverse
    return float(np.max(np.abs(form.reassemble() - target)))


def vielbein_gram(theta: float, signature: int, internal: np.ndarray) -> np.ndarray:
    """Gram matrix ``g_theta(E_I, E_J)`` of the real foliation vielbein.

    ``internal`` is the unit internal vector ``eps_I``. The un-deformed Gram
    matrix is ``delta_IJ + (signature - 1) eps_I eps_J`` (the identity for
    ``+1``, a reflection for ``-1``), so the result is
    ``delta_IJ - (1 + exp(-2i theta)) eps_I eps_J`` in both cases.
    """
    e = np.asarray(internal, dtype=float)
    if not np.isclose(e @ e, 1.0, atol=1e-12):
        raise ValueError("internal vector must be a unit vector")
    outer = np.outer(e, e)
    base = np.eye(e.size) + (signature - 1) * outer
    return base - (signature + np.exp(-2j * theta)) * outer


def vielbein_gram_from_triple(triple: AdmTriple, theta: float, rotation: np.ndarray | None = None) -> np.ndarray:
    """Evaluate ``g_theta(E_I, E_J)`` with the real adapted vielbein.

    ``E_0 = N^-1 e_0`` and ``E_i = (g^-1/2)^a_i d_a``; an optional
    orthogonal ``rotation`` mixes the internal index.
    """
    if triple.is_rotated:
        raise DoubleRotationError("pass the un-rotated triple")
    d = triple.d
    N = np.real(triple.lapse)
    evals, evecs = np.linalg.eigh(triple.spatial_metric)
    root_inv = np.einsum("...ik,...k,...jk->...ij", evecs, evals**-0.5, evecs)
    E = np.zeros(triple.shape + (d + 1, d + 1))
    E[..., 0, 0] = 1.0 / N
    E[..., 0, 1:] = -triple.shift / N[..., None]
    E[..., 1:, 1:] = np.swapaxes(root_inv, -1, -2)
    if rotation is not None:
        E = np.einsum("IJ,...Jm->...Im", rotation, E)
    g_theta = reconstruct_metric(wick_rotate_fiducial(triple, theta)).metric
    return np.einsum("...Im,...mn,...Jn->...IJ", E, g_theta, E)
