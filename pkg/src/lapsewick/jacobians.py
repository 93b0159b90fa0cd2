"""Block Jacobians of coordinate maps and their inversion and composition.

For a map ``(t, x) -> (t', x')`` the blocks are

    tt = dt'/dt,  tx[b] = dt'/dx^b,  xt[a] = dx'^a/dt,  xx[a, b] = dx'^a/dx^b.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import (
    BlockInversionError,
    CompositionError,
    EvaluationError,
    InversionError,
    OrientationError,
    point_label,
)


@dataclass(frozen=True)
class JacobianBlocks:
    tt: np.ndarray
    tx: np.ndarray
    xt: np.ndarray
    xx: np.ndarray

    @property
    def d(self) -> int:
        return self.tx.shape[-1]

    @property
    def shape(self) -> tuple[int, ...]:
        return np.shape(self.tt)

    def matrix(self) -> np.ndarray:
        """Dense ``(1+d) x (1+d)`` Jacobian ``d y'^mu / d y^nu`` per point."""
        d = self.d
        dtype = np.result_type(self.tt, self.tx, self.xt, self.xx)
        J = np.zeros(self.shape + (d + 1, d + 1), dtype=dtype)
        J[..., 0, 0] = self.tt
        J[..., 0, 1:] = self.tx
        J[..., 1:, 0] = self.xt
        J[..., 1:, 1:] = self.xx
        return J

    @classmethod
    def from_matrix(cls, J: np.ndarray) -> "JacobianBlocks":
        J = np.asarray(J)
        return cls(J[..., 0, 0], J[..., 0, 1:], J[..., 1:, 0], J[..., 1:, 1:])

    def determinant(self) -> np.ndarray:
        return np.linalg.det(self.matrix())

    def inverse(self) -> "JacobianBlocks":
        return invert_jacobian_blocks(self)

    def then(self, outer: "JacobianBlocks") -> "JacobianBlocks":
        """Chain rule: blocks of ``outer o self`` (``outer`` at the image)."""
        return chain_blocks(outer, self)

    def max_difference(self, other: "JacobianBlocks") -> float:
        return float(np.max(np.abs(self.matrix() - other.matrix())))


def identity_blocks(shape, d) -> JacobianBlocks:
    shape = tuple(shape)
    return JacobianBlocks(
        np.ones(shape),
        np.zeros(shape + (d,)),
        np.zeros(shape + (d,)),
        np.broadcast_to(np.eye(d), shape + (d, d)).copy(),
    )


def _first_bad(mask):
    return np.argwhere(mask)[0] if np.ndim(mask) else ()


def invert_jacobian_blocks(blocks: JacobianBlocks, tol: float = 1e-13) -> JacobianBlocks:
    """Blocks of the inverse map via a Sherman-Morrison update.

    With ``u = xt / tt`` the spatial block of the inverse is
    ``Y = (xx - u tx^T)^{-1}``, obtained from ``xx^{-1}`` by a rank-one
    correction. The remaining blocks follow from ``Y``.
    """
    T = np.asarray(blocks.tt)
    v = np.asarray(blocks.tx)
    w = np.asarray(blocks.xt)
    A = np.asarray(blocks.xx)
    scale = np.maximum(1.0, np.max(np.abs(blocks.matrix()), axis=(-2, -1)))
    bad = np.abs(T) <= tol * scale
    if np.any(bad):
        raise BlockInversionError(f"dt'/dt vanishes at {point_label(_first_bad(bad))}")
    detA = np.linalg.det(A)
    bad = np.abs(detA) <= tol * scale ** A.shape[-1]
    if np.any(bad):
        raise BlockInversionError(
            f"spatial block singular at {point_label(_first_bad(bad))}"
        )
    Ainv = np.linalg.inv(A)
    u = w / T[..., None]
    Ainv_u = np.einsum("...ab,...b->...a", Ainv, u)
    v_Ainv = np.einsum("...a,...ab->...b", v, Ainv)
    denom = 1.0 - np.einsum("...a,...a->...", v, Ainv_u)
    bad = np.abs(denom) <= tol
    if np.any(bad):
        raise BlockInversionError(
            f"Sherman-Morrison denominator vanishes at {point_label(_first_bad(bad))}"
        )
    Y = Ainv + np.einsum("...a,...b->...ab", Ainv_u, v_Ainv) / denom[..., None, None]
    Yw = np.einsum("...ab,...b->...a", Y, w)
    vY = np.einsum("...c,...ca->...a", v, Y)
    tt = 1.0 / T + np.einsum("...c,...c->...", v, Yw) / T**2
    return JacobianBlocks(tt, -vY / T[..., None], -Yw / T[..., None], Y)


def chain_blocks(outer: JacobianBlocks, inner: JacobianBlocks) -> JacobianBlocks:
    """Blockwise chain rule for ``outer o inner``."""
    T2, v2, w2, A2 = outer.tt, outer.tx, outer.xt, outer.xx
    T1, v1, w1, A1 = inner.tt, inner.tx, inner.xt, inner.xx
    tt = T2 * T1 + np.einsum("...a,...a->...", v2, w1)
    tx = T2[..., None] * v1 + np.einsum("...a,...ab->...b", v2, A1)
    xt = w2 * T1[..., None] + np.einsum("...ab,...b->...a", A2, w1)
    xx = np.einsum("...a,...b->...ab", w2, v1) + np.einsum("...ac,...cb->...ab", A2, A1)
    return JacobianBlocks(tt, tx, xt, xx)


@dataclass(frozen=True)
class DiffeoMap:
    """A coordinate map ``(t, x) -> (t', x')`` with optional closed forms.

    ``forward(t, x)`` returns ``(t', x')`` for point arrays of shape ``S`` and
    ``S + (d,)``. ``jacobian(t, x)`` returns :class:`JacobianBlocks`;
    when absent or when ``mode == "fd"`` central differences are used with
    steps ``fd_step * extents``.
    """

    forward: Callable
    d: int
    jacobian: Callable | None = None
    inverse: Callable | None = None
    mode: str = "analytic"
    fd_step: float = 1e-5
    richardson: bool = False
    extent_t: float = 2.0 * np.pi
    extent_x: float = 2.0 * np.pi
    domain: Callable | None = None
    name: str = "map"

    def __post_init__(self):
        if self.mode not in ("analytic", "fd"):
            raise ValueError(f"unknown jacobian mode {self.mode!r}")

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        tp, xp = self.forward(t, x)
        tp = np.asarray(tp, dtype=float) * np.ones(t.shape)
        xp = np.asarray(xp, dtype=float) * np.ones(x.shape)
        if not (np.all(np.isfinite(tp)) and np.all(np.isfinite(xp))):
            raise EvaluationError(f"map {self.name} produced non-finite values")
        return tp, xp

    def blocks(self, t, x) -> JacobianBlocks:
        return jacobian_blocks(self, t, x)

    def pullback(self, tp, xp):
        """Apply the closed-form inverse."""
        if self.inverse is None:
            raise InversionError(f"map {self.name} has no closed-form inverse")
        t, x = self.inverse(np.asarray(tp, dtype=float), np.asarray(xp, dtype=float))
        return np.asarray(t, dtype=float) * np.ones(np.shape(tp)), np.asarray(x, dtype=float) * np.ones(np.shape(xp))

    def with_mode(self, mode: str, fd_step: float | None = None, richardson: bool | None = None) -> "DiffeoMap":
        kwargs = {"mode": mode}
        if fd_step is not None:
            kwargs["fd_step"] = fd_step
        if richardson is not None:
            kwargs["richardson"] = richardson
        return replace(self, **kwargs)

    def inverted(self) -> "DiffeoMap":
        """The inverse map, with blocks from inverting the forward blocks."""
        if self.inverse is None:
            raise InversionError(f"map {self.name} has no closed-form inverse")
        fwd = self

        def jac(tp, xp):
            t, x = fwd.pullback(tp, xp)
            return invert_jacobian_blocks(fwd.blocks(t, x))

        return replace(
            self,
            forward=self.inverse,
            inverse=self.forward,
            jacobian=jac if self.mode == "analytic" else None,
            domain=None,
            name=f"inverse({self.name})",
        )

    def check_orientation(self, t, x, blocks: JacobianBlocks | None = None):
        blocks = blocks if blocks is not None else self.blocks(t, x)
        det = blocks.determinant()
        if np.any(det <= 0):
            raise OrientationError(
                f"map {self.name} reverses orientation at {point_label(_first_bad(det <= 0))}"
            )
        return blocks


def _fd_blocks(m: DiffeoMap, t, x, scale: float) -> JacobianBlocks:
    d = m.d
    steps = np.array([m.extent_t] + [m.extent_x] * d) * m.fd_step * scale
    J = np.zeros(np.shape(t) + (d + 1, d + 1))
    for nu in range(d + 1):
        dt = np.zeros(np.shape(t))
        dx = np.zeros(np.shape(x))
        if nu == 0:
            dt = dt + steps[0]
        else:
            dx[..., nu - 1] = steps[nu]
        tp_p, xp_p = m(t + dt, x + dx)
        tp_m, xp_m = m(t - dt, x - dx)
        J[..., 0, nu] = (tp_p - tp_m) / (2 * steps[nu])
        J[..., 1:, nu] = (xp_p - xp_m) / (2 * steps[nu])
    return JacobianBlocks.from_matrix(J)


def jacobian_blocks(m: DiffeoMap, t, x) -> JacobianBlocks:
    """Jacobian blocks of ``m`` at the given points (analytic or central FD)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if m.mode == "analytic" and m.jacobian is not None:
        b = m.jacobian(t, x)
        shape = t.shape
        d = m.d
        b = JacobianBlocks(
            np.asarray(b.tt, dtype=float) * np.ones(shape),
            np.asarray(b.tx, dtype=float) * np.ones(shape + (d,)),
            np.asarray(b.xt, dtype=float) * np.ones(shape + (d,)),
            np.asarray(b.xx, dtype=float) * np.ones(shape + (d, d)),
        )
    else:
        b = _fd_blocks(m, t, x, 1.0)
        if m.richardson:
            half = _fd_blocks(m, t, x, 0.5)
            b = JacobianBlocks.from_matrix((4.0 * half.matrix() - b.matrix()) / 3.0)
    if not np.all(np.isfinite(b.matrix())):
        raise EvaluationError(f"non-finite Jacobian for map {m.name}")
    return b


def compose_diffeos(first: DiffeoMap, second: DiffeoMap) -> DiffeoMap:
    """The map ``second o first`` with chain-rule blocks."""
    if first.d != second.d:
        raise CompositionError(f"dimension mismatch: {first.d} vs {second.d}")

    def fwd(t, x):
        tp, xp = first(t, x)
        if second.domain is not None and not np.all(second.domain(tp, xp)):
            bad = ~np.asarray(second.domain(tp, xp))
            raise CompositionError(
                f"image of {first.name} leaves the domain of {second.name} at "
                f"{point_label(_first_bad(bad))}"
            )
        return second(tp, xp)

    def jac(t, x):
        tp, xp = fwd(t, x)
        inner = first.blocks(t, x)
        tp, xp = first(t, x)
        return chain_blocks(second.blocks(tp, xp), inner)

    inv = None
    if first.inverse is not None and second.inverse is not None:

        def inv(tpp, xpp):
            return first.pullback(*second.pullback(tpp, xpp))

    analytic = first.mode == "analytic" and second.mode == "analytic"
    return DiffeoMap(
        forward=fwd,
        d=first.d,
        jacobian=jac if analytic else None,
        inverse=inv,
        mode="analytic" if analytic else "fd",
        fd_step=min(first.fd_step, second.fd_step),
        richardson=first.richardson or second.richardson,
        extent_t=first.extent_t,
        extent_x=first.extent_x,
        domain=first.domain,
        name=f"{second.name}o{first.name}",
    )
