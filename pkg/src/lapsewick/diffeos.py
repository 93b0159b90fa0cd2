"""Catalog of closed-form coordinate maps with analytic Jacobians."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .jacobians import DiffeoMap, JacobianBlocks, compose_diffeos, identity_blocks


def _unit(d, axis):
    e = np.zeros(d)
    e[axis] = 1.0
    return e


def identity(d: int = 1) -> DiffeoMap:
    return DiffeoMap(
        forward=lambda t, x: (t, x),
        d=d,
        jacobian=lambda t, x: identity_blocks(np.shape(t), d),
        inverse=lambda t, x: (t, x),
        name="identity",
    )


def scaling(c_t: float = 2.0, c_x: float = 1.0, d: int = 1) -> DiffeoMap:
    """``t' = c_t t``, ``x' = c_x x``."""
    if c_t <= 0 or c_x <= 0:
        raise ValueError("scale factors must be positive")

    def jac(t, x):
        s = np.shape(t)
        return JacobianBlocks(
            np.full(s, c_t), np.zeros(s + (d,)), np.zeros(s + (d,)),
            np.broadcast_to(c_x * np.eye(d), s + (d, d)).copy(),
        )

    return DiffeoMap(
        forward=lambda t, x: (c_t * t, c_x * x),
        d=d,
        jacobian=jac,
        inverse=lambda t, x: (t / c_t, x / c_x),
        name=f"scale({c_t:g},{c_x:g})",
    )


def boost(v: float = 0.5, d: int = 1, axis: int = 0) -> DiffeoMap:
    """Lorentz boost with velocity ``v`` along spatial ``axis``."""
    if not abs(v) < 1:
        raise ValueError("boost velocity must satisfy |v| < 1")
    gamma = 1.0 / np.sqrt(1.0 - v * v)
    e = _unit(d, axis)

    def fwd(t, x):
        xa = x[..., axis]
        xp = x.copy()
        xp[..., axis] = gamma * (xa - v * t)
        return gamma * (t - v * xa), xp

    def jac(t, x):
        s = np.shape(t)
        A = np.eye(d)
        A[axis, axis] = gamma
        return JacobianBlocks(
            np.full(s, gamma),
            np.broadcast_to(-gamma * v * e, s + (d,)).copy(),
            np.broadcast_to(-gamma * v * e, s + (d,)).copy(),
            np.broadcast_to(A, s + (d, d)).copy(),
        )

    def inv(tp, xp):
        xa = xp[..., axis]
        x = xp.copy()
        x[..., axis] = gamma * (xa + v * tp)
        return gamma * (tp + v * xa), x

    return DiffeoMap(fwd, d, jac, inv, name=f"boost({v:g})")


def shear(lam: float = 0.1, k: float = 1.0, d: int = 1, axis: int = 0) -> DiffeoMap:
    """Foliation-changing map ``t' = t + lam sin(k x^axis)``."""
    e = _unit(d, axis)

    def fwd(t, x):
        return t + lam * np.sin(k * x[..., axis]), x

    def jac(t, x):
        s = np.shape(t)
        c = lam * k * np.cos(k * x[..., axis])
        return JacobianBlocks(
            np.ones(s), c[..., None] * e, np.zeros(s + (d,)),
            np.broadcast_to(np.eye(d), s + (d, d)).copy(),
        )

    def inv(tp, xp):
        return tp - lam * np.sin(k * xp[..., axis]), xp

    return DiffeoMap(fwd, d, jac, inv, name=f"shear({lam:g},{k:g})")


def flow(mu: float = 0.1, omega: float = 1.0, d: int = 1, axis: int = 0) -> DiffeoMap:
    """Time-dependent spatial translation ``x'^axis = x^axis + mu sin(omega t)``."""
    e = _unit(d, axis)

    def fwd(t, x):
        xp = x.copy()
        xp[..., axis] = x[..., axis] + mu * np.sin(omega * t)
        return t, xp

    def jac(t, x):
        s = np.shape(t)
        c = mu * omega * np.cos(omega * t)
        return JacobianBlocks(
            np.ones(s), np.zeros(s + (d,)), c[..., None] * e,
            np.broadcast_to(np.eye(d), s + (d, d)).copy(),
        )

    def inv(tp, xp):
        x = xp.copy()
        x[..., axis] = xp[..., axis] - mu * np.sin(omega * tp)
        return tp, x

    return DiffeoMap(fwd, d, jac, inv, name=f"flow({mu:g},{omega:g})")


def spatial_warp(amp: float = 0.1, k: float = 1.0, d: int = 1, axis: int = 0) -> DiffeoMap:
    """Foliation-preserving ``x'^axis = x^axis + amp sin(k x^axis)``, |amp k| < 1.

    The inverse is computed by Newton iteration.
    """
    if abs(amp * k) >= 1:
        raise ValueError("need |amp * k| < 1 for a diffeomorphism")

    def fwd(t, x):
        xp = x.copy()
        xp[..., axis] = x[..., axis] + amp * np.sin(k * x[..., axis])
        return t, xp

    def jac(t, x):
        s = np.shape(t)
        A = np.broadcast_to(np.eye(d), s + (d, d)).copy()
        A[..., axis, axis] = 1 + amp * k * np.cos(k * x[..., axis])
        return JacobianBlocks(np.ones(s), np.zeros(s + (d,)), np.zeros(s + (d,)), A)

    def inv(tp, xp):
        y = xp[..., axis]
        z = y.copy()
        for _ in range(60):
            step = (z + amp * np.sin(k * z) - y) / (1 + amp * k * np.cos(k * z))
            z = z - step
            if np.max(np.abs(step)) < 1e-15 * (1 + np.max(np.abs(y))):
                break
        x = xp.copy()
        x[..., axis] = z
        return tp, x

    return DiffeoMap(fwd, d, jac, inv, name=f"warp({amp:g},{k:g})")


def shear_flow(lam: float = 0.1, k: float = 1.0, mu: float = 0.1, omega: float = 1.0, d: int = 1) -> DiffeoMap:
    """Shear followed by a spatial flow."""
    return compose_diffeos(shear(lam, k, d), flow(mu, omega, d))


CATALOG = {
    "identity": (identity, 0),
    "scale": (scaling, 2),
    "boost": (boost, 1),
    "shear": (shear, 2),
    "flow": (flow, 2),
    "warp": (spatial_warp, 2),
    "shearflow": (shear_flow, 4),
}


def map_from_string(text: str, d: int = 1) -> DiffeoMap:
    """Parse ``name:p1,p2,...`` into a catalog map, e.g. ``boost:0.5``."""
    name, _, rest = text.strip().partition(":")
    name = name.strip().lower()
    if name not in CATALOG:
        raise ConfigError(f"unknown map {name!r}; choose from {sorted(CATALOG)}")
    factory, max_params = CATALOG[name]
    try:
        params = [float(p) for p in rest.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad parameters in map spec {text!r}") from exc
    if len(params) > max_params:
        raise ConfigError(f"map {name} takes at most {max_params} parameters")
    try:
        return factory(*params, d=d)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
