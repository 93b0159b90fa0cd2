"""Periodic finite-difference and spectral derivatives on a :class:`Grid`.

Grid arrays carry the ``1 + d`` grid axes first; trailing axes are
components and are left untouched. Axis 0 is time.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .geometry import Grid

KINDS = ("central", "forward", "backward", "spectral")


def roll(f: np.ndarray, axis: int, k: int) -> np.ndarray:
    """Values at ``z + k e_axis`` (periodic)."""
    return np.roll(f, -k, axis=axis)


def forward(f, axis, h):
    return (roll(f, axis, 1) - f) / h


def backward(f, axis, h):
    return (f - roll(f, axis, -1)) / h


def central(f, axis, h):
    return (roll(f, axis, 1) - roll(f, axis, -1)) / (2.0 * h)


def spectral(f, axis, extent):
    """Fourier derivative; the Nyquist mode is dropped for even lengths."""
    n = f.shape[axis]
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=extent / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    out = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(f, axis=axis), axis=axis)
    return out.real if np.isrealobj(f) else out


def derivative(f: np.ndarray, grid: Grid, axis: int, kind: str = "central") -> np.ndarray:
    """Partial derivative along grid axis ``axis`` (0 = time)."""
    h = grid.spacings[axis]
    if kind == "central":
        return central(f, axis, h)
    if kind == "forward":
        return forward(f, axis, h)
    if kind == "backward":
        return backward(f, axis, h)
    if kind == "spectral":
        return spectral(f, axis, grid.extents[axis])
    raise ValueError(f"unknown stencil {kind!r}; choose from {KINDS}")


def gradient(f: np.ndarray, grid: Grid, kind: str = "central") -> np.ndarray:
    """All ``1 + d`` partial derivatives, stacked on a new last axis."""
    return np.stack([derivative(f, grid, mu, kind) for mu in range(1 + grid.d)], axis=-1)


def _periodic_1d(n: int, h: float, kind: str) -> sp.csr_matrix:
    eye = sp.identity(n, format="csr")
    up = sp.csr_matrix((np.ones(n), (np.arange(n), (np.arange(n) + 1) % n)), shape=(n, n))
    if kind == "forward":
        return (up - eye) / h
    if kind == "backward":
        return (eye - up.T) / h
    if kind == "central":
        return (up - up.T) / (2.0 * h)
    raise ValueError(f"no sparse matrix for stencil {kind!r}")


def difference_matrix(grid: Grid, axis: int, kind: str) -> sp.csr_matrix:
    """Sparse matrix of a periodic difference acting on C-order flattened fields."""
    mats = []
    for i, n in enumerate(grid.shape):
        mats.append(_periodic_1d(n, grid.spacings[i], kind) if i == axis else sp.identity(n, format="csr"))
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out.tocsr()
