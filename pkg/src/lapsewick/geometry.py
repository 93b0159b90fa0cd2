"""Periodic grids, ADM triples, metric reconstruction and foliation frames.

Fields are stored point-major: a scalar has shape ``S``, a spatial vector
``S + (d,)`` and a spatial tensor ``S + (d, d)``, where ``S`` is the shape of
the point set (a grid shape ``(n_t, n_x, ..., n_x)`` or any flat sample).
Spacetime components are ordered ``(t, x^1, ..., x^d)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import (
    DegenerateMetricError,
    InvalidTripleError,
    OutputError,
    point_label,
)

DEFAULT_POINT_CAP = 20_000
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, extent_t) x [0, extent_x)^d``."""

    d: int = 1
    n_t: int = 16
    n_x: int = 16
    extent_t: float = TWO_PI
    extent_x: float = TWO_PI
    max_points: int = DEFAULT_POINT_CAP

    def __post_init__(self):
        if not 1 <= self.d <= 3:
            raise ValueError(f"spatial dimension must be 1, 2 or 3, got {self.d}")
        if self.n_t < 4 or self.n_x < 4:
            raise ValueError("need at least 4 points per axis")
        if not (self.extent_t > 0 and self.extent_x > 0):
            raise ValueError("extents must be positive")
        if self.n_points > self.max_points:
            raise ValueError(
                f"grid has {self.n_points} points, above the cap {self.max_points}"
            )

    @property
    def h_t(self) -> float:
        return self.extent_t / self.n_t

    @property
    def h_x(self) -> float:
        return self.extent_x / self.n_x

    @property
    def spacings(self) -> tuple[float, ...]:
        return (self.h_t,) + (self.h_x,) * self.d

    @property
    def extents(self) -> tuple[float, ...]:
        return (self.extent_t,) + (self.extent_x,) * self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_t,) + (self.n_x,) * self.d

    @property
    def n_points(self) -> int:
        return self.n_t * self.n_x**self.d

    @property
    def cell_volume(self) -> float:
        return self.h_t * self.h_x**self.d

    def axis(self, i: int) -> np.ndarray:
        n = self.shape[i]
        return np.arange(n) * self.spacings[i]

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(t, x)`` with shapes ``S`` and ``S + (d,)``."""
        mesh = np.meshgrid(*[self.axis(i) for i in range(1 + self.d)], indexing="ij")
        return mesh[0], np.stack(mesh[1:], axis=-1)

    def refined(self, factor: int = 2) -> "Grid":
        return replace(self, n_t=self.n_t * factor, n_x=self.n_x * factor)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n_t": self.n_t,
            "n_x": self.n_x,
            "extent_t": self.extent_t,
            "extent_x": self.extent_x,
        }


def _as_points(t, x, d):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != t.shape + (d,):
        raise ValueError(f"x must have shape {t.shape + (d,)}, got {x.shape}")
    return t, x


def spatial_inverse(metric: np.ndarray) -> np.ndarray:
    """Pointwise inverse of a stack of spatial metrics."""
    det = np.linalg.det(metric)
    scale = np.max(np.abs(metric), axis=(-2, -1)) ** metric.shape[-1]
    bad = ~np.isfinite(det) | (np.abs(det) <= 1e-14 * np.maximum(scale, 1e-300))
    if np.any(bad):
        idx = np.argwhere(bad)[0] if bad.ndim else None
        raise DegenerateMetricError(f"singular spatial metric at {point_label(idx)}")
    return np.linalg.inv(metric)


@dataclass(frozen=True)
class AdmTriple:
    """Lapse, shift and spatial metric on a point set with a signature tag.

    ``theta`` is ``None`` for an un-rotated real triple. A rotated triple is
    always stored in the ``-1`` convention with complex lapse. ``fiducial``
    marks a lapse obtained by rotating in the fiducial foliation, in which
    case ``Arg N = -theta`` is an invariant.
    """

    lapse: np.ndarray
    shift: np.ndarray
    spatial_metric: np.ndarray
    signature: int = -1
    theta: float | None = None
    fiducial: bool = True
    t: np.ndarray | None = None
    x: np.ndarray | None = None
    grid: Grid | None = None

    def __post_init__(self):
        if self.signature not in (-1, 1):
            raise InvalidTripleError(f"signature must be -1 or +1, got {self.signature}")
        lapse = np.asarray(self.lapse)
        shift = np.asarray(self.shift)
        metric = np.asarray(self.spatial_metric)
        if shift.ndim < 1 or shift.shape[:-1] != lapse.shape:
            raise InvalidTripleError("shift shape does not match lapse")
        d = shift.shape[-1]
        if metric.shape != lapse.shape + (d, d):
            raise InvalidTripleError("spatial metric shape does not match lapse")
        object.__setattr__(self, "lapse", lapse)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "spatial_metric", metric)
        for name, arr in (("lapse", lapse), ("shift", shift), ("spatial metric", metric)):
            if not np.all(np.isfinite(arr)):
                raise InvalidTripleError(f"{name} has non-finite entries")
        if not np.allclose(metric, np.swapaxes(metric, -1, -2), rtol=0, atol=1e-12):
            raise InvalidTripleError("spatial metric is not symmetric")
        if self.theta is None:
            self._check_real()
        elif self.fiducial:
            self._check_real(lapse=False)
            if self.signature != -1:
                raise InvalidTripleError("rotated triples use the -1 convention")
            phase = np.angle(lapse * np.exp(1j * self.theta))
            if np.any(np.abs(phase) > 1e-12) or np.any(np.abs(lapse) == 0):
                raise InvalidTripleError("rotated lapse must have constant phase -theta")

    def _check_real(self, lapse: bool = True):
        if np.iscomplexobj(self.shift) and np.any(self.shift.imag != 0):
            raise InvalidTripleError("shift must be real")
        if np.iscomplexobj(self.spatial_metric) and np.any(self.spatial_metric.imag != 0):
            raise InvalidTripleError("spatial metric must be real")
        eig = np.linalg.eigvalsh(np.real(self.spatial_metric))
        if np.any(eig <= 0):
            idx = np.argwhere(np.min(eig, axis=-1) <= 0)[0]
            raise DegenerateMetricError(
                f"spatial metric not positive definite at {point_label(idx)}"
            )
        if lapse:
            if np.iscomplexobj(self.lapse) and np.any(self.lapse.imag != 0):
                raise InvalidTripleError("un-rotated lapse must be real")
            if np.any(np.real(self.lapse) <= 0):
                idx = np.argwhere(np.real(self.lapse) <= 0)[0]
                raise InvalidTripleError(f"lapse not positive at {point_label(idx)}")

    @property
    def d(self) -> int:
        return self.shift.shape[-1]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.lapse.shape

    @property
    def is_rotated(self) -> bool:
        return self.theta is not None

    @property
    def is_real(self) -> bool:
        return not any(
            np.iscomplexobj(a) and np.any(a.imag != 0)
            for a in (self.lapse, self.shift, self.spatial_metric)
        )

    def metric_inverse(self) -> np.ndarray:
        return spatial_inverse(self.spatial_metric)

    def sqrt_det(self) -> np.ndarray:
        """Principal square root of ``det g_ab``."""
        det = np.linalg.det(self.spatial_metric)
        return np.sqrt(det) if np.isrealobj(det) else np.sqrt(det.astype(complex))

    def with_signature(self, signature: int) -> "AdmTriple":
        """Same fields, different signature tag (un-rotated triples only)."""
        if self.is_rotated:
            raise InvalidTripleError("cannot retag a rotated triple")
        return replace(self, signature=signature)

    def with_fields(self, **kwargs) -> "AdmTriple":
        return replace(self, **kwargs)

    def real_part(self) -> "AdmTriple":
        """Drop zero imaginary parts and return an un-rotated triple."""
        if not self.is_real:
            raise InvalidTripleError("triple has non-zero imaginary parts")
        return replace(
            self,
            lapse=np.real(self.lapse).copy(),
            shift=np.real(self.shift).copy(),
            spatial_metric=np.real(self.spatial_metric).copy(),
            theta=None,
            fiducial=True,
        )

    def max_difference(self, other: "AdmTriple") -> float:
        """Largest absolute component difference (signatures must match)."""
        if self.signature != other.signature:
            return float("inf")
        return float(
            max(
                np.max(np.abs(self.lapse - other.lapse)),
                np.max(np.abs(self.shift - other.shift)),
                np.max(np.abs(self.spatial_metric - other.spatial_metric)),
            )
        )


@dataclass(frozen=True)
class TripleSpec:
    """Closed-form ADM fields that can be sampled on any point set."""

    lapse: Callable
    shift: Callable
    spatial_metric: Callable
    d: int
    signature: int = -1
    name: str = "custom"

    def at(self, t, x) -> AdmTriple:
        t, x = _as_points(t, x, self.d)
        return AdmTriple(
            lapse=np.asarray(self.lapse(t, x), dtype=float) * np.ones(t.shape),
            shift=np.asarray(self.shift(t, x), dtype=float) * np.ones(t.shape + (self.d,)),
            spatial_metric=np.asarray(self.spatial_metric(t, x), dtype=float)
            * np.ones(t.shape + (self.d, self.d)),
            signature=self.signature,
            t=t,
            x=x,
        )

    def on(self, grid: Grid) -> AdmTriple:
        if grid.d != self.d:
            raise ValueError(f"grid dimension {grid.d} != field dimension {self.d}")
        t, x = grid.coords()
        return replace(self.at(t, x), grid=grid)

    def with_signature(self, signature: int) -> "TripleSpec":
        return replace(self, signature=signature)


def flat_spec(d: int = 1, signature: int = -1, lapse: float = 1.0) -> TripleSpec:
    """Constant lapse, zero shift, Euclidean spatial metric."""

    def n(t, x):
        return np.full(np.shape(t), float(lapse))

    def s(t, x):
        return np.zeros(np.shape(t) + (d,))

    def g(t, x):
        return np.broadcast_to(np.eye(d), np.shape(t) + (d, d)).copy()

    return TripleSpec(n, s, g, d, signature, name="flat")


def static_spec(spec: TripleSpec, t0: float = 0.0) -> TripleSpec:
    """``spec`` frozen at time ``t0``: the same spatial profile at every ``t``."""

    def frozen(fn):
        def f(t, x):
            return fn(np.full(np.shape(t), float(t0)), x)

        return f

    return replace(
        spec,
        lapse=frozen(spec.lapse),
        shift=frozen(spec.shift),
        spatial_metric=frozen(spec.spatial_metric),
        name=f"static({spec.name})",
    )


def _wave_vectors(rng, n_modes, d, max_k):
    ks = rng.integers(-max_k, max_k + 1, size=(n_modes, 1 + d))
    ks[:, 0] = np.abs(ks[:, 0])
    ks[np.all(ks == 0, axis=1), 0] = 1
    return ks


def random_spec(
    d: int = 1,
    seed: int = 0,
    signature: int = -1,
    lapse_amp: float = 0.2,
    shift_amp: float = 0.2,
    metric_amp: float = 0.2,
    n_modes: int = 3,
    max_k: int = 2,
    extent_t: float = TWO_PI,
    extent_x: float = TWO_PI,
) -> TripleSpec:
    """Smooth periodic triple built from a few random Fourier modes.

    Amplitudes below one keep ``N >= 1 - lapse_amp`` and the eigenvalues of
    the spatial metric above ``1 - metric_amp``.
    """
    rng = np.random.default_rng(seed)
    ks = _wave_vectors(rng, n_modes, d, max_k)
    phases = rng.uniform(0, TWO_PI, size=n_modes)
    alpha = rng.uniform(-1, 1, size=n_modes)
    alpha /= np.sum(np.abs(alpha))
    beta = rng.uniform(-1, 1, size=(n_modes, d)) / n_modes
    blocks = rng.uniform(-1, 1, size=(n_modes, d, d))
    blocks = 0.5 * (blocks + np.swapaxes(blocks, 1, 2))
    blocks /= n_modes * np.linalg.norm(blocks, ord=2, axis=(1, 2))[:, None, None]
    freq = np.concatenate([[TWO_PI / extent_t], np.full(d, TWO_PI / extent_x)])

    def psi(t, x):
        y = np.concatenate([np.asarray(t)[..., None], np.asarray(x)], axis=-1)
        return np.einsum("...m,jm->...j", y, ks * freq) + phases

    def n(t, x):
        return 1.0 + lapse_amp * np.cos(psi(t, x)) @ alpha

    def s(t, x):
        return shift_amp * np.sin(psi(t, x)) @ beta

    def g(t, x):
        c = np.cos(psi(t, x))
        return np.eye(d) + metric_amp * np.einsum("...j,jab->...ab", c, blocks)

    return TripleSpec(n, s, g, d, signature, name=f"random(seed={seed})")


@dataclass(frozen=True)
class ComplexMetricField:
    """Full spacetime metric and its inverse at every point."""

    metric: np.ndarray
    inverse: np.ndarray
    signature: int
    det_residual: float

    @property
    def dim(self) -> int:
        return self.metric.shape[-1]


def metric_from_triple(lapse, shift, spatial_metric, signature):
    """Assemble ``g_{mu nu}`` from ADM fields without validation."""
    lapse = np.asarray(lapse)
    shift = np.asarray(shift)
    gs = np.asarray(spatial_metric)
    d = shift.shape[-1]
    dtype = np.result_type(lapse, shift, gs, float)
    g = np.zeros(lapse.shape + (d + 1, d + 1), dtype=dtype)
    low = np.einsum("...ab,...b->...a", gs, shift)
    g[..., 0, 0] = signature * lapse**2 + np.einsum("...a,...a->...", low, shift)
    g[..., 0, 1:] = low
    g[..., 1:, 0] = low
    g[..., 1:, 1:] = gs
    return g


def inverse_from_triple(lapse, shift, inverse_spatial, signature):
    """Assemble ``g^{mu nu}`` from ADM fields and ``g^{ab}``."""
    lapse = np.asarray(lapse)
    shift = np.asarray(shift)
    d = shift.shape[-1]
    dtype = np.result_type(lapse, shift, inverse_spatial, float)
    gi = np.zeros(lapse.shape + (d + 1, d + 1), dtype=dtype)
    c = signature / lapse**2
    gi[..., 0, 0] = c
    gi[..., 0, 1:] = -c[..., None] * shift
    gi[..., 1:, 0] = -c[..., None] * shift
    gi[..., 1:, 1:] = inverse_spatial + c[..., None, None] * np.einsum(
        "...a,...b->...ab", shift, shift
    )
    return gi


def reconstruct_metric(triple: AdmTriple) -> ComplexMetricField:
    """Spacetime metric of a triple together with its block-form inverse."""
    ginv_s = triple.metric_inverse()
    g = metric_from_triple(triple.lapse, triple.shift, triple.spatial_metric, triple.signature)
    gi = inverse_from_triple(triple.lapse, triple.shift, ginv_s, triple.signature)
    det_expected = triple.signature * triple.lapse**2 * np.linalg.det(triple.spatial_metric)
    det = np.linalg.det(g)
    det_res = float(np.max(np.abs(det - det_expected) / np.abs(det_expected)))
    return ComplexMetricField(g, gi, triple.signature, det_res)


@dataclass(frozen=True)
class FoliationFrame:
    """Adapted-coordinate components of the foliation frame and projectors.

    ``dt`` is the covector ``dt_alpha``, ``m`` the vector with
    ``m^alpha d_alpha t = 1`` tangent to the lapse direction, ``e_up[a]`` the
    1-forms ``e^a = dx^a + N^a dt`` and ``e_down[a]`` the vectors ``d_a``.
    ``sigma`` projects onto the leaves and ``transverse = 1 - sigma``.
    """

    dt: np.ndarray
    m: np.ndarray
    e_up: np.ndarray
    e_down: np.ndarray
    sigma: np.ndarray
    transverse: np.ndarray

    def residuals(self) -> dict[str, float]:
        d = self.e_up.shape[-2]
        dim = d + 1
        eye_d = np.eye(d)
        eye = np.eye(dim)
        m_dt = np.einsum("...a,...a->...", self.m, self.dt) - 1.0
        dual = np.einsum("...ia,...ja->...ij", self.e_down, self.e_up) - eye_d
        sig = np.einsum("...ia,...ib->...ab", self.e_up, self.e_down) - self.sigma
        total = self.sigma + self.transverse - eye
        ortho = np.concatenate(
            [
                np.einsum("...a,...ia->...i", self.m, self.e_up),
                np.einsum("...ia,...a->...i", self.e_down, self.dt),
            ],
            axis=-1,
        )
        return {
            "m_dt": float(np.max(np.abs(m_dt))),
            "completeness": float(np.max(np.abs(dual))),
            "sigma": float(np.max(np.abs(sig))),
            "projector_sum": float(np.max(np.abs(total))),
            "orthogonality": float(np.max(np.abs(ortho))),
        }


def foliation_frame(triple: AdmTriple) -> FoliationFrame:
    """Frame and projectors of the foliation in adapted coordinates."""
    shift = triple.shift
    shape = triple.shape
    d = triple.d
    dim = d + 1
    dt = np.zeros(shape + (dim,), dtype=shift.dtype)
    dt[..., 0] = 1.0
    m = np.zeros(shape + (dim,), dtype=shift.dtype)
    m[..., 0] = 1.0
    m[..., 1:] = -shift
    e_up = np.zeros(shape + (d, dim), dtype=shift.dtype)
    e_up[..., :, 0] = shift
    e_up[..., :, 1:] = np.eye(d)
    e_down = np.zeros(shape + (d, dim), dtype=shift.dtype)
    e_down[..., :, 1:] = np.eye(d)
    sigma = np.einsum("...ia,...ib->...ab", e_up, e_down)
    transverse = np.einsum("...a,...b->...ab", dt, m)
    return FoliationFrame(dt, m, e_up, e_down, sigma, transverse)


def frame_inverse_metric(triple: AdmTriple, frame: FoliationFrame | None = None) -> np.ndarray:
    """Inverse metric from the frame: ``eps N^-2 m m + g^ab e_a e_b``."""
    frame = frame or foliation_frame(triple)
    ginv = triple.metric_inverse()
    c = triple.signature / triple.lapse**2
    return c[..., None, None] * np.einsum("...a,...b->...ab", frame.m, frame.m) + np.einsum(
        "...ij,...ia,...jb->...ab", ginv, frame.e_down, frame.e_down
    )


def _split(z):
    z = np.asarray(z)
    if np.iscomplexobj(z):
        return [("re", z.real), ("im", z.imag)]
    return [("", z)]


def save_triple(triple: AdmTriple, stem: str | Path) -> tuple[Path, Path]:
    """Write ``stem.json`` (header) and ``stem.csv`` (row-major values)."""
    stem = Path(stem)
    n = int(np.prod(triple.shape))
    d = triple.d
    columns: list[str] = []
    data: list[np.ndarray] = []
    if triple.t is not None:
        columns.append("t")
        data.append(np.asarray(triple.t).reshape(n))
        for a in range(d):
            columns.append(f"x{a + 1}")
            data.append(np.asarray(triple.x)[..., a].reshape(n))
    entries = [("N", triple.lapse)]
    entries += [(f"shift{a + 1}", triple.shift[..., a]) for a in range(d)]
    entries += [
        (f"g{a + 1}{b + 1}", triple.spatial_metric[..., a, b])
        for a in range(d)
        for b in range(a, d)
    ]
    complex_cols = []
    for name, arr in entries:
        parts = _split(arr)
        if len(parts) == 2:
            complex_cols.append(name)
        for suffix, part in parts:
            columns.append(f"{name}_{suffix}" if suffix else name)
            data.append(part.reshape(n))
    header = {
        "kind": "adm_triple",
        "d": d,
        "shape": list(triple.shape),
        "signature": triple.signature,
        "theta": triple.theta,
        "fiducial": triple.fiducial,
        "grid": triple.grid.to_dict() if triple.grid is not None else None,
        "columns": columns,
        "complex": complex_cols,
        "csv": stem.name + ".csv",
    }
    json_path = stem.with_suffix(".json")
    csv_path = stem.with_suffix(".csv")
    try:
        stem.parent.mkdir(parents=True, exist_ok=True)
        json_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
        np.savetxt(
            csv_path,
            np.column_stack(data),
            delimiter=",",
            header=",".join(columns),
            comments="",
            fmt="%.17g",
        )
    except OSError as exc:
        raise OutputError(f"cannot write triple to {stem}: {exc}") from exc
    return json_path, csv_path


def load_triple(path: str | Path) -> AdmTriple:
    """Read a triple written by :func:`save_triple` (give the JSON path)."""
    path = Path(path)
    header = json.loads(path.read_text())
    if header.get("kind") != "adm_triple":
        raise ValueError(f"{path} is not an ADM triple header")
    csv_path = path.parent / header["csv"]
    table = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    cols = {name: table[:, i] for i, name in enumerate(header["columns"])}
    shape = tuple(header["shape"])
    d = header["d"]

    def get(name):
        if name in header["complex"]:
            return (cols[name + "_re"] + 1j * cols[name + "_im"]).reshape(shape)
        return cols[name].reshape(shape)

    lapse = get("N")
    shift = np.stack([get(f"shift{a + 1}") for a in range(d)], axis=-1)
    metric = np.zeros(shape + (d, d), dtype=np.result_type(*[get(f"g{a + 1}{a + 1}") for a in range(d)]))
    for a in range(d):
        for b in range(a, d):
            metric[..., a, b] = metric[..., b, a] = get(f"g{a + 1}{b + 1}")
    t = x = None
    if "t" in cols:
        t = cols["t"].reshape(shape)
        x = np.stack([cols[f"x{a + 1}"].reshape(shape) for a in range(d)], axis=-1)
    grid = Grid(**header["grid"]) if header.get("grid") else None
    return AdmTriple(
        lapse=lapse,
        shift=shift,
        spatial_metric=metric,
        signature=header["signature"],
        theta=header["theta"],
        fiducial=header["fiducial"],
        t=t,
        x=x,
        grid=grid,
    )
