"""Verification suites, their configuration, and report artifacts.

Every check appends a :class:`CheckRecord`. Reports serialize with sorted
keys and no timestamps so a fixed config and seed give identical bytes.
"""

from __future__ import annotations

import csv
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import action, backgrounds, diffeos, gauge, hessian, wick
from .errors import ConfigError, OutputError
from .geometry import AdmTriple, Grid, TripleSpec, flat_spec, load_triple, random_spec, static_spec

SUITES = ("covariance", "admissibility", "spectrum", "algebra", "backgrounds")
BACKGROUNDS = ("flat", "random", "static", "friedmann")
# time-independent backgrounds get the block eigensolver above this size
BLOCK_SOLVE_MIN_POINTS = 1024

DEFAULT_TOLERANCES = {
    "line_element": 1e-10,
    "inverse_metric": 1e-10,
    "rank_one": 1e-11,
    "action_decomposition": 1e-12,
    "wec_slope": 0.1,
    "lagrangian_analytic": 1e-10,
    "lagrangian_order": 0.3,
    "wedge": 1e-10,
    "adjoint": 1e-12,
    "flat_spectrum": 1e-10,
    "algebra": 1e-6,
    "zimmermann_order": 0.1,
    "ds_oracle": 1e-6,
    "ds_heat": 1e-4,
}

ANCHORS = {
    "line_element": "line element invariance of the lapse-rotated metric",
    "inverse_metric": "inverse metric invariance of the lapse-rotated metric",
    "rank_one": "base plus rank-one reassembly of the transformed metric",
    "action_decomposition": "rotated action as cos(theta) S_- + i sin(theta) S_+",
    "imag_action": "positive imaginary part of the rotated action",
    "wec_slope": "small-angle limit (S_theta - S_-)/(i theta) -> S_+",
    "lagrangian_analytic": "two-chart scalarity of -exp(-i theta) L",
    "lagrangian_order": "two-chart scalarity under grid refinement",
    "wedge": "spectrum inside the sector |Arg| >= pi/2 + theta~",
    "adjoint": "adjoint of Delta_theta equals Delta_(pi - theta)",
    "flat_spectrum": "flat torus spectrum against the Fourier symbol",
    "algebra": "commutator of gauge variations against the structure functions",
    "propagator_euclid": "rotated propagator at theta = pi/2",
    "propagator_bounds": "two-sided bound on the rotated propagator magnitude",
    "zimmermann_order": "small-angle propagator against the Feynman-type denominator",
    "ds_oracle": "de Sitter kernel at theta = pi/2 against the hyperbolic kernel",
    "ds_heat": "heat equation for the rotated de Sitter kernel",
}


@dataclass(frozen=True)
class SuiteConfig:
    background: str = "random"
    n_t: int = 8
    n_x: int = 16
    d: int = 1
    thetas: tuple = (np.pi / 3,)
    maps: tuple = ("boost:0.5", "shear:0.1,1")
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    out: str = "lapsewick_out"
    formats: tuple = ("json", "csv")
    m2: float = 1.0
    algebra_pairs: int = 3
    imag_draws: int = 100
    propagator_samples: int = 10000

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ConfigError("dim must be 1 or 2")
        if self.n_t < 2 or self.n_x < 2:
            raise ConfigError("grid sizes must be at least 2")
        for th in self.thetas:
            if not 0 <= th < np.pi:
                raise ConfigError(f"theta {th} outside [0, pi)")
        if not self.thetas:
            raise ConfigError("at least one theta is required")
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {k!r}")
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive")
        for f in self.formats:
            if f not in ("json", "csv"):
                raise ConfigError(f"unknown format {f!r}")
        for m in self.maps:
            diffeos.map_from_string(m, self.d)
        if not (self.background in BACKGROUNDS or self.background.startswith("file:")):
            raise ConfigError(f"unknown background {self.background!r}")
        try:
            self.grid
        except ValueError as exc:
            raise ConfigError(f"bad grid {self.n_t}x{self.n_x}: {exc}") from exc

    @property
    def grid(self) -> Grid:
        return Grid(self.d, self.n_t, self.n_x)

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def to_dict(self) -> dict:
        out = asdict(self)
        # where the artifacts go is not part of the result
        out.pop("out")
        out["thetas"] = list(self.thetas)
        out["maps"] = list(self.maps)
        out["formats"] = list(self.formats)
        out["tolerances"] = {k: self.tol(k) for k in sorted(DEFAULT_TOLERANCES)}
        return out


def parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise ConfigError(f"grid must look like NTxNX, got {text!r}") from exc


def parse_thetas(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad theta list {text!r}") from exc


def parse_tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise ConfigError(f"tolerance must look like name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError as exc:
        raise ConfigError(f"bad tolerance value in {text!r}") from exc


_INT_KEYS = {"dim": "d", "seed": "seed", "algebra_pairs": "algebra_pairs", "imag_draws": "imag_draws", "propagator_samples": "propagator_samples"}


def overrides_from_pairs(pairs) -> dict:
    """Turn ``(key, value)`` strings into :class:`SuiteConfig` keyword overrides."""
    kw: dict = {}
    tols: dict = {}
    maps: list = []
    for key, value in pairs:
        key = key.strip()
        value = value.strip()
        if key == "grid":
            kw["n_t"], kw["n_x"] = parse_grid(value)
        elif key == "theta":
            kw["thetas"] = parse_thetas(value)
        elif key == "map":
            maps.extend(m for m in value.split(";") if m.strip())
        elif key == "tol":
            n, v = parse_tolerance(value)
            tols[n] = v
        elif key.startswith("tol."):
            tols[key[4:]] = _float(key, value)
        elif key in _INT_KEYS:
            try:
                kw[_INT_KEYS[key]] = int(value)
            except ValueError as exc:
                raise ConfigError(f"{key} must be an integer") from exc
        elif key == "m2":
            kw["m2"] = _float(key, value)
        elif key in ("background", "out"):
            kw[key] = value
        elif key == "format":
            kw["formats"] = tuple(v.strip() for v in value.split(",") if v.strip())
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if maps:
        kw["maps"] = tuple(maps)
    if tols:
        kw["tolerances"] = tols
    return kw


def _float(key, value):
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number") from exc


def read_config_file(path) -> list[tuple[str, str]]:
    """``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    pairs = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key = value")
        pairs.append((key.strip(), value.strip()))
    return pairs


def build_config(file_pairs=(), flag_pairs=()) -> SuiteConfig:
    """File settings first, then flags (flags win); tolerances merge."""
    base = overrides_from_pairs(file_pairs)
    flags = overrides_from_pairs(flag_pairs)
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(base.pop("tolerances", {}))
    tols.update(flags.pop("tolerances", {}))
    base.update(flags)
    try:
        return SuiteConfig(tolerances=tols, **base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRecord:
    name: str
    anchor: str
    residual: float
    tolerance: float
    comparison: str = "<="
    passed: bool = True
    params: dict = field(default_factory=dict)

    @staticmethod
    def make(name, residual, tolerance, comparison="<=", anchor=None, **params):
        r = float(residual)
        ok = {
            "<=": r <= tolerance,
            ">=": r >= tolerance,
            ">": r > tolerance,
            "==": r == tolerance,
        }[comparison]
        key = name.split("[")[0]
        return CheckRecord(name, anchor or ANCHORS[key], r, float(tolerance), comparison, bool(ok and np.isfinite(r)), params)


@dataclass
class VerificationReport:
    suite: str
    config: dict
    records: list = field(default_factory=list)
    spectra: list = field(default_factory=list)
    plots: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    def summary(self) -> dict:
        n_fail = sum(not r.passed for r in self.records)
        return {"suite": self.suite, "checks": len(self.records), "failed": n_fail, "passed": self.passed}

    def to_dict(self) -> dict:
        return {
            "summary": self.summary(),
            "config": self.config,
            "environment": environment_stamp(),
            "records": [_clean(asdict(r)) for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def environment_stamp() -> dict:
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}


def emit_artifacts(report: VerificationReport, out_dir, formats=("json", "csv")) -> list[Path]:
    """Write the report and its data files; an empty report writes the summary only."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "json" in formats or not report.records:
            p = out / "report.json"
            p.write_text(report.to_json())
            written.append(p)
        if not report.records:
            return written
        if "csv" in formats:
            p = out / "residuals.csv"
            with p.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["name", "anchor", "residual", "comparison", "tolerance", "passed"])
                for r in report.records:
                    w.writerow([r.name, r.anchor, repr(r.residual), r.comparison, repr(r.tolerance), int(r.passed)])
            written.append(p)
        for k, (theta, eigs) in enumerate(report.spectra):
            p = out / ("spectrum.csv" if k == 0 else f"spectrum_{k}.csv")
            write_complex_csv(p, eigs)
            written.append(p)
            q = out / ("eigenvalues.dat" if k == 0 else f"eigenvalues_{k}.dat")
            write_xy(q, eigs.real, eigs.imag)
            written.append(q)
        for name, (xs, ys) in sorted(report.plots.items()):
            p = out / f"{name}.dat"
            write_xy(p, xs, ys)
            written.append(p)
        return written
    except OSError as exc:
        raise OutputError(f"cannot write artifacts to {out}: {exc}") from exc


def write_complex_csv(path, values) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im"])
        for z in np.asarray(values, dtype=complex):
            w.writerow([repr(float(z.real)), repr(float(z.imag))])


def write_xy(path, xs, ys) -> None:
    with Path(path).open("w") as fh:
        for a, b in zip(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)):
            fh.write(f"{a!r} {b!r}\n")


def write_table(path, header, rows) -> None:
    try:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) for v in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


# backgrounds for the suites -----------------------------------------------------


def background_spec(cfg: SuiteConfig) -> TripleSpec | None:
    if cfg.background == "flat":
        return flat_spec(cfg.d)
    if cfg.background == "random":
        return random_spec(cfg.d, seed=cfg.seed)
    if cfg.background == "static":
        return static_spec(random_spec(cfg.d, seed=cfg.seed))
    if cfg.background == "friedmann":
        return backgrounds.friedmann_spec(lambda t: 1.0 + 0.1 * np.cos(t), lambda t: 1.0 + 0.2 * np.sin(t), cfg.d)
    return None


def background_triple(cfg: SuiteConfig) -> AdmTriple:
    spec = background_spec(cfg)
    if spec is not None:
        return spec.on(cfg.grid)
    path = cfg.background[len("file:"):]
    try:
        triple = load_triple(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load triple from {path}: {exc}") from exc
    if triple.grid is None or triple.is_rotated:
        raise ConfigError("custom triple must be un-rotated and carry its grid")
    return triple


# suites ---------------------------------------------------------------------------


def covariance_checks(cfg: SuiteConfig, report: VerificationReport, triple: AdmTriple | None = None) -> None:
    triple = triple if triple is not None else background_triple(cfg)
    for m in cfg.maps:
        diffeo = diffeos.map_from_string(m, cfg.d)
        for th in cfg.thetas:
            p = {"map": m, "theta": th}
            tag = f"[{m},{th:.6g}]"
            report.add(CheckRecord.make("line_element" + tag, wick.line_element_residual(triple, diffeo, th, seed=cfg.seed), cfg.tol("line_element"), **p))
            report.add(CheckRecord.make("inverse_metric" + tag, wick.inverse_metric_residual(triple, diffeo, th, seed=cfg.seed), cfg.tol("inverse_metric"), **p))
            for variant in ("metric", "inverse"):
                r = wick.rank_one_residual(triple, diffeo, th, variant)
                report.add(CheckRecord.make(f"rank_one[{m},{th:.6g},{variant}]", r, cfg.tol("rank_one"), variant=variant, **p))


def _ls_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs)), np.log(np.asarray(ys)), 1)[0])


def lagrangian_fd_order(seed: int, diffeo, theta: float, sizes=(8, 16, 32)):
    """Least-squares order of the finite-difference two-chart residual."""
    spec = random_spec(1, seed=seed, max_k=1)
    phi = action.random_scalar_field(1, seed=seed + 10, max_k=1)
    U = action.quartic_potential(0.7, 0.5)
    res = []
    for n in sizes:
        g = Grid(1, n, n)
        r = action.lagrangian_scalar_residual(spec.on(g), phi, U, diffeo, theta, "fd", np.array(g.spacings))
        res.append(r.residual)
    return -_ls_slope(sizes, res), res


def admissibility_checks(cfg: SuiteConfig, report: VerificationReport, triple: AdmTriple | None = None) -> None:
    triple = triple if triple is not None else background_triple(cfg)
    phi = action.random_scalar_field(cfg.d, seed=cfg.seed + 1)
    U = action.quartic_potential(0.7, 0.5)
    for th in cfg.thetas:
        r = action.action_decomposition_residual(triple, phi, U, th)
        report.add(CheckRecord.make(f"action_decomposition[{th:.6g}]", r, cfg.tol("action_decomposition"), theta=th))
    rng = np.random.default_rng(cfg.seed)
    small = Grid(cfg.d, 8, 8)
    worst = np.inf
    for k in range(cfg.imag_draws):
        th = float(rng.uniform(0.01, np.pi - 0.01))
        f = action.random_scalar_field(cfg.d, seed=int(rng.integers(1 << 31)), amp=float(rng.uniform(0.1, 2.0)))
        pot = action.quartic_potential(float(rng.uniform(0.0, 2.0)), float(rng.uniform(0.0, 2.0)))
        tr = random_spec(cfg.d, seed=int(rng.integers(1 << 31))).on(small)
        worst = min(worst, float(np.imag(action.evaluate_action(tr, f, pot, th))))
    report.add(CheckRecord.make("imag_action", worst, 0.0, ">", draws=cfg.imag_draws))
    thetas = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    wec = [action.wec_limit_residual(triple, phi, U, t) for t in thetas]
    slope = _ls_slope(thetas, wec)
    report.add(CheckRecord.make("wec_slope", abs(slope - 1.0), cfg.tol("wec_slope"), slope=slope))
    for m in cfg.maps:
        diffeo = diffeos.map_from_string(m, cfg.d)
        spec = background_spec(cfg)
        if spec is not None:
            tr = spec.on(cfg.grid)
            for th in cfg.thetas:
                r = action.lagrangian_scalar_residual(tr, phi, U, diffeo, th)
                report.add(CheckRecord.make(f"lagrangian_analytic[{m},{th:.6g}]", r.residual, cfg.tol("lagrangian_analytic"), map=m, theta=th))
    diffeo = diffeos.map_from_string(cfg.maps[0], 1)
    th = cfg.thetas[0]
    order, res = lagrangian_fd_order(cfg.seed, diffeo, th)
    report.add(CheckRecord.make("lagrangian_order", abs(order - 2.0), cfg.tol("lagrangian_order"), order=order, residuals=res, map=cfg.maps[0], theta=th))


def spectrum_checks(cfg: SuiteConfig, report: VerificationReport, triple: AdmTriple | None = None) -> None:
    triple = triple if triple is not None else background_triple(cfg)
    for k, th in enumerate(cfg.thetas):
        op = hessian.assemble_hessian(triple, cfg.m2, th)
        static = cfg.background in ("flat", "static")
        method = "time_blocks" if static and op.size > BLOCK_SOLVE_MIN_POINTS else "dense"
        rep = hessian.spectral_report(op, cfg.tol("wedge"), method=method)
        report.spectra.append((th, rep.eigenvalues))
        report.add(CheckRecord.make(f"wedge[{th:.6g}]", rep.wedge_margin, -cfg.tol("wedge"), ">=", theta=th, violations=rep.violations, n=op.size, method=method))
        refl = op.with_theta(np.pi - th)
        report.add(CheckRecord.make(f"adjoint[{th:.6g}]", hessian.adjoint_residual(op, refl, seed=cfg.seed), cfg.tol("adjoint"), theta=th))
        if cfg.background == "flat":
            oracle = hessian.flat_torus_spectrum(triple.grid, cfg.m2, th)
            report.add(CheckRecord.make(f"flat_spectrum[{th:.6g}]", hessian.match_spectra(rep.eigenvalues, oracle), cfg.tol("flat_spectrum"), theta=th))


ALGEBRA_MIN_POINTS = {1: 32, 2: 24}


def algebra_triple(cfg: SuiteConfig) -> AdmTriple:
    """Background for the algebra suite, refined until spectral products resolve.

    The random background is band-limited to unit wave numbers here.
    """
    spec = random_spec(cfg.d, seed=cfg.seed, max_k=1) if cfg.background == "random" else background_spec(cfg)
    if spec is None:
        return background_triple(cfg)
    n = ALGEBRA_MIN_POINTS[cfg.d]
    return spec.on(Grid(cfg.d, max(cfg.n_t, n), max(cfg.n_x, n)))


def algebra_checks(cfg: SuiteConfig, report: VerificationReport, triple: AdmTriple | None = None) -> None:
    if triple is None:
        triple = algebra_triple(cfg)
    grid = triple.grid
    phi = action.random_scalar_field(cfg.d, seed=cfg.seed + 2, max_k=1).on(grid)
    rotated = [t for t in cfg.thetas if t > 0] or [np.pi / 3]
    for k in range(cfg.algebra_pairs):
        s1, s2 = 1000 * cfg.seed + 2 * k, 1000 * cfg.seed + 2 * k + 1
        d1 = gauge.random_descriptor(grid, seed=s1)
        d2 = gauge.random_descriptor(grid, seed=s2)
        r = gauge.commutator_structure_check(triple, d1, d2, phi=phi)
        report.add(CheckRecord.make(f"algebra[plain,{k}]", r.residual, cfg.tol("algebra"), gap=r.extrapolation_gap))
        th = rotated[k % len(rotated)]
        d1 = gauge.random_descriptor(grid, seed=s1, theta=th)
        d2 = gauge.random_descriptor(grid, seed=s2, theta=th)
        r = gauge.commutator_structure_check(triple, d1, d2, theta=th, phi=phi)
        report.add(CheckRecord.make(f"algebra[rotated,{k}]", r.residual, cfg.tol("algebra"), theta=th, gap=r.extrapolation_gap))


def propagator_samples(n: int, seed: int):
    rng = np.random.default_rng(seed)
    p0 = rng.normal(0, 2, n)
    p = rng.normal(0, 2, (n, 3))
    m = rng.uniform(0, 2, n)
    th = rng.uniform(0, np.pi, n)
    th = np.where(th == 0, 0.5, th)
    return p0, np.sum(p * p, axis=1), m, th


def propagator_checks(cfg: SuiteConfig, report: VerificationReport) -> None:
    p0, p2, m, th = propagator_samples(cfg.propagator_samples, cfg.seed)
    G = backgrounds.propagator(p0, p2, m, np.pi / 2)
    exact = 1.0 / (p0**2 + p2 + m**2)
    report.add(CheckRecord.make("propagator_euclid", float(np.max(np.abs(G - exact))), 0.0, "=="))
    G = backgrounds.propagator(p0, p2, m, th)
    lo, hi = backgrounds.propagator_bounds(p0, p2, m, th)
    mag = np.abs(G)
    margin = float(min(np.min(mag - lo), np.min(hi - mag)))
    report.add(CheckRecord.make("propagator_bounds", margin, 0.0, ">=", samples=int(p0.size)))
    # relative deviation from the small-angle form, off and on the light cone
    q = p2 + m**2
    p0s = np.concatenate([p0, np.sqrt(q)])
    p2s = np.concatenate([p2, p2])
    ms = np.concatenate([m, m])

    def dev(t):
        g = backgrounds.propagator(p0s, p2s, ms, t)
        z = backgrounds.zimmermann_form(p0s, p2s, ms, t)
        return float(np.max(np.abs(g - z) / np.abs(g)))

    t1 = 1e-3
    order = float(np.log2(dev(t1) / dev(t1 / 2)))
    report.add(CheckRecord.make("zimmermann_order", abs(order - 1.0), cfg.tol("zimmermann_order"), order=order, deviation=dev(t1), theta=t1))
    th0 = next((t for t in cfg.thetas if t > 0), np.pi / 2)
    pe = np.linspace(0.0, 5.0, 101)
    report.plots["propagator_magnitude"] = (pe, np.abs(backgrounds.propagator(pe, 0.0, 1.0, th0)))


def ds_checks(cfg: SuiteConfig, report: VerificationReport) -> None:
    t = np.array([0.0, 0.3, -0.4, 0.1])
    x = np.array([[0.0, 0.0], [0.2, 0.1], [0.5, -0.3], [1.0, 0.7]])
    zero_t, zero_x = np.zeros(4), np.zeros((4, 2))
    worst = 0.0
    for s in (0.05, 0.5, 2.0):
        prm = backgrounds.DeSitterParams(H=1.0, d=2, theta=np.pi / 2, s=s)
        k = backgrounds.ds_heat_kernel(prm, t, x, zero_t, zero_x).value
        xi = backgrounds.ds_embedding_distance(t, x, zero_t, zero_x, 1.0, np.pi / 2).real
        oracle = backgrounds.hyperbolic3_kernel(s, np.arccosh(xi))
        worst = max(worst, float(np.max(np.abs(k - oracle) / oracle)))
    report.add(CheckRecord.make("ds_oracle", worst, cfg.tol("ds_oracle")))
    pts_t = np.array([0.2, -0.3, 0.1])
    pts_x = np.array([[0.3, 0.1], [-0.2, 0.25], [0.15, -0.4]])
    for d in (2, 1):
        for th in (0.5, 1.5):
            prm = backgrounds.DeSitterParams(H=1.0, d=d, theta=th, s=0.5)
            res, _ = backgrounds.heat_residual(prm, pts_t, pts_x[:, :d], 0.0, np.zeros(d))
            report.add(CheckRecord.make(f"ds_heat[d={d},{th:.6g}]", float(np.max(res)), cfg.tol("ds_heat"), d=d, theta=th))


def background_checks(cfg: SuiteConfig, report: VerificationReport) -> None:
    propagator_checks(cfg, report)
    ds_checks(cfg, report)


_RUNNERS = {
    "covariance": covariance_checks,
    "admissibility": admissibility_checks,
    "spectrum": spectrum_checks,
    "algebra": algebra_checks,
    "backgrounds": lambda cfg, rep: background_checks(cfg, rep),
}


def run_suite(config: SuiteConfig, suite: str = "all") -> VerificationReport:
    """Run one suite (or ``all``) and collect the records."""
    if suite != "all" and suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    report = VerificationReport(suite, config.to_dict())
    for name in SUITES if suite == "all" else (suite,):
        _RUNNERS[name](config, report)
    return report


__all__ = [
    "SUITES",
    "BACKGROUNDS",
    "SuiteConfig",
    "CheckRecord",
    "VerificationReport",
    "build_config",
    "read_config_file",
    "run_suite",
    "emit_artifacts",
]
