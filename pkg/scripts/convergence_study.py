"""Grid-doubling orders for the two-chart Lagrangian and Hessian invariance residuals.

    python scripts/convergence_study.py --map boost:0.5 --theta 0.8
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from lapsewick import action, diffeos, hessian
from lapsewick.geometry import Grid, random_spec


@dataclass(frozen=True)
class StudyConfig:
    map: str = "boost:0.5"
    theta: float = 0.8
    sizes: tuple[int, ...] = (8, 16, 32, 64)
    seed: int = 0


def _test_fn(t, x):
    return np.sin(t + x[..., 0]) + 0.5 * np.cos(2 * x[..., 0] - t)


def study(cfg: StudyConfig) -> dict[str, list[float]]:
    diffeo = diffeos.map_from_string(cfg.map, 1)
    spec = random_spec(1, seed=cfg.seed, max_k=1)
    phi = action.random_scalar_field(1, seed=cfg.seed + 10, max_k=1)
    U = action.quartic_potential(0.7, 0.5)
    lag, inv = [], []
    for n in cfg.sizes:
        g = Grid(1, n, n)
        lag.append(action.lagrangian_scalar_residual(spec.on(g), phi, U, diffeo, cfg.theta, "fd", np.array(g.spacings)).residual)
        inv.append(hessian.hessian_invariance_residual(spec, lambda t, x: 0.5 + 0 * t, cfg.theta, diffeo, g, _test_fn).residual)
    return {"lagrangian": lag, "hessian_invariance": inv}


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--map", default=StudyConfig.map)
    p.add_argument("--theta", type=float, default=StudyConfig.theta)
    p.add_argument("--sizes", default="8,16,32,64")
    p.add_argument("--seed", type=int, default=StudyConfig.seed)
    a = p.parse_args(argv)
    cfg = StudyConfig(a.map, a.theta, tuple(int(s) for s in a.sizes.split(",")), a.seed)
    for name, res in study(cfg).items():
        orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
        print(f"{name}: " + "  ".join(f"n={n}: {r:.3e}" for n, r in zip(cfg.sizes, res)))
        print(f"  observed orders {np.round(orders, 2).tolist()}")


if __name__ == "__main__":
    main()
