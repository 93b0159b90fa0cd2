"""Raw and Richardson-extrapolated commutator residuals versus the step eta.

    python scripts/algebra_richardson.py --dim 1 --pairs 5 --theta 0.7
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass


from lapsewick import action, gauge
from lapsewick.geometry import Grid, random_spec
from lapsewick.suites import ALGEBRA_MIN_POINTS


@dataclass(frozen=True)
class AlgebraConfig:
    d: int = 1
    pairs: int = 5
    theta: float | None = None
    etas: tuple[float, ...] = (4e-3, 2e-3, 1e-3)
    scheme: str = "central"
    seed: int = 0


def run(cfg: AlgebraConfig) -> None:
    n = ALGEBRA_MIN_POINTS[cfg.d]
    grid = Grid(cfg.d, n, n)
    tr = random_spec(cfg.d, seed=cfg.seed, max_k=1).on(grid)
    phi = action.random_scalar_field(cfg.d, seed=cfg.seed + 1, max_k=1).on(grid)
    for k in range(cfg.pairs):
        d1 = gauge.random_descriptor(grid, 2 * k, theta=cfg.theta)
        d2 = gauge.random_descriptor(grid, 2 * k + 1, theta=cfg.theta)
        line = [f"pair {k}:"]
        for eta in cfg.etas:
            rep = gauge.commutator_structure_check(tr, d1, d2, theta=cfg.theta, phi=phi, eta=eta, scheme=cfg.scheme, gap_tol=1e-2)
            line.append(f"eta={eta:.0e} raw={rep.raw_residuals[0]:.2e} extrapolated={rep.residual:.2e}")
        print("  ".join(line))


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=1, choices=(1, 2))
    p.add_argument("--pairs", type=int, default=AlgebraConfig.pairs)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--scheme", default="central", choices=("central", "forward"))
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args(argv)
    run(AlgebraConfig(d=a.dim, pairs=a.pairs, theta=a.theta, scheme=a.scheme, seed=a.seed))


if __name__ == "__main__":
    main()
