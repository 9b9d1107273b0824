"""Compare the maximal-norm solver with the commuting and grid oracles."""

import argparse
import time

import numpy as np

from nclp.algebra import FiniteVNA, haar_unitary
from nclp.maximal import SolverOptions, maximal_norm_pos, oracle_commuting, oracle_grid_2x2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--method", default="barrier", choices=["barrier", "pgd"])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    opts = SolverOptions(method=args.method)
    M = FiniteVNA.matrix(2)
    worst_grid = worst_comm = worst_gap = 0.0
    t0 = time.perf_counter()
    for i in range(args.instances):
        p = (1.5, 2.0, 3.0, 4.0)[i % 4]
        xs = [M.random_psd(rng) for _ in range(2)]
        r = maximal_norm_pos(M, xs, p, opts)
        g = oracle_grid_2x2(xs, p, seed=i)
        worst_grid = max(worst_grid, abs(r.upper - g.value))
        worst_gap = max(worst_gap, r.gap)
        u = haar_unitary(2, rng)
        cs = [M.element([u @ np.diag(rng.uniform(0, 2, 2)) @ u.conj().T]) for _ in range(3)]
        rc = maximal_norm_pos(M, cs, p, opts)
        worst_comm = max(worst_comm, abs(rc.upper - oracle_commuting(M, cs, p)))
    print(f"{args.instances} instances ({args.method}): grid diff {worst_grid:.2e}, "
          f"commuting diff {worst_comm:.2e}, max gap {worst_gap:.2e}, "
          f"{time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
