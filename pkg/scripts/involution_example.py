"""Conjugation by r = [[1, 1], [0, -1]] on M_2: positive, invertible, not Lamperti.

Prints the separating witness, the norms of T(e22), and the maximal ergodic
profile of the averages, which settle at (x + Tx)/2.
"""

import argparse

import numpy as np

from nclp.algebra import lp_norm
from nclp.gallery import involution_example
from nclp.lamperti import decompose
from nclp.maximal import maximal_ergodic_report
from nclp.operators import apply


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    case = involution_example()
    M, T = case.algebra, case.operator
    d = decompose(T)
    print(f"status: {d.status}, violation = {d.violation:.12f} (sqrt 2 = {np.sqrt(2):.12f})")
    print("e =", np.round(d.e.blocks[0].real, 12).tolist(), " f =", np.round(d.f.blocks[0].real, 12).tolist())
    for p in (1.5, 2.0, 3.0):
        print(f"||T(e22)||_{p} = {lp_norm(M, apply(T, M.unit(0, 1, 1)), p):.12f}")

    x = M.random_psd(np.random.default_rng(args.seed))
    for p in (1.5, 2.0, 3.0):
        rep = maximal_ergodic_report(T, x, args.N, p, profile_N=[1, 2, 4, 8, args.N])
        brackets = "  ".join(f"N={n}: {up:.6f}" for n, (_, up) in zip(rep.profile_N, rep.profile))
        print(f"p={p}: ratio {brackets}   |A_N x - Px| = {rep.projection_distance:.2e}")


if __name__ == "__main__":
    main()
