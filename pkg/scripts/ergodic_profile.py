"""Maximal ergodic ratio profiles for a positive isometry and the JLM operators.

For each operator and random PSD input, prints ratio(N) for N = 1..N_max as
certified (lower, upper) brackets, the increment at N_max, and the
mean-ergodic distance on the dyadic grid.
"""

import argparse
import json

import numpy as np

from nclp.gallery import jlm_operator, positive_isometry_conjugation
from nclp.maximal import maximal_ergodic_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=32)
    ap.add_argument("--samples", type=int, default=3)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="write all profiles here")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    ops = {"isometry_M3": positive_isometry_conjugation(3, seed=args.seed).operator}
    ops.update({f"jlm_k{k}": jlm_operator(k, args.p).operator for k in (2, 3, 4)})
    dyadic = [n for n in (2, 4, 8, 16, 32, 64, 128) if n <= args.N]
    out = {}
    for name, T in ops.items():
        out[name] = []
        for s in range(args.samples):
            x = T.parent.random_psd(rng)
            rep = maximal_ergodic_report(T, x, args.N, args.p)
            prof = dict(zip(rep.profile_N, rep.profile))
            dist = dict(zip(rep.profile_N, rep.distance_profile))
            inc = prof[args.N][1] - prof[args.N - 1][0]
            print(f"{name} sample {s}: ratio({args.N}) = {prof[args.N][1]:.8f}, "
                  f"increment = {inc:.2e}, distances = "
                  + ", ".join(f"{dist[n]:.3g}" for n in dyadic))
            out[name].append({"profile": rep.profile, "distances": [dist[n] for n in dyadic]})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2)


if __name__ == "__main__":
    main()
