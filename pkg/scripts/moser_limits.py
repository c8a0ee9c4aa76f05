"""Print the Moser exponent table for a parameter family.

Shows mu_k tending to 2 and lambda_k tending to l/(2(l-1)), which stays
well above zero.

Usage: python scripts/moser_limits.py [-n 3] [-m 1] [--alpha 2] [--beta 2] [--eta 1] [-k 40]
"""

import argparse

from chemolab.theory import ModelParams, moser_table


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, default=3)
    ap.add_argument("-m", type=float, default=1.0)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("-k", type=int, default=40)
    args = ap.parse_args(argv)
    p = ModelParams(n=args.n, m=args.m, alpha=args.alpha, beta=args.beta, eta=args.eta)
    l = 2 * p.n / (p.n - 2)
    print(f"l = {l:.6g}, lambda limit l/(2(l-1)) = {l / (2 * (l - 1)):.6g}")
    print(f"{'k':>3} {'p_k':>14} {'mu1':>10} {'muEta':>10} {'mu0':>10} {'lambda1':>10} {'lambdaEta':>10} {'lambda0':>10}")
    for r in moser_table(p, args.k):
        print(
            f"{r.k:3d} {r.p_k:14.6g} {r.mu1_k:10.6f} {r.muEta_k:10.6f} {r.mu0_k:10.6f} "
            f"{r.lambda1_k:10.6f} {r.lambdaEta_k:10.6f} {r.lambda0_k:10.6f}"
        )


if __name__ == "__main__":
    main()
