"""Entropy estimates in exact and sampled mode against dense references."""

import argparse

import numpy as np

from qppkit.entropy import EntropyRequest, estimate
from qppkit.linalg import random_density


def reference(kind, rho, alpha=None):
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-15]
    if kind == "von_neumann":
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p**alpha)) / (1 - alpha))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--states", type=int, default=10)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--shots", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    cases = [("von_neumann", None), ("renyi", 0.5), ("renyi", 2.0), ("renyi", 3.0)]
    print("state,kind,alpha,reference,exact_mode,sampled,shots")
    for i in range(args.states):
        rho = random_density(args.dim, rng, min_eig=args.gamma)
        for kind, alpha in cases:
            req = dict(kind=kind, alpha=alpha, gamma=args.gamma)
            exact = estimate(EntropyRequest(**req), rho).estimate
            sampled = estimate(EntropyRequest(**req, shots=args.shots, seed=int(rng.integers(2**32))), rho)
            a = "" if alpha is None else f"{alpha:g}"
            print(f"{i},{kind},{a},{reference(kind, rho, alpha):.6f},{exact:.6f},{sampled.estimate:.6f},{sampled.shots_used}")


if __name__ == "__main__":
    main()
