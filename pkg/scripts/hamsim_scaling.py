"""Hamiltonian simulation error and queries over a range of times."""

import argparse

import numpy as np

from qppkit.hamsim import SimRequest, error_vs_exact, simulate
from qppkit.linalg import random_hermitian


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qubits", type=int, default=2)
    ap.add_argument("--times", default="0.5,1,2,4,8,16")
    ap.add_argument("--delta", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    H = random_hermitian(2**args.qubits, args.seed)
    print(f"# ||H|| = {np.linalg.norm(H, 2):.4f}")
    print("time,order,queries,query_ratio,error,success_probability")
    for t in (float(s) for s in args.times.split(",")):
        res = simulate(SimRequest(H, t, args.delta))
        err = error_vs_exact(res.block, H, t)
        print(f"{t:g},{res.truncation_order},{res.queries},{res.query_ratio:.3f},{err:.3e},{res.success_probability:.6f}")


if __name__ == "__main__":
    main()
