"""Phase search queries and accuracy against the target precision.

Prints one CSV row per delta and the fitted exponent of queries vs 1/delta.
"""

import argparse
import math

import numpy as np

from qppkit.phasesearch import QpsConfig, phase_distance, quantum_phase_search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau", type=float, default=math.pi / 3)
    ap.add_argument("--deltas", default="1e-2,1e-3,1e-4,1e-5")
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    U = np.diag([1.0, np.exp(1j * args.tau)])
    chi = np.array([0.0, 1.0])
    deltas = [float(d) for d in args.deltas.split(",")]
    rng = np.random.default_rng(args.seed)
    queries = []
    print("delta,rounds,power,queries,success_rate")
    for delta in deltas:
        config = QpsConfig(delta=delta)
        results = [quantum_phase_search(U, chi, config, rng) for _ in range(args.runs)]
        hits = sum(phase_distance(r.estimate, args.tau) < delta for r in results)
        queries.append(results[0].queries)
        print(f"{delta:g},{config.rounds},{config.power},{results[0].queries},{hits / args.runs:.3f}")
    if len(deltas) > 1:
        slope = np.polyfit(np.log(1 / np.array(deltas)), np.log(queries), 1)[0]
        print(f"# fitted exponent {slope:.3f}")


if __name__ == "__main__":
    main()
