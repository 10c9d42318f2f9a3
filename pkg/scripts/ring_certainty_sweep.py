"""Certainty-threshold sweep for Exp3-IXrl taught by Q-learning on RingDefense.

Prints the sweep next to the teacher-only reference and writes sweep.csv.
"""

import argparse

from exp3ixrl.harness import ExperimentConfig, fmt, run_matrix, sweep_certainty


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="results/ring_sweep")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--train-steps", type=int, default=10000)
    p.add_argument("--thresholds", default="250,500,1000,2000,4000,8000,12000")
    p.add_argument("--hosts", type=int, default=6)
    p.add_argument("--p-spread", type=float, default=0.3)
    args = p.parse_args()

    env_params = {"hosts": args.hosts, "p_spread": args.p_spread}
    common = dict(env="ring", teacher="qlearning", env_params=env_params, train_steps=args.train_steps, runs=args.runs)
    thresholds = [int(x) for x in args.thresholds.split(",")]
    rows, _ = sweep_certainty(ExperimentConfig(algo="exp3ixrl", **common), thresholds, args.out_dir)
    ref = run_matrix([ExperimentConfig(algo="teacher-only", **common)]).rows[0]
    print(f"teacher-only: {fmt(ref.mean)} +/- {fmt(ref.std)}")
    for c, r in rows:
        print(f"C={c:<6} {fmt(r.mean):>9} +/- {fmt(r.std)}")


if __name__ == "__main__":
    main()
