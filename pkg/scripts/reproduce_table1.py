"""Run the 16-cell bandit benchmark and print the summary table.

    python scripts/reproduce_table1.py --out-dir results/table1
"""

import argparse

from exp3ixrl.harness import fmt, run_matrix, table1_configs


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="results/table1")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--train-steps", type=int, default=10000)
    p.add_argument("--certainty", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()

    configs = table1_configs(args.train_steps, 30, args.runs, args.certainty, args.seed)
    out = run_matrix(configs, args.out_dir, workers=args.workers, stem="table1")
    for row, secs in zip(out.rows, out.cell_seconds):
        print(f"{row.env:<10} {row.algo:<13} {row.teacher:<11} {fmt(row.mean):>9} +/- {fmt(row.std):<9} {secs:6.1f}s")


if __name__ == "__main__":
    main()
