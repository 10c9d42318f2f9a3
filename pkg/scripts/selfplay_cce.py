"""EXP3-IX self-play on matching pennies: CCE gap of the empirical joint as play lengthens."""

import argparse

from exp3ixrl.core import SeedSpec, make_rng
from exp3ixrl.metrics import cce_gap, matching_pennies, selfplay_joint


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--rounds", default="1000,10000,100000")
    args = p.parse_args()

    game = matching_pennies()
    for rounds in map(int, args.rounds.split(",")):
        gaps = []
        for s in range(args.seeds):
            rngs = [make_rng(SeedSpec(s, f"player{i}")) for i in range(game.players)]
            gaps.append(cce_gap(game, selfplay_joint(game, rounds, rngs)))
        print(f"rounds={rounds:<7} mean gap {sum(gaps) / len(gaps):.4f}  worst {max(gaps):.4f}")


if __name__ == "__main__":
    main()
