"""Median L1 error of the classical sampler over a ladder of sample sizes.

    python3 scripts/sampler_ladder.py --toy --S 1e2,1e3,1e4,1e5 --trials 1000 --seed 1
"""

import sys

from subgraph_qkernel.cli import main

if __name__ == "__main__":
    sys.exit(main(["sample", *sys.argv[1:]]))
