"""Simulate swap/switch/AA circuits on seeded random pairs and report deviations.

    python3 scripts/verify_circuits.py --random 200 --max-n 8 --encoding ved --aa
"""

import sys

from subgraph_qkernel.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify-quantum", *sys.argv[1:]]))
