"""Quantum-kernel columns of the benchmark table: BH/SH x VE/VED on one TU dataset.

    python3 scripts/run_benchmark.py --dataset MUTAG --data-root data --out out/mutag
"""

import argparse
import sys

from subgraph_qkernel.cli import main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dataset", default="MUTAG")
    p.add_argument("--data-root", default="data")
    p.add_argument("--out", default="out/benchmark")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--min-edges", type=int, default=0)
    return p.parse_args()


if __name__ == "__main__":
    a = parse_args()
    argv = [
        "benchmark", "--dataset", a.dataset, "--data-root", a.data_root, "--out", a.out,
        "--kernels", "bh,sh", "--encodings", "ve,ved", "--repeats", str(a.repeats),
        "--seed", str(a.seed), "--min-edges", str(a.min_edges),
    ]
    if a.threads:
        argv += ["--threads", str(a.threads)]
    sys.exit(main(argv))
