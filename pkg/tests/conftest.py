import os
import warnings
from pathlib import Path

import numpy as np
import pytest

warnings.filterwarnings("ignore", message="The TBB threading layer")

from subgraph_qkernel.graph import Graph, random_graph, toy_graphs  # noqa: E402

DATA_ROOT = Path(os.environ.get("SUBGRAPH_QKERNEL_DATA", Path(__file__).resolve().parents[1] / "data"))


@pytest.fixture(scope="session")
def toy():
    return toy_graphs()


@pytest.fixture(scope="session")
def data_root():
    return DATA_ROOT


def random_graphs(count, max_n, seed, density=0.4, min_n=1):
    rng = np.random.default_rng(seed)
    return [
        random_graph(int(rng.integers(min_n, max_n + 1)), density, rng, id=i) for i in range(count)
    ]


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
