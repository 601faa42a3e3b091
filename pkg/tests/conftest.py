import numpy as np
import pytest

from stockcast.mlp import Network, Topology


def zero_network(sizes=(5, 21, 21, 1)) -> Network:
    topo = Topology(sizes)
    return Network.from_flat(topo, np.zeros(topo.n_params))


def network_with(sizes, fill):
    """Build a network whose layer k weights/biases come from fill(k, shape)."""
    topo = Topology(sizes)
    ws, bs = [], []
    for k, (fan, m) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
        ws.append(fill(k, (fan, m), "w"))
        bs.append(fill(k, (m,), "b"))
    return Network(topo, tuple(ws), tuple(bs))


@pytest.fixture
def rng():
    return np.random.default_rng(20160914)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
