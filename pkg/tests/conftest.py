import numpy as np
import pytest

from slotcsma import InterferenceGraph, backends, path_graph


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile/warm the active backend so timed tests measure work, not jit."""
    kern = backends.kernels()
    g = path_graph(2)
    indptr, indices = g.adjacency_csr
    lam = np.array([0.1, 0.1])
    kern.simulate(indptr, indices, lam, 0, 4, 1, 0, 1)
    kern.simulate(indptr, indices, lam, 0, 4, 1, 2, 1, np.array([2.0, 2.0]))
    kern.schedule_chain(indptr, indices, np.array([2.0, 2.0]), 4, 1)
    kern.conductance_scan(np.full((2, 2), 0.25), np.array([0.5, 0.5]))


@pytest.fixture
def k2():
    return InterferenceGraph.from_edges(2, [(0, 1)])


@pytest.fixture
def single():
    return InterferenceGraph.from_edges(1, [])
