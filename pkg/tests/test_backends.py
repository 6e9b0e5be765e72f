"""The jitted kernels and the numpy fallback must be interchangeable."""

import numpy as np
import pytest

from slotcsma import ConfigError, backends, cycle_graph, path_graph
from slotcsma.chain import build_protocol_chain, spectrum_reversibilization, stationary


NUMBA = backends.kernels("numba")
NUMPY = backends.kernels("numpy")


def _csr(g):
    return g.adjacency_csr


@pytest.mark.parametrize("qmax_lag", [0, 4])
@pytest.mark.parametrize("f_code", [0, 1])
def test_simulate_outputs_identical(qmax_lag, f_code):
    g = path_graph(4)
    lam = np.array([0.25, 0.15, 0.1, 0.25])
    args = (*_csr(g), lam, f_code, 15_000, 20240, qmax_lag, 7)
    for a, b in zip(NUMBA.simulate(*args), NUMPY.simulate(*args)):
        assert np.array_equal(np.asarray(a), np.asarray(b))


def test_simulate_with_weight_override_identical():
    g = cycle_graph(5)
    lam = np.full(5, 0.2)
    w = np.array([2.0, 3.0, 1.5, 2.5, 4.0])
    args = (*_csr(g), lam, 0, 10_000, 7, 0, 3)
    for a, b in zip(NUMBA.simulate(*args, w), NUMPY.simulate(*args, w)):
        assert np.array_equal(np.asarray(a), np.asarray(b))


def test_schedule_chain_identical():
    g = cycle_graph(5)
    w = np.array([2.0, 3.0, 1.5, 2.5, 4.0])
    sa, aa = NUMBA.schedule_chain(*_csr(g), w, 20_000, 123)
    sb, ab = NUMPY.schedule_chain(*_csr(g), w, 20_000, 123)
    assert np.array_equal(sa, sb)
    assert np.array_equal(aa, ab)


def test_conductance_scan_agrees():
    gen = np.random.default_rng(55)
    for graph in (path_graph(3), cycle_graph(4)):
        w = gen.uniform(1, 8, size=graph.n)
        tm = build_protocol_chain(graph, w)
        pi = stationary(tm)
        r = spectrum_reversibilization(tm, pi).reversibilization
        flow = pi[:, None] * r.p
        phi_a, mask_a = NUMBA.conductance_scan(flow, pi)
        phi_b, mask_b = NUMPY.conductance_scan(flow, pi)
        assert phi_a == pytest.approx(phi_b, rel=1e-12)
        assert mask_a == mask_b


def test_env_var_selects_backend(monkeypatch):
    monkeypatch.setenv("SLOTCSMA_BACKEND", "numpy")
    assert backends.backend_name() == "numpy"
    monkeypatch.setenv("SLOTCSMA_BACKEND", "numba")
    assert backends.backend_name() == "numba"
    monkeypatch.delenv("SLOTCSMA_BACKEND")
    assert backends.backend_name() in ("numba", "numpy")
    monkeypatch.setenv("SLOTCSMA_BACKEND", "fortran")
    with pytest.raises(ConfigError):
        backends.backend_name()
