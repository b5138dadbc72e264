import numpy as np
import pytest

from rcslab.circuits import Topology, generate_random_circuit


def random_state(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def random_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture(scope="session")
def grid12():
    return generate_random_circuit(12, Topology.grid(3, 4), 14, seed=0)


@pytest.fixture(scope="session")
def chain10():
    return generate_random_circuit(10, Topology.chain(10), 14, seed=5)
