import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state_matrix(rng, subnormal=True):
    """Random PSD 2x2 matrix with trace in (0, 1]."""
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = a @ a.conj().T
    m /= m.trace().real
    if subnormal:
        m *= rng.uniform(0.05, 1.0)
    return m


def random_unitary_2x2(rng):
    """Haar-ish unitary from the QR decomposition of a complex Gaussian."""
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))
