import numpy as np
import pytest

import chiralcool as cc


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def dense(op):
    return op.toarray() if hasattr(op, "toarray") else np.asarray(op)


@pytest.fixture(scope="session")
def common_params():
    """Two-atom baseline: asymmetric drives, cooling-regime directionality."""
    return cc.PhysicalParams.from_directionality(
        [1.5, 0.15], [15.0, 1.5], 18.0, 2.0, 0.7)


@pytest.fixture(scope="session")
def atom1_params():
    return cc.PhysicalParams.from_directionality([1.5], [15.0], 18.0, 2.0, 1.0)
