import numpy as np
import pytest

from drheal import _kernels


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    """Run a test under every available kernel backend."""
    previous = _kernels.backend_name()
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
