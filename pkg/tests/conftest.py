import numpy as np
import pytest

from kqe_bench.models import KernelFamily, KernelSpec


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def rbf():
    return KernelSpec(family=KernelFamily.RBF, bandwidth=1.0)


@pytest.fixture
def linear():
    return KernelSpec(family=KernelFamily.LINEAR)


@pytest.fixture
def all_kernels():
    return [
        KernelSpec(family=KernelFamily.RBF, bandwidth=1.3),
        KernelSpec(family=KernelFamily.LAPLACIAN, bandwidth=0.7),
        KernelSpec(family=KernelFamily.LINEAR),
        KernelSpec(family=KernelFamily.POLYNOMIAL, degree=3, offset=1.0),
    ]


@pytest.fixture
def gaussian_pair(rng):
    X = rng.standard_normal((40, 3))
    Y = rng.standard_normal((40, 3)) + np.array([0.5, 0.0, 0.0])
    return X, Y


@pytest.fixture
def csv_file(tmp_path):
    """Factory writing text to a CSV file under tmp_path."""
    def make(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text)
        return path
    return make
