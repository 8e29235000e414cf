import sys
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(BASE_DIR))

import pytest

from qcore.sampling import RandomSource, random_density_operator
from qcore.states import QUBITS, tensor_product


@pytest.fixture
def rng():
    return RandomSource(1234)


@pytest.fixture
def random_product(rng):
    """Prodotto di due qubit misti di rango pieno."""
    return tensor_product(random_density_operator(2, 2, rng), random_density_operator(2, 2, rng))


@pytest.fixture
def qubits():
    return QUBITS
