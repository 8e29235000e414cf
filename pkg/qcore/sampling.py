"""
Campionamento riproducibile: sorgente casuale, unitari di Haar, stati e
hamiltoniane casuali.

Il generatore è numpy Philox (contatore, 4x64); i figli per i task paralleli
si ottengono con SeedSequence.spawn, quindi dipendono solo dal seed e
dall'ordine delle chiamate a split().
"""

import numpy as np

from qcore.exceptions import PreconditionError
from qcore.states import DensityOperator, Hamiltonian, UnitaryOperator

RNG_ALGORITHM = "numpy.random.Philox(4x64)+SeedSequence"


class RandomSource:
    algorithm = RNG_ALGORITHM

    def __init__(self, seed: int, seed_sequence: np.random.SeedSequence = None):
        if not 0 <= int(seed) < 2**64:
            raise PreconditionError(f"seed fuori dall'intervallo u64: {seed}")
        self.seed = int(seed)
        self._sequence = seed_sequence if seed_sequence is not None else np.random.SeedSequence(self.seed)
        self.generator = np.random.Generator(np.random.Philox(self._sequence))

    def split(self, n: int) -> list:
        return [RandomSource(self.seed, child) for child in self._sequence.spawn(n)]

    def complex_gaussian(self, shape) -> np.ndarray:
        g = self.generator
        return (g.standard_normal(shape) + 1j * g.standard_normal(shape)) / np.sqrt(2.0)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, spawn_key={self._sequence.spawn_key})"


def haar_random_unitary(dim: int, rng: RandomSource) -> UnitaryOperator:
    """QR di una matrice ginibre con correzione delle fasi sulla diagonale di R."""
    if dim < 1:
        raise PreconditionError(f"dimensione non valida: {dim}")
    q, r = np.linalg.qr(rng.complex_gaussian((dim, dim)))
    diag = np.diag(r)
    return UnitaryOperator(q * (diag / np.abs(diag)))


def random_density_operator(dim: int, rank: int, rng: RandomSource) -> DensityOperator:
    if not 1 <= rank <= dim:
        raise PreconditionError(f"rank {rank} fuori da [1, {dim}]")
    g = rng.complex_gaussian((dim, rank))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityOperator(m / np.trace(m).real)


def random_hamiltonian(dim: int, rng: RandomSource, scale: float = 1.0) -> Hamiltonian:
    """Campione GUE (G + G^dagger)/2."""
    g = rng.complex_gaussian((dim, dim))
    return Hamiltonian(scale * (g + g.conj().T) / 2)
